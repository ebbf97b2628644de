//! Max-margin separation of the demonstration feature expectation from
//! the policy feature expectations.
//!
//! The bias-free linear SVM with `μ_E` labeled +1 and each `μ_i` labeled
//! −1 is solved in its equivalent difference form: every `z_i = μ_E − μ_i`
//! must satisfy `w · z_i ≥ 1`. With a bias-free separator this yields the
//! direction from the closest point of the convex hull of `{μ_i}` to `μ_E`.
//! The dual is solved by cyclic coordinate ascent with box constraints
//! `0 ≤ α_i ≤ C`.

use crate::designer::RewardWeights;
use crate::error::{Error, Result};
use crate::features::FeatureExpectation;

pub const SVM_C: f64 = 1e3;
pub const KKT_TOLERANCE: f64 = 1e-6;
/// Expectations closer than this count as coincident.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-9;
const MAX_SWEEPS: usize = 1_000_000;

/// Unit weight vector of the max-margin separator.
///
/// Fails with [`Error::DegenerateMargin`] when `μ_E` coincides with some
/// `μ_i` or cannot be strictly separated from them.
pub fn fit_max_margin(mu_e: &FeatureExpectation, mus: &[FeatureExpectation]) -> Result<RewardWeights> {
    if mus.is_empty() {
        return Err(Error::EmptySample);
    }
    let k = mu_e.mu.len();
    if let Some(bad) = mus.iter().find(|m| m.mu.len() != k) {
        return Err(Error::DimensionMismatch(k, bad.mu.len()));
    }
    let z: Vec<Vec<f64>> = mus.iter().map(|m| mu_e.mu.iter().zip(&m.mu).map(|(e, x)| e - x).collect()).collect();
    let q: Vec<f64> = z.iter().map(|zi| dot(zi, zi)).collect();
    if q.iter().any(|&qi| qi.sqrt() <= COINCIDENCE_TOLERANCE) {
        return Err(Error::DegenerateMargin);
    }

    let mut alpha = vec![0.0; z.len()];
    let mut w = vec![0.0; k];
    for _ in 0..MAX_SWEEPS {
        let mut worst = 0.0f64;
        for i in 0..z.len() {
            let g = dot(&w, &z[i]) - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == SVM_C {
                g.max(0.0)
            } else {
                g
            };
            worst = worst.max(pg.abs());
            if pg != 0.0 {
                let next = (alpha[i] - g / q[i]).clamp(0.0, SVM_C);
                let delta = next - alpha[i];
                alpha[i] = next;
                for (wj, zj) in w.iter_mut().zip(&z[i]) {
                    *wj += delta * zj;
                }
            }
        }
        if worst < KKT_TOLERANCE {
            break;
        }
    }

    let norm = dot(&w, &w).sqrt();
    if norm <= COINCIDENCE_TOLERANCE {
        return Err(Error::DegenerateMargin);
    }
    w.iter_mut().for_each(|x| *x /= norm);
    if z.iter().map(|zi| dot(&w, zi)).fold(f64::INFINITY, f64::min) <= COINCIDENCE_TOLERANCE {
        return Err(Error::DegenerateMargin);
    }
    Ok(RewardWeights(w))
}

/// `w · μ_E − max_i w · μ_i`.
pub fn margin(w: &RewardWeights, mu_e: &FeatureExpectation, mus: &[FeatureExpectation]) -> f64 {
    let best = mus.iter().map(|m| w.dot(&m.mu)).fold(f64::NEG_INFINITY, f64::max);
    w.dot(&mu_e.mu) - best
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fe(mu: &[f64]) -> FeatureExpectation {
        FeatureExpectation { mu: mu.to_vec(), sample_count: 1 }
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-6)
    }

    #[test]
    fn one_dimension() {
        assert_eq!(fit_max_margin(&fe(&[1.0]), &[fe(&[0.0])]).unwrap().0, vec![1.0]);
    }

    #[test]
    fn single_negative_gives_difference_direction() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let w = fit_max_margin(&fe(&[1.0, 0.0]), &[fe(&[0.0, 1.0])]).unwrap();
        assert!(close(&w.0, &[h, -h]), "{w:?}");
    }

    #[test]
    fn symmetric_pair() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let w = fit_max_margin(&fe(&[1.0, 1.0]), &[fe(&[0.0, 1.0]), fe(&[1.0, 0.0])]).unwrap();
        assert!(close(&w.0, &[h, h]), "{w:?}");
        let m = margin(&w, &fe(&[1.0, 1.0]), &[fe(&[0.0, 1.0]), fe(&[1.0, 0.0])]);
        assert!((m - h).abs() < 1e-6);
    }

    #[test]
    fn coincident_or_enclosed_demo_is_degenerate() {
        let e = fe(&[0.5, 0.5]);
        assert!(matches!(fit_max_margin(&e, &[fe(&[0.0, 0.0]), fe(&[0.5, 0.5])]), Err(Error::DegenerateMargin)));
        let hull = [fe(&[0.0, 0.0]), fe(&[1.0, 0.0]), fe(&[0.0, 1.0]), fe(&[1.0, 1.0])];
        assert!(matches!(fit_max_margin(&e, &hull), Err(Error::DegenerateMargin)));
    }

    #[test]
    fn input_checks() {
        assert!(matches!(fit_max_margin(&fe(&[1.0]), &[]), Err(Error::EmptySample)));
        assert!(matches!(fit_max_margin(&fe(&[1.0]), &[fe(&[0.0, 1.0])]), Err(Error::DimensionMismatch(1, 2))));
    }

    proptest! {
        #[test]
        fn unit_norm_and_feasible(
            e in proptest::collection::vec(0.0f64..1.0, 3),
            pts in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 3), 1..6),
        ) {
            let mus: Vec<_> = pts.iter().map(|p| fe(p)).collect();
            if let Ok(w) = fit_max_margin(&fe(&e), &mus) {
                prop_assert!((w.norm() - 1.0).abs() < 1e-6);
                prop_assert!(margin(&w, &fe(&e), &mus) > 0.0);
            }
        }

        #[test]
        fn matches_closest_hull_point_for_two_points(
            e in proptest::collection::vec(0.0f64..1.0, 2),
            a in proptest::collection::vec(0.0f64..1.0, 2),
            b in proptest::collection::vec(0.0f64..1.0, 2),
        ) {
            // closest point of segment ab to e, then direction from it to e
            let (ab, ae) = ([b[0] - a[0], b[1] - a[1]], [e[0] - a[0], e[1] - a[1]]);
            let len = ab[0] * ab[0] + ab[1] * ab[1];
            let t = if len > 0.0 { ((ae[0] * ab[0] + ae[1] * ab[1]) / len).clamp(0.0, 1.0) } else { 0.0 };
            let d = [e[0] - a[0] - t * ab[0], e[1] - a[1] - t * ab[1]];
            let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
            // keep away from the non-separable boundary where the soft margin bites
            prop_assume!(n > 0.05);
            let w = fit_max_margin(&fe(&e), &[fe(&a), fe(&b)]).unwrap();
            let angle = (w.0[0] * d[0] / n + w.0[1] * d[1] / n).clamp(-1.0, 1.0).acos();
            prop_assert!(angle < 1e-3, "angle {angle}");
        }
    }
}
