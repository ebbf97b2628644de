//! The demonstration-driven design loop.
//!
//! Starting from a random controller, each iteration fits a reward that
//! separates the demonstrations' feature expectation from those of all
//! controllers found so far, designs a controller for that reward, and
//! estimates its feature expectation. The controller whose expectation
//! lies closest to the demonstrations is selected.

mod svm;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controller::{random_controller, PfsmController};
use crate::designer::{optimize_from, terminal_features, DesignBudget, RewardWeights};
use crate::error::{Error, Result};
use crate::features::{demo_to_features, feature_dimension, feature_expectation, Demonstration, FeatureExpectation};
use crate::mission::{MissionName, MissionSpec};

pub use svm::{fit_max_margin, margin, COINCIDENCE_TOLERANCE, KKT_TOLERANCE, SVM_C};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrlIteration {
    pub index: usize,
    /// Reward the controller was designed for; zero for the random start.
    pub w: RewardWeights,
    pub controller: PfsmController,
    pub mu: FeatureExpectation,
    pub margin: f64,
    pub distance_to_demo: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrlRun {
    pub mission: MissionName,
    pub swarm_size: usize,
    pub budget: DesignBudget,
    pub demonstrations: Vec<Demonstration>,
    pub mu_e: FeatureExpectation,
    pub iterations: Vec<IrlIteration>,
    pub selected: usize,
    /// Set when the demonstrations could no longer be separated from the
    /// controllers found, ending the loop before its iteration count.
    pub stopped_early: bool,
}

impl IrlRun {
    pub fn selected_iteration(&self) -> &IrlIteration {
        &self.iterations[self.selected]
    }

    /// Weights of the last reward fitted; zero when no fit happened.
    pub fn final_weights(&self) -> &RewardWeights {
        &self.iterations.last().expect("run has its initial iteration").w
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("run record serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, origin: &std::path::Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(origin, e))
    }
}

/// Feature expectation of a controller over episodes with the given seeds.
pub fn policy_expectation(mission: &MissionSpec, controller: &PfsmController, seeds: &[u64]) -> Result<FeatureExpectation> {
    let vectors = seeds.par_iter().map(|&s| terminal_features(mission, controller, s)).collect::<Result<Vec<_>>>()?;
    feature_expectation(mission, &vectors)
}

/// Feature expectation of a set of demonstrations, each checked first.
pub fn demo_expectation(mission: &MissionSpec, demos: &[Demonstration]) -> Result<FeatureExpectation> {
    if demos.is_empty() {
        return Err(Error::InvalidDemonstration("at least one demonstration is required".into()));
    }
    let mut vectors = Vec::with_capacity(demos.len());
    for (i, d) in demos.iter().enumerate() {
        d.validate(mission).map_err(|e| Error::InvalidDemonstration(format!("demonstration {}: {e}", i + 1)))?;
        vectors.push(demo_to_features(mission, d)?);
    }
    feature_expectation(mission, &vectors)
}

pub fn run_demo_cho<R: Rng + ?Sized>(
    mission: &MissionSpec,
    demos: &[Demonstration],
    iterations: usize,
    budget: DesignBudget,
    rng: &mut R,
) -> Result<IrlRun> {
    budget.validate()?;
    let mu_e = demo_expectation(mission, demos)?;
    let draw_seeds = |rng: &mut R| -> Vec<u64> { (0..budget.seeds_per_evaluation).map(|_| rng.random()).collect() };

    let controller = random_controller(rng);
    let mu = policy_expectation(mission, &controller, &draw_seeds(rng))?;
    let mut records = vec![IrlIteration {
        index: 0,
        w: RewardWeights::zeros(feature_dimension(mission)),
        distance_to_demo: mu_e.distance(&mu),
        controller,
        mu,
        margin: 0.0,
    }];
    let mut stopped_early = false;
    for index in 1..=iterations {
        let mus: Vec<FeatureExpectation> = records.iter().map(|r| r.mu.clone()).collect();
        let w = match fit_max_margin(&mu_e, &mus) {
            Ok(w) => w,
            Err(Error::DegenerateMargin) => {
                stopped_early = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let closest = records.iter().fold(&records[0], |b, r| if r.distance_to_demo < b.distance_to_demo { r } else { b });
        let last = records.last().expect("initial record");
        let mut starts = vec![closest.controller.clone()];
        if last.controller != closest.controller {
            starts.push(last.controller.clone());
        }
        let controller = optimize_from(mission, &w, budget, &starts, rng)?;
        let mu = policy_expectation(mission, &controller, &draw_seeds(rng))?;
        records.push(IrlIteration {
            index,
            margin: margin(&w, &mu_e, &mus),
            distance_to_demo: mu_e.distance(&mu),
            w,
            controller,
            mu,
        });
    }
    let selected = records
        .iter()
        .enumerate()
        .fold(0, |best, (i, r)| if r.distance_to_demo < records[best].distance_to_demo { i } else { best });
    Ok(IrlRun {
        mission: mission.name,
        swarm_size: mission.swarm_size,
        budget,
        demonstrations: demos.to_vec(),
        mu_e,
        iterations: records,
        selected,
        stopped_early,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginRow {
    pub index: usize,
    pub margin: f64,
    pub distance_to_demo: f64,
    pub w: RewardWeights,
}

pub fn margin_report(run: &IrlRun) -> Vec<MarginRow> {
    run.iterations
        .iter()
        .map(|it| MarginRow { index: it.index, margin: it.margin, distance_to_demo: it.distance_to_demo, w: it.w.clone() })
        .collect()
}

/// Component-wise mean of each run's final weights. All runs must share a
/// mission and swarm size.
pub fn mean_weights(runs: &[IrlRun]) -> Result<Vec<f64>> {
    let first = runs.first().ok_or(Error::EmptySample)?;
    let k = first.final_weights().len();
    let mut mean = vec![0.0; k];
    for run in runs {
        if run.mission != first.mission || run.swarm_size != first.swarm_size {
            return Err(Error::InvalidMission(format!(
                "run records mix {} with {} robots and {} with {} robots",
                first.mission, first.swarm_size, run.mission, run.swarm_size
            )));
        }
        let w = run.final_weights();
        if w.len() != k {
            return Err(Error::DimensionMismatch(k, w.len()));
        }
        for (m, x) in mean.iter_mut().zip(&w.0) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= runs.len() as f64);
    Ok(mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::mission::build_mission;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_homing() -> MissionSpec {
        let mut m = build_mission("Homing").unwrap().with_swarm_size(3);
        m.duration = 10.0;
        m
    }

    fn home_demo() -> Demonstration {
        Demonstration::new(vec![Vec2::new(0.5, 0.0), Vec2::new(0.6, 0.1), Vec2::new(0.7, 0.0)])
    }

    #[test]
    fn zero_iterations_keeps_random_start() {
        let m = small_homing();
        let run = run_demo_cho(&m, &[home_demo()], 0, DesignBudget::new(20, 2).unwrap(), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(run.iterations.len(), 1);
        assert_eq!(run.selected, 0);
        assert_eq!(run.final_weights(), &RewardWeights::zeros(6));
        assert_eq!(margin_report(&run).len(), 1);
    }

    #[test]
    fn each_fit_uses_all_previous_expectations() {
        let m = small_homing();
        let run = run_demo_cho(&m, &[home_demo()], 3, DesignBudget::new(30, 2).unwrap(), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        for it in &run.iterations[1..] {
            let mus: Vec<_> = run.iterations[..it.index].iter().map(|r| r.mu.clone()).collect();
            assert_eq!(fit_max_margin(&run.mu_e, &mus).unwrap(), it.w);
            assert!((it.w.norm() - 1.0).abs() < 1e-9);
            assert!(it.margin > 0.0);
        }
        let best = run.iterations.iter().map(|r| r.distance_to_demo).fold(f64::INFINITY, f64::min);
        assert_eq!(run.selected_iteration().distance_to_demo, best);
    }

    #[test]
    fn run_is_reproducible_and_serializes() {
        let m = small_homing();
        let budget = DesignBudget::new(24, 2).unwrap();
        let a = run_demo_cho(&m, &[home_demo()], 2, budget, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = run_demo_cho(&m, &[home_demo()], 2, budget, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(IrlRun::from_json(&a.to_json(), std::path::Path::new("r")).unwrap(), a);
    }

    #[test]
    fn invalid_demonstrations_are_rejected() {
        let m = small_homing();
        let budget = DesignBudget::new(20, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(run_demo_cho(&m, &[], 1, budget, &mut rng), Err(Error::InvalidDemonstration(_))));
        let short = Demonstration::new(vec![Vec2::ZERO]);
        assert!(matches!(run_demo_cho(&m, &[short], 1, budget, &mut rng), Err(Error::InvalidDemonstration(_))));
    }

    #[test]
    fn mean_of_opposite_weights_cancels() {
        let m = small_homing();
        let run = run_demo_cho(&m, &[home_demo()], 1, DesignBudget::new(20, 2).unwrap(), &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let mut neg = run.clone();
        let last = neg.iterations.len() - 1;
        neg.iterations[last].w.0.iter_mut().for_each(|x| *x = -*x);
        assert_eq!(mean_weights(std::slice::from_ref(&run)).unwrap(), run.final_weights().0);
        assert!(mean_weights(&[run, neg]).unwrap().iter().all(|&x| x == 0.0));
        assert!(mean_weights(&[]).is_err());
    }
}
