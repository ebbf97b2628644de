//! Planar geometry used by the simulator and the feature map.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at `angle` radians from the x axis.
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Vec2::new(c, s)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 1e-12).then(|| self * (1.0 / n))
    }

    /// Rotates counter-clockwise by `angle` radians.
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Left-hand perpendicular.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let w = a - TAU * ((a + PI) / TAU).floor();
    // floor() rounding can land exactly on +π
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub from: Vec2,
    pub to: Vec2,
}

impl Segment {
    pub const fn new(from: Vec2, to: Vec2) -> Self {
        Segment { from, to }
    }

    pub fn length(&self) -> f64 {
        self.from.distance(self.to)
    }

    pub fn closest_point(&self, p: Vec2) -> Vec2 {
        let d = self.to - self.from;
        let len_sq = d.norm_sq();
        if len_sq == 0.0 {
            return self.from;
        }
        let t = ((p - self.from).dot(d) / len_sq).clamp(0.0, 1.0);
        self.from + d * t
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        p.distance(self.closest_point(p))
    }

    /// Closed intersection test: touching counts.
    pub fn intersects(&self, o: &Segment) -> bool {
        let (p, r) = (self.from, self.to - self.from);
        let (q, s) = (o.from, o.to - o.from);
        let denom = r.cross(s);
        let qp = q - p;
        const EPS: f64 = 1e-12;
        if denom.abs() < EPS {
            // parallel; overlap only if collinear
            if qp.cross(r).abs() > EPS {
                return false;
            }
            let rr = r.norm_sq();
            if rr == 0.0 {
                return o.distance_to(p) <= EPS;
            }
            let t0 = qp.dot(r) / rr;
            let t1 = t0 + s.dot(r) / rr;
            let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
            return hi >= -EPS && lo <= 1.0 + EPS;
        }
        let t = qp.cross(s) / denom;
        let u = qp.cross(r) / denom;
        (-EPS..=1.0 + EPS).contains(&t) && (-EPS..=1.0 + EPS).contains(&u)
    }

    /// Distance along a ray to this segment, if hit within `max_range`.
    pub fn ray_hit(&self, origin: Vec2, dir: Vec2, max_range: f64) -> Option<f64> {
        let s = self.to - self.from;
        let denom = dir.cross(s);
        if denom.abs() < 1e-15 {
            return None;
        }
        let qp = self.from - origin;
        let t = qp.cross(s) / denom;
        let u = qp.cross(dir) / denom;
        ((0.0..=max_range).contains(&t) && (0.0..=1.0).contains(&u)).then_some(t)
    }
}

/// Distance along a ray to a circle boundary (0 when the origin is inside).
pub fn ray_circle_hit(origin: Vec2, dir: Vec2, center: Vec2, radius: f64, max_range: f64) -> Option<f64> {
    let oc = origin - center;
    let c = oc.norm_sq() - radius * radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    let b = oc.dot(dir);
    if b > 0.0 {
        return None;
    }
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let t = -b - disc.sqrt();
    (t <= max_range).then_some(t.max(0.0))
}

/// Earliest `t ∈ [0, 1]` at which `start + t·motion` comes within `radius` of
/// `center`. Motion that starts in contact but separates is unconstrained.
pub fn sweep_circle(start: Vec2, motion: Vec2, center: Vec2, radius: f64) -> Option<f64> {
    let oc = start - center;
    let b = oc.dot(motion);
    if b >= 0.0 {
        return None;
    }
    let c = oc.norm_sq() - radius * radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    let a = motion.norm_sq();
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    let t = (-b - disc.sqrt()) / a;
    (t <= 1.0).then_some(t.max(0.0))
}

/// Earliest `t ∈ [0, 1]` at which the moving point comes within `radius` of
/// the segment (a capsule sweep).
pub fn sweep_capsule(start: Vec2, motion: Vec2, seg: &Segment, radius: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    let mut take = |t: Option<f64>| {
        if let Some(t) = t {
            best = Some(best.map_or(t, |b: f64| b.min(t)));
        }
    };
    take(sweep_circle(start, motion, seg.from, radius));
    take(sweep_circle(start, motion, seg.to, radius));
    let d = seg.to - seg.from;
    let len = d.norm();
    if len > 0.0 {
        let e = d * (1.0 / len);
        let n = e.perp();
        let h0 = (start - seg.from).dot(n);
        let hv = motion.dot(n);
        // approaching the band from one side
        if h0.abs() >= radius && h0 * hv < 0.0 {
            let t = (h0.abs() - radius) / hv.abs();
            if t <= 1.0 {
                let s = (start + motion * t - seg.from).dot(e);
                if (0.0..=len).contains(&s) {
                    take(Some(t));
                }
            }
        } else if h0.abs() < radius && h0 * hv < 0.0 {
            let s = (start - seg.from).dot(e);
            if (0.0..=len).contains(&s) {
                take(Some(0.0));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_angle_range() {
        for k in -20..20 {
            let a = k as f64 * 0.7;
            let w = wrap_angle(a);
            assert!((-PI..PI).contains(&w), "{a} -> {w}");
            assert!(((a - w) / (2.0 * PI)).fract().abs() < 1e-9 || ((a - w) / (2.0 * PI)).fract().abs() > 1.0 - 1e-9);
        }
        assert_eq!(wrap_angle(PI), -PI);
    }

    #[test]
    fn segment_intersections() {
        let a = Segment::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0));
        let b = Segment::new(Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0));
        let c = Segment::new(Vec2::new(2.0, 0.0), Vec2::new(3.0, 1.0));
        assert!(a.intersects(&b));
        assert!(!a.intersects(&c));
        // touching at an endpoint
        let d = Segment::new(Vec2::new(1.0, 1.0), Vec2::new(2.0, 1.0));
        assert!(a.intersects(&d));
    }

    #[test]
    fn ray_hits() {
        let wall = Segment::new(Vec2::new(1.0, -1.0), Vec2::new(1.0, 1.0));
        let t = wall.ray_hit(Vec2::ZERO, Vec2::new(1.0, 0.0), 5.0).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
        assert!(wall.ray_hit(Vec2::ZERO, Vec2::new(-1.0, 0.0), 5.0).is_none());
        let t = ray_circle_hit(Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0), 0.5, 5.0).unwrap();
        assert!((t - 1.5).abs() < 1e-12);
    }

    #[test]
    fn sweeps() {
        let t = sweep_circle(Vec2::ZERO, Vec2::new(2.0, 0.0), Vec2::new(2.0, 0.0), 1.0).unwrap();
        assert!((t - 0.5).abs() < 1e-12);
        assert!(sweep_circle(Vec2::ZERO, Vec2::new(-2.0, 0.0), Vec2::new(2.0, 0.0), 1.0).is_none());
        let wall = Segment::new(Vec2::new(1.0, -1.0), Vec2::new(1.0, 1.0));
        let t = sweep_capsule(Vec2::ZERO, Vec2::new(1.0, 0.0), &wall, 0.25).unwrap();
        assert!((t - 0.75).abs() < 1e-12);
        // passes beyond the end cap
        assert!(sweep_capsule(Vec2::new(0.0, 2.0), Vec2::new(2.0, 0.0), &wall, 0.25).is_none());
    }
}
