use crate::arena::{RegionColor, Shape};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::sim::{step_count, SwarmState, Trace};

use super::{MissionName, MissionSpec};

/// Spacing of the evaluation grid used by [`estimate_coverage`], meters.
pub const COVERAGE_GRID_PITCH: f64 = 0.02;
/// Largest reported expected distance, centimeters.
pub const COVERAGE_CAP_CM: f64 = 250.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveResult {
    pub value: f64,
    /// N(t) for t = 1..T seconds; empty for CFA.
    pub counts: Vec<usize>,
}

/// Streaming objective evaluation, fed one swarm state per control step.
/// Lets the designer score episodes without keeping their traces.
#[derive(Debug, Clone)]
pub struct ObjectiveTracker<'a> {
    mission: &'a MissionSpec,
    targets: Vec<&'a Shape>,
    steps_per_second: f64,
    total_steps: usize,
    counts: Vec<usize>,
    final_state: Option<SwarmState>,
}

impl<'a> ObjectiveTracker<'a> {
    pub fn new(mission: &'a MissionSpec) -> Self {
        let color = match mission.name {
            MissionName::Sac => RegionColor::White,
            _ => RegionColor::Black,
        };
        let targets = mission.arena.regions.iter().filter(|r| r.color == color).map(|r| &r.shape).collect();
        ObjectiveTracker {
            mission,
            targets,
            steps_per_second: 1.0 / mission.physics.dt,
            total_steps: step_count(mission.duration, mission.physics.dt),
            counts: Vec::new(),
            final_state: None,
        }
    }

    fn seconds(&self) -> usize {
        (self.mission.duration + 1e-9).floor() as usize
    }

    fn inside(&self, state: &SwarmState) -> usize {
        state.positions().filter(|&p| self.targets.iter().any(|s| s.contains(p))).count()
    }

    /// Observes the state after `step` control steps.
    pub fn observe(&mut self, step: usize, state: &SwarmState) {
        if self.mission.name != MissionName::Cfa {
            let next_second = self.counts.len() + 1;
            if next_second <= self.seconds() && step == (next_second as f64 * self.steps_per_second).round() as usize {
                self.counts.push(self.inside(state));
            }
        }
        if step == self.total_steps {
            self.final_state = Some(state.clone());
        }
    }

    pub fn finish(self) -> Result<ObjectiveResult> {
        let Some(last) = &self.final_state else {
            return Err(Error::TraceMismatch { expected: self.total_steps + 1, actual: 0 });
        };
        let value = match self.mission.name {
            MissionName::Homing => self.inside(last) as f64,
            MissionName::Aac | MissionName::Sac => self.counts.iter().sum::<usize>() as f64,
            MissionName::Cfa => COVERAGE_CAP_CM - estimate_coverage(self.mission, last),
        };
        Ok(ObjectiveResult { value, counts: self.counts })
    }
}

/// Scores a recorded episode with the mission's original objective.
pub fn objective(mission: &MissionSpec, trace: &Trace) -> Result<ObjectiveResult> {
    let expected = step_count(mission.duration, mission.physics.dt) + 1;
    if trace.states.len() != expected {
        return Err(Error::TraceMismatch { expected, actual: trace.states.len() });
    }
    if let Some(bad) = trace.states.iter().find(|s| s.len() != mission.swarm_size) {
        return Err(Error::SizeMismatch { expected: mission.swarm_size, actual: bad.len() });
    }
    let mut tracker = ObjectiveTracker::new(mission);
    for (step, state) in trace.states.iter().enumerate() {
        tracker.observe(step, state);
    }
    tracker.finish()
}

/// Cell centers of a square grid clipped to the arena.
pub(crate) fn coverage_grid(mission: &MissionSpec) -> Vec<Vec2> {
    let boundary = &mission.arena.boundary;
    let half = boundary.circumradius;
    let cells = (2.0 * half / COVERAGE_GRID_PITCH).ceil() as usize;
    let origin = -(cells as f64) * COVERAGE_GRID_PITCH / 2.0;
    let mut points = Vec::new();
    for i in 0..cells {
        for j in 0..cells {
            let p = Vec2::new(
                origin + (i as f64 + 0.5) * COVERAGE_GRID_PITCH,
                origin + (j as f64 + 0.5) * COVERAGE_GRID_PITCH,
            );
            if boundary.contains(p) {
                points.push(p);
            }
        }
    }
    points
}

/// Robots whose center is not on a black (forbidden) region.
pub(crate) fn eligible_robots(mission: &MissionSpec, state: &SwarmState) -> Vec<Vec2> {
    state
        .positions()
        .filter(|&p| !mission.arena.regions.iter().any(|r| r.color == RegionColor::Black && r.shape.contains(p)))
        .collect()
}

/// Expected distance in centimeters from a point of the arena to the
/// closest eligible robot, averaged over a fixed grid.
pub fn estimate_coverage(mission: &MissionSpec, final_state: &SwarmState) -> f64 {
    let robots = eligible_robots(mission, final_state);
    if robots.is_empty() {
        return COVERAGE_CAP_CM;
    }
    let grid = coverage_grid(mission);
    let total: f64 = grid
        .iter()
        .map(|&g| robots.iter().map(|&r| g.distance(r)).fold(f64::INFINITY, f64::min))
        .sum();
    (100.0 * total / grid.len() as f64).min(COVERAGE_CAP_CM)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mission::build_mission;
    use crate::sim::RobotState;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn constant_trace(mission: &MissionSpec, positions: &[Vec2]) -> Trace {
        let state = SwarmState::from_positions(positions);
        let n = step_count(mission.duration, mission.physics.dt) + 1;
        Trace { states: vec![state; n], seed: 0, step_duration: mission.physics.dt }
    }

    fn inside_disc(center: Vec2, radius: f64, n: usize) -> Vec<Vec2> {
        (0..n).map(|i| center + Vec2::from_angle(i as f64) * (radius * (i as f64 + 1.0) / (n as f64 + 1.0))).collect()
    }

    #[test]
    fn homing_all_home() {
        let m = build_mission("Homing").unwrap();
        let t = constant_trace(&m, &inside_disc(Vec2::new(0.6, 0.0), 0.29, 20));
        let r = objective(&m, &t).unwrap();
        assert_eq!(r.value, 20.0);
        assert_eq!(r.counts.len(), 180);
    }

    #[test]
    fn aac_extremes() {
        let m = build_mission("AAC").unwrap();
        let t = constant_trace(&m, &inside_disc(Vec2::new(0.0, 0.6), 0.29, 20));
        assert_eq!(objective(&m, &t).unwrap().value, 3600.0);
        let t = constant_trace(&m, &inside_disc(Vec2::new(0.0, -0.6), 0.29, 20));
        assert_eq!(objective(&m, &t).unwrap().value, 0.0);
    }

    #[test]
    fn sac_counts_white_shelter() {
        let m = build_mission("SAC").unwrap();
        let mut pos = vec![Vec2::new(0.0, 0.0)];
        pos.extend(inside_disc(Vec2::new(0.0, -0.8), 0.3, 19));
        assert_eq!(objective(&m, &constant_trace(&m, &pos)).unwrap().value, 180.0);
    }

    #[test]
    fn counts_sampled_once_per_second() {
        let m = build_mission("AAC").unwrap().with_swarm_size(1);
        let n = step_count(m.duration, m.physics.dt) + 1;
        let home = Vec2::new(0.0, 0.6);
        let away = Vec2::new(0.0, -0.6);
        // inside only on steps that are not whole seconds
        let states = (0..n)
            .map(|s| SwarmState::from_positions(&[if s % 10 == 0 { away } else { home }]))
            .collect();
        let t = Trace { states, seed: 0, step_duration: 0.1 };
        assert_eq!(objective(&m, &t).unwrap().value, 0.0);
    }

    #[test]
    fn wrong_length_is_rejected() {
        let m = build_mission("Homing").unwrap();
        let mut t = constant_trace(&m, &inside_disc(Vec2::ZERO, 0.5, 20));
        t.states.pop();
        assert!(matches!(objective(&m, &t), Err(Error::TraceMismatch { expected: 1801, actual: 1800 })));
    }

    #[test]
    fn coverage_without_eligible_robots() {
        let m = build_mission("CFA").unwrap();
        let centers: Vec<Vec2> = m.arena.regions.iter().map(|r| r.shape.center()).collect();
        let pos: Vec<Vec2> = (0..20).map(|i| centers[i % 3] + Vec2::from_angle(i as f64) * 0.1).collect();
        let state = SwarmState::from_positions(&pos);
        assert_eq!(estimate_coverage(&m, &state), 250.0);
        assert_eq!(objective(&m, &constant_trace(&m, &pos)).unwrap().value, 0.0);
    }

    #[test]
    fn coverage_of_dense_swarm_is_zero() {
        let m = build_mission("CFA").unwrap();
        let grid = coverage_grid(&m);
        let state = SwarmState::new(grid.iter().map(|&p| RobotState::new(p, 0.0)).collect());
        let black = |p: Vec2| m.arena.regions.iter().any(|r| r.shape.contains(p));
        let e = estimate_coverage(&m, &state);
        // grid points on black regions are covered by robots at most one pitch away
        assert!(e <= 100.0 * COVERAGE_GRID_PITCH, "{e}");
        assert!(grid.iter().any(|&p| black(p)));
    }

    #[test]
    fn coverage_matches_monte_carlo_for_central_robot() {
        let m = build_mission("CFA").unwrap();
        let state = SwarmState::from_positions(&[Vec2::ZERO]);
        let e = estimate_coverage(&m, &state);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = m.arena.boundary.circumradius;
        let (mut sum, mut n) = (0.0, 0);
        while n < 200_000 {
            let p = Vec2::new(rng.random_range(-r..r), rng.random_range(-r..r));
            if m.arena.boundary.contains(p) {
                sum += p.norm();
                n += 1;
            }
        }
        let mc = 100.0 * sum / n as f64;
        assert!((e - mc).abs() < 0.5, "grid {e} vs monte carlo {mc}");
    }

    #[test]
    fn adding_an_eligible_robot_never_hurts() {
        let m = build_mission("CFA").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mut pos: Vec<Vec2> = (0..5).map(|_| Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let before = estimate_coverage(&m, &SwarmState::from_positions(&pos));
            pos.push(Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let after = estimate_coverage(&m, &SwarmState::from_positions(&pos));
            assert!(after <= before + 1e-12);
        }
    }
}
