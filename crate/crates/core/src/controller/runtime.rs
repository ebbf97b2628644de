use rand::Rng;

use crate::arena::FloorColor;
use crate::geometry::Vec2;
use crate::sim::{Rm11Reading, SimParams, WheelSpeeds};

use super::{Behavior, Condition, PfsmController};

/// Front proximity above which exploration starts a turn.
pub const OBSTACLE_THRESHOLD: f64 = 0.1;
/// Weight of the obstacle-avoidance term in vector-following behaviors.
pub const AVOIDANCE_GAIN: f64 = 5.0;

/// Per-robot execution state of a controller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControllerRuntime {
    pub current_state: usize,
    /// Remaining steps of an exploration turn.
    pub turn_remaining: u32,
    /// Direction of the ongoing turn, counter-clockwise when true.
    pub turn_left: bool,
}

impl ControllerRuntime {
    pub fn new(controller: &PfsmController) -> Self {
        ControllerRuntime { current_state: controller.initial_state, turn_remaining: 0, turn_left: false }
    }

    fn enter(&mut self, state: usize) {
        self.current_state = state;
        self.turn_remaining = 0;
    }
}

/// Wheel speeds that steer along `target` (robot frame): full speed on the
/// outer wheel, `cos` of the bearing on the inner one.
pub fn wheels_toward(target: Vec2, max_speed: f64) -> WheelSpeeds {
    let angle = if target.norm_sq() > 0.0 { target.angle() } else { 0.0 };
    let (left, right) = if angle > 0.0 && angle < std::f64::consts::PI {
        (angle.cos(), 1.0)
    } else {
        (1.0, angle.cos())
    };
    WheelSpeeds::new(left * max_speed, right * max_speed)
}

impl Condition {
    /// Probability that the condition fires on this reading.
    pub fn firing_probability(&self, reading: &Rm11Reading) -> f64 {
        let logistic = |threshold: u32, steepness: f64| {
            1.0 / (1.0 + (steepness * (threshold as f64 - reading.neighbor_count as f64)).exp())
        };
        match *self {
            Condition::BlackFloor { probability } => gate(reading.floor_is(FloorColor::Black), probability),
            Condition::GrayFloor { probability } => gate(reading.floor_is(FloorColor::Gray), probability),
            Condition::WhiteFloor { probability } => gate(reading.floor_is(FloorColor::White), probability),
            Condition::NeighborCount { threshold, steepness } => logistic(threshold, steepness),
            Condition::InvertedNeighborCount { threshold, steepness } => 1.0 - logistic(threshold, steepness),
            Condition::FixedProbability { probability } => probability,
        }
    }

    pub fn fires<R: Rng + ?Sized>(&self, reading: &Rm11Reading, rng: &mut R) -> bool {
        let p = self.firing_probability(reading);
        p > 0.0 && rng.random::<f64>() < p
    }
}

fn gate(predicate: bool, probability: f64) -> f64 {
    if predicate {
        probability
    } else {
        0.0
    }
}

impl PfsmController {
    /// One control step: take at most one transition, then run the active
    /// behavior. Output is always within `±max_wheel_speed`.
    pub fn step<R: Rng + ?Sized>(&self, rt: &mut ControllerRuntime, reading: &Rm11Reading, params: &SimParams, rng: &mut R) -> WheelSpeeds {
        if let Some(t) = self.states[rt.current_state].transitions.iter().find(|t| t.condition.fires(reading, rng)) {
            rt.enter(t.target);
        }
        let v = params.max_wheel_speed;
        let avoid = -reading.proximity_vector() * AVOIDANCE_GAIN;
        let forward = Vec2::new(1.0, 0.0);
        let wheels = match self.states[rt.current_state].behavior {
            Behavior::Stop => WheelSpeeds::STOP,
            Behavior::Exploration { turn_steps } => {
                if rt.turn_remaining == 0 && reading.front_proximity() > OBSTACLE_THRESHOLD {
                    rt.turn_remaining = rng.random_range(1..=turn_steps);
                    let left_side = reading.proximity[0] + reading.proximity[1];
                    let right_side = reading.proximity[6] + reading.proximity[7];
                    rt.turn_left = left_side < right_side;
                }
                if rt.turn_remaining > 0 {
                    rt.turn_remaining -= 1;
                    if rt.turn_left {
                        WheelSpeeds::new(-v, v)
                    } else {
                        WheelSpeeds::new(v, -v)
                    }
                } else {
                    WheelSpeeds::new(v, v)
                }
            }
            Behavior::Phototaxis => wheels_toward(reading.light_vector().normalized().unwrap_or(forward) + avoid, v),
            Behavior::AntiPhototaxis => wheels_toward((-reading.light_vector()).normalized().unwrap_or(forward) + avoid, v),
            Behavior::Attraction { gain } => {
                let pull = if reading.neighbor_count > 0 { reading.neighbor_vector * gain } else { forward };
                wheels_toward(pull + avoid, v)
            }
            Behavior::Repulsion { gain } => {
                let push = if reading.neighbor_count > 0 { -reading.neighbor_vector * gain } else { forward };
                wheels_toward(push + avoid, v)
            }
        };
        wheels.clamped(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::{State, Transition};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_state(condition: Condition) -> PfsmController {
        PfsmController {
            states: vec![
                State { behavior: Behavior::Stop, transitions: vec![Transition { condition, target: 1 }] },
                State { behavior: Behavior::Exploration { turn_steps: 5 }, transitions: vec![Transition { condition, target: 0 }] },
            ],
            initial_state: 0,
        }
    }

    #[test]
    fn stop_controller_stays_still() {
        let c = PfsmController::stop();
        let mut rt = ControllerRuntime::new(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut reading = Rm11Reading::default();
        reading.proximity = [0.9; 8];
        reading.neighbor_count = 3;
        reading.neighbor_vector = Vec2::new(0.0, 1.0);
        for _ in 0..50 {
            assert_eq!(c.step(&mut rt, &reading, &SimParams::default(), &mut rng), WheelSpeeds::STOP);
            assert_eq!(rt.current_state, 0);
        }
    }

    #[test]
    fn certain_transition_fires_every_step() {
        let c = two_state(Condition::FixedProbability { probability: 1.0 });
        let mut rt = ControllerRuntime::new(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for step in 0..100 {
            c.step(&mut rt, &Rm11Reading::default(), &SimParams::default(), &mut rng);
            assert_eq!(rt.current_state, (step + 1) % 2);
        }
    }

    #[test]
    fn black_floor_cannot_fire_on_gray() {
        let c = two_state(Condition::BlackFloor { probability: 1.0 });
        let mut rt = ControllerRuntime::new(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            c.step(&mut rt, &Rm11Reading::default(), &SimParams::default(), &mut rng);
            assert_eq!(rt.current_state, 0);
        }
        let mut black = Rm11Reading::default();
        black.ground = [FloorColor::Black; 3];
        c.step(&mut rt, &black, &SimParams::default(), &mut rng);
        assert_eq!(rt.current_state, 1);
    }

    #[test]
    fn neighbor_logistic() {
        let mut r = Rm11Reading::default();
        r.neighbor_count = 3;
        let c = Condition::NeighborCount { threshold: 3, steepness: 7.0 };
        assert_eq!(c.firing_probability(&r), 0.5);
        r.neighbor_count = 10;
        assert!(c.firing_probability(&r) > 0.999);
        let inv = Condition::InvertedNeighborCount { threshold: 3, steepness: 7.0 };
        assert!(inv.firing_probability(&r) < 0.001);
    }

    #[test]
    fn steering_law() {
        let v = 0.12;
        assert_eq!(wheels_toward(Vec2::new(1.0, 0.0), v), WheelSpeeds::new(v, v));
        assert_eq!(wheels_toward(Vec2::ZERO, v), WheelSpeeds::new(v, v));
        let left = wheels_toward(Vec2::new(0.0, 1.0), v);
        assert!(left.left.abs() < 1e-15 && left.right == v);
        let right = wheels_toward(Vec2::new(0.0, -1.0), v);
        assert!(right.left == v && right.right.abs() < 1e-15);
    }

    #[test]
    fn exploration_turns_away_from_obstacles() {
        let c = PfsmController::single(Behavior::Exploration { turn_steps: 1 });
        let mut rt = ControllerRuntime::new(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = SimParams::default();
        assert_eq!(c.step(&mut rt, &Rm11Reading::default(), &p, &mut rng), WheelSpeeds::new(0.12, 0.12));
        let mut r = Rm11Reading::default();
        r.proximity[0] = 0.6; // obstacle front-left
        let w = c.step(&mut rt, &r, &p, &mut rng);
        assert_eq!(w, WheelSpeeds::new(0.12, -0.12), "clockwise turn");
    }

    #[test]
    fn attraction_and_repulsion_follow_neighbor_vector() {
        let p = SimParams { sensor_noise: 0.0, ..SimParams::default() };
        let mut r = Rm11Reading::default();
        r.neighbor_count = 2;
        r.neighbor_vector = Vec2::new(0.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let att = PfsmController::single(Behavior::Attraction { gain: 3.0 });
        let w = att.step(&mut ControllerRuntime::new(&att), &r, &p, &mut rng);
        assert!(w.right > w.left);
        let rep = PfsmController::single(Behavior::Repulsion { gain: 3.0 });
        let w = rep.step(&mut ControllerRuntime::new(&rep), &r, &p, &mut rng);
        assert!(w.left > w.right);
    }
}
