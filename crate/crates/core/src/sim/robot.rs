use serde::{Deserialize, Serialize};

use crate::geometry::{wrap_angle, Vec2};

use super::SimParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub position: Vec2,
    /// Radians in `[-π, π)`.
    pub heading: f64,
}

impl RobotState {
    pub fn new(position: Vec2, heading: f64) -> Self {
        RobotState { position, heading: wrap_angle(heading) }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SwarmState {
    pub robots: Vec<RobotState>,
}

impl SwarmState {
    pub fn new(robots: Vec<RobotState>) -> Self {
        SwarmState { robots }
    }

    /// Robots at the given positions, all facing +x.
    pub fn from_positions(positions: &[Vec2]) -> Self {
        SwarmState { robots: positions.iter().map(|&p| RobotState::new(p, 0.0)).collect() }
    }

    pub fn len(&self) -> usize {
        self.robots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.robots.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.robots.iter().map(|r| r.position)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WheelSpeeds {
    pub left: f64,
    pub right: f64,
}

impl WheelSpeeds {
    pub const STOP: WheelSpeeds = WheelSpeeds { left: 0.0, right: 0.0 };

    pub fn new(left: f64, right: f64) -> Self {
        WheelSpeeds { left, right }
    }

    pub fn clamped(self, max: f64) -> Self {
        WheelSpeeds { left: self.left.clamp(-max, max), right: self.right.clamp(-max, max) }
    }
}

/// Differential-drive kinematics integrated exactly over one step.
pub fn apply_actuation(robot: RobotState, wheels: WheelSpeeds, dt: f64, params: &SimParams) -> RobotState {
    let wheels = wheels.clamped(params.max_wheel_speed);
    let v = 0.5 * (wheels.left + wheels.right);
    let omega = (wheels.right - wheels.left) / params.axle_length;
    let theta = robot.heading;
    let position = if omega.abs() < 1e-12 {
        robot.position + Vec2::from_angle(theta) * (v * dt)
    } else {
        let theta_end = theta + omega * dt;
        let k = v / omega;
        robot.position + Vec2::new(k * (theta_end.sin() - theta.sin()), -k * (theta_end.cos() - theta.cos()))
    };
    RobotState { position, heading: wrap_angle(theta + omega * dt) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_line() {
        let p = SimParams::default();
        let r = apply_actuation(RobotState::new(Vec2::ZERO, 0.0), WheelSpeeds::new(0.12, 0.12), 0.1, &p);
        assert!((r.position.x - 0.012).abs() < 1e-15);
        assert_eq!(r.position.y, 0.0);
        assert_eq!(r.heading, 0.0);
    }

    #[test]
    fn pure_rotation() {
        let p = SimParams::default();
        let v = 0.05;
        let start = RobotState::new(Vec2::new(0.3, -0.2), 0.4);
        let r = apply_actuation(start, WheelSpeeds::new(v, -v), 0.1, &p);
        assert!(r.position.distance(start.position) < 1e-15);
        let expected = wrap_angle(0.4 - 2.0 * v * 0.1 / p.axle_length);
        assert!((r.heading - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_wheels_identity() {
        let p = SimParams::default();
        let start = RobotState::new(Vec2::new(0.1, 0.2), -1.0);
        assert_eq!(apply_actuation(start, WheelSpeeds::STOP, 0.1, &p), start);
    }

    #[test]
    fn arc_displacement_bounded() {
        let p = SimParams::default();
        for (l, r) in [(0.12, 0.05), (-0.12, 0.1), (0.02, 0.12)] {
            let s = apply_actuation(RobotState::new(Vec2::ZERO, 1.0), WheelSpeeds::new(l, r), 0.1, &p);
            assert!(s.position.norm() <= 0.12 * 0.1 + 1e-15);
        }
    }
}
