//! Discrete-time kinematic simulation of differential-drive robots.

mod collision;
mod episode;
mod robot;
mod sensors;
mod trace_io;

use serde::{Deserialize, Serialize};

pub use collision::{resolve_collisions, resolve_motion, violations};
pub use episode::{place_robots, run_episode, simulate, step_count, Trace, MAX_PLACEMENT_SAMPLES};
pub use robot::{apply_actuation, RobotState, SwarmState, WheelSpeeds};
pub use sensors::{sense, Rm11Reading, World, GROUND_OFFSETS, SENSOR_ANGLES};
pub use trace_io::{parse_trace, read_trace, write_trace, TRACE_DECIMALS};

/// Physical constants of the simulated robot and its sensors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    /// Control step, seconds.
    pub dt: f64,
    /// Wheel speed bound, m/s.
    pub max_wheel_speed: f64,
    pub robot_radius: f64,
    pub axle_length: f64,
    pub proximity_range: f64,
    pub rab_range: f64,
    /// Half-width of the uniform noise on proximity and light readings.
    pub sensor_noise: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            dt: 0.1,
            max_wheel_speed: 0.12,
            robot_radius: 0.035,
            axle_length: 0.053,
            proximity_range: 0.03,
            rab_range: 0.5,
            sensor_noise: 0.05,
        }
    }
}

impl SimParams {
    pub fn robot_diameter(&self) -> f64 {
        2.0 * self.robot_radius
    }

    pub fn validate(&self) -> crate::Result<()> {
        let all_positive = [self.dt, self.max_wheel_speed, self.robot_radius, self.axle_length, self.proximity_range, self.rab_range]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !all_positive || !(0.0..=1.0).contains(&self.sensor_noise) {
            return Err(crate::Error::InvalidMission(format!("invalid physical parameters: {self:?}")));
        }
        Ok(())
    }
}
