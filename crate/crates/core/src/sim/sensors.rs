//! The robot's reference-model sensors: proximity, light, ground and
//! range-and-bearing.

use std::f64::consts::PI;

use rand::Rng;

use crate::arena::{ArenaSpec, FloorColor};
use crate::geometry::{ray_circle_hit, Segment, Vec2};

use super::{SimParams, SwarmState};

/// Proximity and light sensor bearings in the robot frame, counter-clockwise
/// from the heading. Indices 0 and 7 face forward.
pub const SENSOR_ANGLES: [f64; 8] = [
    PI / 18.0,
    PI / 4.0,
    PI / 2.0,
    5.0 * PI / 6.0,
    -5.0 * PI / 6.0,
    -PI / 2.0,
    -PI / 4.0,
    -PI / 18.0,
];

/// Ground sensor positions in the robot frame, meters.
pub const GROUND_OFFSETS: [Vec2; 3] = [Vec2::new(0.03, 0.01), Vec2::new(0.03, 0.0), Vec2::new(0.03, -0.01)];

/// Light intensity reaches half its peak at this distance, meters.
const LIGHT_HALF_DISTANCE: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Rm11Reading {
    pub proximity: [f64; 8],
    pub light: [f64; 8],
    pub ground: [FloorColor; 3],
    pub neighbor_count: usize,
    /// Unit vector towards the perceived peers' center of mass, robot frame.
    pub neighbor_vector: Vec2,
}

impl Default for Rm11Reading {
    fn default() -> Self {
        Rm11Reading {
            proximity: [0.0; 8],
            light: [0.0; 8],
            ground: [FloorColor::Gray; 3],
            neighbor_count: 0,
            neighbor_vector: Vec2::ZERO,
        }
    }
}

impl Rm11Reading {
    /// Sum of sensor directions weighted by proximity, robot frame.
    pub fn proximity_vector(&self) -> Vec2 {
        weighted_sum(&self.proximity)
    }

    pub fn light_vector(&self) -> Vec2 {
        weighted_sum(&self.light)
    }

    pub fn front_proximity(&self) -> f64 {
        [0, 1, 6, 7].iter().map(|&i| self.proximity[i]).fold(0.0, f64::max)
    }

    /// At least two of the three ground sensors see `color`.
    pub fn floor_is(&self, color: FloorColor) -> bool {
        self.ground.iter().filter(|&&g| g == color).count() >= 2
    }
}

fn weighted_sum(values: &[f64; 8]) -> Vec2 {
    SENSOR_ANGLES
        .iter()
        .zip(values)
        .fold(Vec2::ZERO, |acc, (&a, &v)| acc + Vec2::from_angle(a) * v)
}

/// Arena geometry prepared for repeated sensing and collision queries.
#[derive(Debug, Clone)]
pub struct World<'a> {
    pub arena: &'a ArenaSpec,
    pub params: &'a SimParams,
    pub(crate) edges: Vec<Segment>,
    /// Outward unit normals, one per edge.
    pub(crate) normals: Vec<Vec2>,
    pub(crate) apothem: f64,
}

impl<'a> World<'a> {
    pub fn new(arena: &'a ArenaSpec, params: &'a SimParams) -> Self {
        let step = std::f64::consts::TAU / arena.boundary.sides as f64;
        World {
            arena,
            params,
            edges: arena.boundary.edges(),
            normals: (0..arena.boundary.sides).map(|k| Vec2::from_angle(k as f64 * step)).collect(),
            apothem: arena.boundary.apothem(),
        }
    }

    /// Signed distance from `p` to the boundary, positive inside.
    pub fn clearance(&self, p: Vec2) -> f64 {
        self.normals.iter().map(|n| self.apothem - p.dot(*n)).fold(f64::INFINITY, f64::min)
    }

    pub fn sense<R: Rng + ?Sized>(&self, swarm: &SwarmState, index: usize, rng: &mut R) -> Rm11Reading {
        let p = self.params;
        let me = swarm.robots[index];
        let mut reading = Rm11Reading::default();

        // Only obstacles within this reach of the center can reflect a ray.
        let reach = p.robot_radius + p.proximity_range;
        let near_boundary = self.clearance(me.position) <= reach;
        for (i, &angle) in SENSOR_ANGLES.iter().enumerate() {
            let dir = Vec2::from_angle(me.heading + angle);
            let origin = me.position + dir * p.robot_radius;
            let mut dist = f64::INFINITY;
            if near_boundary {
                for e in &self.edges {
                    if let Some(t) = e.ray_hit(origin, dir, p.proximity_range) {
                        dist = dist.min(t);
                    }
                }
            }
            for w in &self.arena.walls {
                if let Some(t) = w.ray_hit(origin, dir, p.proximity_range) {
                    dist = dist.min(t);
                }
            }
            for (j, other) in swarm.robots.iter().enumerate() {
                if j == index || (other.position - me.position).norm_sq() > (reach + p.robot_radius).powi(2) {
                    continue;
                }
                if let Some(t) = ray_circle_hit(origin, dir, other.position, p.robot_radius, p.proximity_range) {
                    dist = dist.min(t);
                }
            }
            if dist.is_finite() {
                reading.proximity[i] = noisy((1.0 - dist / p.proximity_range).clamp(0.0, 1.0), p.sensor_noise, rng);
            }
        }

        if let Some(light) = self.arena.light_on() {
            let rel = light - me.position;
            let intensity = 1.0 / (1.0 + (rel.norm() / LIGHT_HALF_DISTANCE).powi(2));
            let bearing = rel.angle() - me.heading;
            for (i, &angle) in SENSOR_ANGLES.iter().enumerate() {
                let raw = (bearing - angle).cos().max(0.0) * intensity;
                reading.light[i] = noisy(raw, p.sensor_noise, rng);
            }
        }

        for (g, offset) in reading.ground.iter_mut().zip(GROUND_OFFSETS) {
            *g = self.arena.color_at(me.position + offset.rotated(me.heading));
        }

        let mut sum = Vec2::ZERO;
        let mut nearest: Option<(f64, Vec2)> = None;
        for (j, other) in swarm.robots.iter().enumerate() {
            if j == index {
                continue;
            }
            let rel = other.position - me.position;
            let d = rel.norm();
            if d <= p.rab_range {
                reading.neighbor_count += 1;
                sum += rel;
                if nearest.is_none_or(|(nd, _)| d < nd) {
                    nearest = Some((d, rel));
                }
            }
        }
        if let Some((_, rel)) = nearest {
            let dir = sum.normalized().or_else(|| rel.normalized()).unwrap_or(Vec2::new(1.0, 0.0));
            reading.neighbor_vector = dir.rotated(-me.heading);
        }
        reading
    }
}

/// Additive uniform noise on readings that perceive something; a silent
/// sensor stays at zero.
fn noisy<R: Rng + ?Sized>(value: f64, half_width: f64, rng: &mut R) -> f64 {
    if value <= 0.0 || half_width <= 0.0 {
        return value;
    }
    (value + rng.random_range(-half_width..=half_width)).clamp(0.0, 1.0)
}

pub fn sense<R: Rng + ?Sized>(arena: &ArenaSpec, params: &SimParams, swarm: &SwarmState, robot_index: usize, rng: &mut R) -> Rm11Reading {
    World::new(arena, params).sense(swarm, robot_index, rng)
}
