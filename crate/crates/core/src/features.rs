//! Landmark-distance features of a swarm state and their expectations.
//!
//! For every landmark (each black region, each white region, and the
//! nearest peer) the distance of each robot is mapped through
//! `10^(-2x/d)`, `d` the arena diameter, and the per-landmark group is
//! sorted in descending order so robot identity drops out.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arena::{ArenaSpec, RegionColor};
use crate::error::{Error, Result};
use crate::geometry::{Segment, Vec2};
use crate::mission::{Landmark, MissionSpec};
use crate::sim::SwarmState;

/// Walls are trimmed by this much at both ends before the obstruction
/// test, so a path grazing a wall's free end is not blocked.
const WALL_END_TRIM: f64 = 1e-9;

pub fn scale_distance(x: f64, diameter: f64) -> Result<f64> {
    if !(diameter > 0.0) {
        return Err(Error::NonpositiveDiameter(diameter));
    }
    Ok(10f64.powf(-2.0 * x / diameter))
}

/// True iff the segment `p`–`q` touches an internal wall.
pub fn path_obstructed(arena: &ArenaSpec, p: Vec2, q: Vec2) -> bool {
    let path = Segment::new(p, q);
    arena.walls.iter().any(|w| {
        let len = w.length();
        if len <= 2.0 * WALL_END_TRIM {
            return false;
        }
        let dir = (w.to - w.from) * (WALL_END_TRIM / len);
        Segment::new(w.from + dir, w.to - dir).intersects(&path)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Feature dimension of a mission: landmarks times robots.
pub fn feature_dimension(mission: &MissionSpec) -> usize {
    mission.landmarks().len() * mission.swarm_size
}

pub fn phi(mission: &MissionSpec, state: &SwarmState) -> Result<FeatureVector> {
    let n = mission.swarm_size;
    if state.len() != n {
        return Err(Error::SizeMismatch { expected: n, actual: state.len() });
    }
    let d = mission.arena.diameter();
    let positions: Vec<Vec2> = state.positions().collect();
    let landmarks = mission.landmarks();
    let mut values = Vec::with_capacity(landmarks.len() * n);
    for landmark in landmarks {
        let start = values.len();
        match landmark {
            Landmark::Region { index, .. } => {
                let shape = &mission.arena.regions[index].shape;
                for &p in &positions {
                    let q = shape.nearest_point(p);
                    let v = if path_obstructed(&mission.arena, p, q) { 0.0 } else { scale_distance(p.distance(q), d)? };
                    values.push(v);
                }
            }
            Landmark::NearestPeer => {
                for (i, &p) in positions.iter().enumerate() {
                    let nearest = positions
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, &o)| p.distance(o))
                        .fold(f64::INFINITY, f64::min);
                    // a lone robot has no peer to be near
                    values.push(if nearest.is_finite() { scale_distance(nearest, d)? } else { 0.0 });
                }
            }
        }
        values[start..].sort_by(|a, b| b.total_cmp(a));
    }
    Ok(FeatureVector(values))
}

/// Column labels for a mission's features: landmark and rank within the
/// sorted group, e.g. `black1#3` or `peer#20`.
pub fn feature_labels(mission: &MissionSpec) -> Vec<String> {
    let mut labels = Vec::new();
    let (mut blacks, mut whites) = (0, 0);
    for landmark in mission.landmarks() {
        let name = match landmark {
            Landmark::Region { color: RegionColor::Black, .. } => {
                blacks += 1;
                format!("black{blacks}")
            }
            Landmark::Region { color: RegionColor::White, .. } => {
                whites += 1;
                format!("white{whites}")
            }
            Landmark::NearestPeer => "peer".to_string(),
        };
        labels.extend((1..=mission.swarm_size).map(|rank| format!("{name}#{rank}")));
    }
    labels
}

/// Empirical feature expectation: the mean of sampled feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureExpectation {
    pub mu: Vec<f64>,
    pub sample_count: usize,
}

impl FeatureExpectation {
    pub fn distance(&self, other: &FeatureExpectation) -> f64 {
        self.mu.iter().zip(&other.mu).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

pub fn feature_expectation(mission: &MissionSpec, vectors: &[FeatureVector]) -> Result<FeatureExpectation> {
    let k = feature_dimension(mission);
    if vectors.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut mu = vec![0.0; k];
    for v in vectors {
        if v.len() != k {
            return Err(Error::DimensionMismatch(k, v.len()));
        }
        for (m, x) in mu.iter_mut().zip(&v.0) {
            *m += x;
        }
    }
    let n = vectors.len() as f64;
    mu.iter_mut().for_each(|m| *m /= n);
    Ok(FeatureExpectation { mu, sample_count: vectors.len() })
}

/// A desired final configuration of the swarm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demonstration {
    pub positions: Vec<Vec2>,
}

impl Demonstration {
    pub fn new(positions: Vec<Vec2>) -> Self {
        Demonstration { positions }
    }

    /// Checks size, containment and spacing against a mission.
    pub fn validate(&self, mission: &MissionSpec) -> Result<()> {
        if self.positions.len() != mission.swarm_size {
            return Err(Error::SizeMismatch { expected: mission.swarm_size, actual: self.positions.len() });
        }
        if let Some(p) = self.positions.iter().find(|p| !mission.arena.boundary.contains(**p)) {
            return Err(Error::InvalidDemonstration(format!("({}, {}) lies outside the arena", p.x, p.y)));
        }
        let min = mission.physics.robot_diameter() - 1e-9;
        for (i, p) in self.positions.iter().enumerate() {
            if let Some(q) = self.positions[i + 1..].iter().find(|q| p.distance(**q) < min) {
                return Err(Error::InvalidDemonstration(format!(
                    "({}, {}) and ({}, {}) are closer than a robot diameter",
                    p.x, p.y, q.x, q.y
                )));
            }
        }
        Ok(())
    }

    /// Parses one `x y` pair per line; blank lines and `#` comments are
    /// skipped.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut positions = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let values: Vec<f64> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::parse(origin, format!("line {}: {e}", idx + 1)))?;
            let [x, y] = values[..] else {
                return Err(Error::parse(origin, format!("line {}: expected `x y`", idx + 1)));
            };
            positions.push(Vec2::new(x, y));
        }
        Ok(Demonstration { positions })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn state(&self) -> SwarmState {
        SwarmState::from_positions(&self.positions)
    }
}

impl fmt::Display for Demonstration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.positions {
            writeln!(f, "{} {}", p.x, p.y)?;
        }
        Ok(())
    }
}

pub fn demo_to_features(mission: &MissionSpec, demo: &Demonstration) -> Result<FeatureVector> {
    phi(mission, &demo.state())
}
