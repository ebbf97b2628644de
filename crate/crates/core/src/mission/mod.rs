//! The four benchmark missions and their objective functions.

mod objective;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arena::{ArenaSpec, RegionColor};
use crate::error::{Error, Result};
use crate::sim::SimParams;

pub use objective::{estimate_coverage, objective, ObjectiveResult, ObjectiveTracker, COVERAGE_CAP_CM, COVERAGE_GRID_PITCH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MissionName {
    Homing,
    #[serde(rename = "AAC")]
    Aac,
    #[serde(rename = "SAC")]
    Sac,
    #[serde(rename = "CFA")]
    Cfa,
}

impl MissionName {
    pub const ALL: [MissionName; 4] = [MissionName::Homing, MissionName::Aac, MissionName::Sac, MissionName::Cfa];

    pub fn as_str(self) -> &'static str {
        match self {
            MissionName::Homing => "Homing",
            MissionName::Aac => "AAC",
            MissionName::Sac => "SAC",
            MissionName::Cfa => "CFA",
        }
    }
}

impl fmt::Display for MissionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MissionName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MissionName::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownMission(s.to_string()))
    }
}

/// Anchor of one group of distance features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Landmark {
    /// Index into the arena's region list.
    Region { index: usize, color: RegionColor },
    NearestPeer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissionSpec {
    pub name: MissionName,
    pub swarm_size: usize,
    /// Seconds.
    pub duration: f64,
    pub arena: ArenaSpec,
    #[serde(default)]
    pub physics: SimParams,
}

impl MissionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size == 0 {
            return Err(Error::InvalidMission("swarm_size must be at least 1".into()));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidMission(format!("duration must be positive, got {}", self.duration)));
        }
        self.physics.validate()?;
        self.arena.validate()?;
        let needs = |color: RegionColor| self.arena.regions.iter().any(|r| r.color == color);
        let ok = match self.name {
            MissionName::Homing | MissionName::Aac | MissionName::Cfa => needs(RegionColor::Black),
            MissionName::Sac => needs(RegionColor::White),
        };
        if !ok {
            return Err(Error::InvalidMission(format!("{} needs its target region", self.name)));
        }
        Ok(())
    }

    /// Black regions in file order, then white regions, then the
    /// nearest-peer pseudo-landmark.
    pub fn landmarks(&self) -> Vec<Landmark> {
        let regions = &self.arena.regions;
        let of = |color: RegionColor| {
            regions
                .iter()
                .enumerate()
                .filter(move |(_, r)| r.color == color)
                .map(move |(index, _)| Landmark::Region { index, color })
        };
        of(RegionColor::Black).chain(of(RegionColor::White)).chain(std::iter::once(Landmark::NearestPeer)).collect()
    }

    /// Same mission with a different swarm size.
    pub fn with_swarm_size(mut self, swarm_size: usize) -> Self {
        self.swarm_size = swarm_size;
        self
    }

    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        let spec: MissionSpec = toml::from_str(text).map_err(|e| Error::parse(origin, e))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("mission serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }
}

/// Canonical mission files, as shipped in `crates/core/missions/`.
pub fn canonical_file(name: MissionName) -> &'static str {
    match name {
        MissionName::Homing => include_str!("../../missions/homing.toml"),
        MissionName::Aac => include_str!("../../missions/aac.toml"),
        MissionName::Sac => include_str!("../../missions/sac.toml"),
        MissionName::Cfa => include_str!("../../missions/cfa.toml"),
    }
}

/// The canonical layout of a benchmark mission: 20 robots, 180 s.
pub fn build_mission(name: &str) -> Result<MissionSpec> {
    let name: MissionName = name.parse()?;
    let file = format!("{}.toml", name.as_str().to_lowercase());
    MissionSpec::from_toml(canonical_file(name), Path::new(&file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::Shape;

    #[test]
    fn homing_layout() {
        let m = build_mission("Homing").unwrap();
        assert_eq!(m.swarm_size, 20);
        assert_eq!(m.duration, 180.0);
        assert_eq!(m.arena.light_on(), None);
        assert_eq!(m.arena.regions.len(), 1);
        assert_eq!(m.arena.regions[0].color, RegionColor::Black);
        assert!(matches!(m.arena.regions[0].shape, Shape::Circle { radius, .. } if radius == 0.3));
        assert_eq!(m.landmarks(), vec![Landmark::Region { index: 0, color: RegionColor::Black }, Landmark::NearestPeer]);
    }

    #[test]
    fn cfa_layout() {
        let m = build_mission("cfa").unwrap();
        assert_eq!(m.arena.regions.len(), 3);
        assert!(m.arena.regions.iter().all(|r| r.color == RegionColor::Black && matches!(r.shape, Shape::Circle { radius, .. } if radius == 0.3)));
        assert_eq!(m.landmarks().len(), 4);
        assert_eq!(m.arena.light_on(), None);
    }

    #[test]
    fn sac_layout() {
        let m = build_mission("SAC").unwrap();
        let whites: Vec<_> = m.arena.regions.iter().filter(|r| r.color == RegionColor::White).collect();
        assert_eq!(whites.len(), 1);
        assert!(matches!(whites[0].shape, Shape::Rectangle { width, height, .. } if width == 0.25 && height == 0.15));
        assert_eq!(m.arena.regions.iter().filter(|r| r.color == RegionColor::Black && matches!(r.shape, Shape::Rectangle { .. })).count(), 3);
        assert_eq!(m.arena.walls.len(), 3);
        assert!(m.arena.light_on().is_some());
        // blacks first, then the white shelter, then peers
        let lm = m.landmarks();
        assert_eq!(lm.len(), 5);
        assert_eq!(lm[3], Landmark::Region { index: 3, color: RegionColor::White });
    }

    #[test]
    fn aac_layout() {
        let m = build_mission("AAC").unwrap();
        assert!(m.arena.light_on().is_some());
        assert_eq!(m.landmarks().len(), 3);
    }

    #[test]
    fn unknown_mission() {
        assert!(matches!(build_mission("Foraging"), Err(Error::UnknownMission(_))));
    }

    #[test]
    fn toml_round_trip() {
        for name in MissionName::ALL {
            let m = build_mission(name.as_str()).unwrap();
            let back = MissionSpec::from_toml(&m.to_toml(), Path::new("x")).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn physics_overrides() {
        let text = format!("{}\n[physics]\ndt = 0.05\n", canonical_file(MissionName::Homing));
        let m = MissionSpec::from_toml(&text, Path::new("x")).unwrap();
        assert_eq!(m.physics.dt, 0.05);
        assert_eq!(m.physics.max_wheel_speed, 0.12);
    }
}
