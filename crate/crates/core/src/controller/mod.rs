//! Probabilistic finite-state machines built from behavioral and
//! conditional modules.
//!
//! Each state runs one behavior; each outgoing transition carries a
//! condition that fires stochastically. At every control step the current
//! state's transitions are tried in listed order and the first one that
//! fires switches the state, then the active behavior maps the sensor
//! reading to wheel speeds.

mod runtime;
mod search;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mission::MissionName;

pub use runtime::{wheels_toward, ControllerRuntime, AVOIDANCE_GAIN, OBSTACLE_THRESHOLD};
pub use search::{apply_edit, mutate, random_behavior, random_condition, random_controller, Edit};

pub const MAX_STATES: usize = 4;
pub const MAX_TRANSITIONS: usize = 4;

pub const TURN_STEPS_RANGE: (u32, u32) = (1, 100);
pub const GAIN_RANGE: (f64, f64) = (1.0, 5.0);
pub const PROBABILITY_RANGE: (f64, f64) = (0.0, 1.0);
pub const THRESHOLD_RANGE: (u32, u32) = (0, 10);
pub const STEEPNESS_RANGE: (f64, f64) = (0.0, 20.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Behavior {
    /// Straight motion; an obstacle ahead triggers a random turn of up to
    /// `turn_steps` control steps.
    Exploration { turn_steps: u32 },
    Stop,
    Phototaxis,
    AntiPhototaxis,
    Attraction { gain: f64 },
    Repulsion { gain: f64 },
}

impl Behavior {
    pub const KINDS: usize = 6;

    pub fn kind_index(&self) -> usize {
        match self {
            Behavior::Exploration { .. } => 0,
            Behavior::Stop => 1,
            Behavior::Phototaxis => 2,
            Behavior::AntiPhototaxis => 3,
            Behavior::Attraction { .. } => 4,
            Behavior::Repulsion { .. } => 5,
        }
    }

    pub fn parameter_count(&self) -> usize {
        match self {
            Behavior::Exploration { .. } | Behavior::Attraction { .. } | Behavior::Repulsion { .. } => 1,
            _ => 0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Behavior::Exploration { turn_steps } => (TURN_STEPS_RANGE.0..=TURN_STEPS_RANGE.1).contains(&turn_steps),
            Behavior::Attraction { gain } | Behavior::Repulsion { gain } => (GAIN_RANGE.0..=GAIN_RANGE.1).contains(&gain),
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidController(format!("behavior parameter out of range: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Condition {
    BlackFloor { probability: f64 },
    GrayFloor { probability: f64 },
    WhiteFloor { probability: f64 },
    /// Fires with probability `1 / (1 + exp(steepness · (threshold − n)))`
    /// for `n` perceived neighbors.
    NeighborCount { threshold: u32, steepness: f64 },
    InvertedNeighborCount { threshold: u32, steepness: f64 },
    FixedProbability { probability: f64 },
}

impl Condition {
    pub const KINDS: usize = 6;

    pub fn kind_index(&self) -> usize {
        match self {
            Condition::BlackFloor { .. } => 0,
            Condition::GrayFloor { .. } => 1,
            Condition::WhiteFloor { .. } => 2,
            Condition::NeighborCount { .. } => 3,
            Condition::InvertedNeighborCount { .. } => 4,
            Condition::FixedProbability { .. } => 5,
        }
    }

    pub fn parameter_count(&self) -> usize {
        match self {
            Condition::NeighborCount { .. } | Condition::InvertedNeighborCount { .. } => 2,
            _ => 1,
        }
    }

    fn validate(&self) -> Result<()> {
        let prob = |p: f64| (PROBABILITY_RANGE.0..=PROBABILITY_RANGE.1).contains(&p);
        let ok = match *self {
            Condition::BlackFloor { probability }
            | Condition::GrayFloor { probability }
            | Condition::WhiteFloor { probability }
            | Condition::FixedProbability { probability } => prob(probability),
            Condition::NeighborCount { threshold, steepness } | Condition::InvertedNeighborCount { threshold, steepness } => {
                (THRESHOLD_RANGE.0..=THRESHOLD_RANGE.1).contains(&threshold)
                    && (STEEPNESS_RANGE.0..=STEEPNESS_RANGE.1).contains(&steepness)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidController(format!("condition parameter out of range: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transition {
    pub condition: Condition,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct State {
    pub behavior: Behavior,
    #[serde(default)]
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PfsmController {
    pub states: Vec<State>,
    #[serde(default)]
    pub initial_state: usize,
}

impl PfsmController {
    pub fn single(behavior: Behavior) -> Self {
        PfsmController { states: vec![State { behavior, transitions: vec![] }], initial_state: 0 }
    }

    pub fn stop() -> Self {
        Self::single(Behavior::Stop)
    }

    pub fn transition_count(&self) -> usize {
        self.states.iter().map(|s| s.transitions.len()).sum()
    }

    pub fn parameter_count(&self) -> usize {
        self.states
            .iter()
            .map(|s| s.behavior.parameter_count() + s.transitions.iter().map(|t| t.condition.parameter_count()).sum::<usize>())
            .sum()
    }

    /// Checks every structural and parameter invariant. Transitions must
    /// lead to a different state.
    pub fn validate(&self) -> Result<()> {
        let n = self.states.len();
        if !(1..=MAX_STATES).contains(&n) {
            return Err(Error::InvalidController(format!("{n} states, expected 1 to {MAX_STATES}")));
        }
        if self.initial_state >= n {
            return Err(Error::InvalidController(format!("initial state {} out of range", self.initial_state)));
        }
        for (i, s) in self.states.iter().enumerate() {
            s.behavior.validate()?;
            if s.transitions.len() > MAX_TRANSITIONS {
                return Err(Error::InvalidController(format!("state {i} has {} transitions", s.transitions.len())));
            }
            for t in &s.transitions {
                t.condition.validate()?;
                if t.target >= n || t.target == i {
                    return Err(Error::InvalidController(format!("state {i} has transition to invalid target {}", t.target)));
                }
            }
        }
        Ok(())
    }
}

/// Where a controller came from; checked against the mission at evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignContext {
    pub mission: MissionName,
    pub swarm_size: usize,
}

/// On-disk controller file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<DesignContext>,
    pub controller: PfsmController,
}

impl ControllerDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("controller serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let doc: ControllerDocument = serde_json::from_str(text).map_err(|e| Error::parse(origin, e))?;
        doc.controller.validate()?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }
}
