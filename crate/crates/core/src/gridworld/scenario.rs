//! Hand-written scenario files.
//!
//! A scenario is a TOML document describing one map plus optional goal
//! assignments:
//!
//! ```toml
//! width = 20
//! height = 20
//! budget = 38
//! start = [9, 12]
//!
//! [[zones]]
//! id = 0
//! anchor = [3, 4]
//!
//! [[destinations]]
//! name = "brown"
//! cell = [2, 1]
//!
//! [[goals]]
//! agent = 0
//! destination = "brown"
//! ```
//!
//! `budget` is optional and defaults to 38. Zone anchors are top-left
//! corners of 2x2 blocks. Parsing validates the map; serializing a parsed
//! scenario and parsing it again yields the same value.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::geometry::Cell;
use super::map::{Destination, GridMap, MapError, Zone};
use super::world::RESCHU_BUDGET;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("cannot serialize scenario: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("invalid map: {0}")]
    Map(#[from] MapError),
    #[error("goal for agent {agent} names unknown destination `{destination}`")]
    UnknownDestination { agent: usize, destination: String },
    #[error("agent id {0} exceeds the limit of {MAX_AGENTS} agents")]
    AgentId(usize),
    #[error("agent {0} has more than one goal")]
    DuplicateGoal(usize),
    #[error("grid dimensions must be between 2 and {max}, got {width}x{height}")]
    Dimensions { width: i32, height: i32, max: i32 },
}

pub const MAX_DIMENSION: i32 = 1024;
pub const MAX_AGENTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneSpec {
    pub id: usize,
    pub anchor: Cell,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DestinationSpec {
    pub name: String,
    pub cell: Cell,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalSpec {
    pub agent: usize,
    pub destination: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub width: i32,
    pub height: i32,
    #[serde(default = "default_budget")]
    pub budget: u32,
    pub start: Cell,
    #[serde(default)]
    pub zones: Vec<ZoneSpec>,
    #[serde(default)]
    pub destinations: Vec<DestinationSpec>,
    #[serde(default)]
    pub goals: Vec<GoalSpec>,
}

fn default_budget() -> u32 {
    RESCHU_BUDGET
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String, ScenarioError> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_map(map: &GridMap, budget: u32) -> Self {
        Self {
            width: map.width,
            height: map.height,
            budget,
            start: map.start,
            zones: map.zones.iter().map(|z| ZoneSpec { id: z.id, anchor: z.anchor }).collect(),
            destinations: map
                .destinations
                .iter()
                .map(|d| DestinationSpec {
                    name: d.name.to_string(),
                    cell: d.cell,
                })
                .collect(),
            goals: Vec::new(),
        }
    }

    pub fn map(&self) -> GridMap {
        GridMap {
            width: self.width,
            height: self.height,
            zones: self.zones.iter().map(|z| Zone::new(z.id, z.anchor)).collect(),
            destinations: self
                .destinations
                .iter()
                .map(|d| Destination {
                    name: Arc::from(d.name.as_str()),
                    cell: d.cell,
                })
                .collect(),
            start: self.start,
        }
    }

    /// Number of agents implied by the goal list (highest agent id + 1).
    pub fn agent_count(&self) -> usize {
        self.goals.iter().map(|g| g.agent + 1).max().unwrap_or(0)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if !(2..=MAX_DIMENSION).contains(&self.width) || !(2..=MAX_DIMENSION).contains(&self.height) {
            return Err(ScenarioError::Dimensions {
                width: self.width,
                height: self.height,
                max: MAX_DIMENSION,
            });
        }
        let map = self.map();
        map.validate()?;
        let mut seen = std::collections::HashSet::new();
        for g in &self.goals {
            if !seen.insert(g.agent) {
                return Err(ScenarioError::DuplicateGoal(g.agent));
            }
            if g.agent >= MAX_AGENTS {
                return Err(ScenarioError::AgentId(g.agent));
            }
            if map.destination(&g.destination).is_none() {
                return Err(ScenarioError::UnknownDestination {
                    agent: g.agent,
                    destination: g.destination.clone(),
                });
            }
        }
        Ok(())
    }
}
