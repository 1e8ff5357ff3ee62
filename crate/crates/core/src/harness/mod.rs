//! Experiment orchestration: simulated users, episodes, sweeps and CSV
//! output.

mod csv_io;
mod episode;
mod sweep;

use std::path::PathBuf;

use thiserror::Error;

use crate::domains::DomainKind;
use crate::planner::AgentPolicy;

pub use csv_io::{emit_csv, read_csv, write_csv, CsvError, CsvRow, CSV_HEADER};
pub use episode::{
    run_episode, run_oreschu_world, simulated_user_monster, simulated_user_oreschu, EpisodeRecord, MONSTER_TICK_CAP,
    ORESCHU_TICK_CAP,
};
pub use sweep::{run_sweep, CellMeans, SweepResult};

/// Respawn probabilities (percent) used by the full experiment.
pub const PROBABILITIES: [u8; 11] = [0, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50];

pub const DEFAULT_EPISODES: usize = 100;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("probability {0}% is not one of 0, 5, ..., 50")]
    Probability(u8),
    #[error("episodes per cell must be at least 1")]
    NoEpisodes,
    #[error("no policies selected")]
    NoPolicies,
    #[error("no probabilities selected")]
    NoProbabilities,
    #[error("unknown {kind} `{value}`")]
    Unknown { kind: &'static str, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub domain: DomainKind,
    pub policies: Vec<AgentPolicy>,
    pub probabilities: Vec<u8>,
    pub episodes_per_cell: usize,
    pub base_seed: u64,
    pub out_path: Option<PathBuf>,
    /// Collect a per-tick trace of every episode.
    pub trace: bool,
}

impl ExperimentConfig {
    /// Every policy at every probability, 100 episodes per cell.
    pub fn full(domain: DomainKind, base_seed: u64) -> Self {
        Self {
            domain,
            policies: AgentPolicy::ALL.to_vec(),
            probabilities: PROBABILITIES.to_vec(),
            episodes_per_cell: DEFAULT_EPISODES,
            base_seed,
            out_path: None,
            trace: false,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.policies.is_empty() {
            return Err(ConfigError::NoPolicies);
        }
        if self.probabilities.is_empty() {
            return Err(ConfigError::NoProbabilities);
        }
        if let Some(&p) = self.probabilities.iter().find(|p| !PROBABILITIES.contains(p)) {
            return Err(ConfigError::Probability(p));
        }
        if self.episodes_per_cell == 0 {
            return Err(ConfigError::NoEpisodes);
        }
        Ok(())
    }
}

/// Parse a comma-separated probability list such as `0,10,50`, or `all`.
pub fn parse_probabilities(text: &str) -> Result<Vec<u8>, ConfigError> {
    let text = text.trim();
    if text == "all" {
        return Ok(PROBABILITIES.to_vec());
    }
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let p: u8 = part.parse().map_err(|_| ConfigError::Unknown {
            kind: "probability",
            value: part.to_string(),
        })?;
        if !PROBABILITIES.contains(&p) {
            return Err(ConfigError::Probability(p));
        }
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Parse a comma-separated policy list, or `all`.
pub fn parse_policies(text: &str) -> Result<Vec<AgentPolicy>, ConfigError> {
    let text = text.trim();
    if text == "all" {
        return Ok(AgentPolicy::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let p = AgentPolicy::from_name(part).ok_or_else(|| ConfigError::Unknown {
            kind: "policy",
            value: part.to_string(),
        })?;
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// One round of the splitmix64 finaliser.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one episode. The policy is not an input, so every policy in a
/// cell faces the same maps, goals and respawn draws.
pub fn episode_seed(base_seed: u64, domain: DomainKind, probability: u8, index: usize) -> u64 {
    let mut h = splitmix(base_seed);
    h = splitmix(h ^ domain as u64);
    h = splitmix(h ^ u64::from(probability));
    splitmix(h ^ index as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probability_lists() {
        assert_eq!(parse_probabilities("50, 0,10,10").unwrap(), vec![0, 10, 50]);
        assert_eq!(parse_probabilities("all").unwrap().len(), 11);
        assert_eq!(parse_probabilities("7"), Err(ConfigError::Probability(7)));
        assert!(parse_probabilities("ten").is_err());
        assert!(parse_probabilities("").is_err());
    }

    #[test]
    fn policy_lists() {
        assert_eq!(
            parse_policies("adaptive,compliant").unwrap(),
            vec![AgentPolicy::Compliant, AgentPolicy::Adaptive]
        );
        assert!(parse_policies("bold").is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::full(DomainKind::Oreschu, 1);
        assert_eq!(c.validate(), Ok(()));
        c.episodes_per_cell = 0;
        assert_eq!(c.validate(), Err(ConfigError::NoEpisodes));
        c.episodes_per_cell = 1;
        c.probabilities = vec![55];
        assert_eq!(c.validate(), Err(ConfigError::Probability(55)));
    }

    #[test]
    fn seeds_differ_across_cells() {
        let a = episode_seed(7, DomainKind::Oreschu, 0, 0);
        assert_eq!(a, episode_seed(7, DomainKind::Oreschu, 0, 0));
        assert_ne!(a, episode_seed(7, DomainKind::Oreschu, 0, 1));
        assert_ne!(a, episode_seed(7, DomainKind::Oreschu, 5, 0));
        assert_ne!(a, episode_seed(7, DomainKind::Monster, 0, 0));
        assert_ne!(a, episode_seed(8, DomainKind::Oreschu, 0, 0));
    }
}
