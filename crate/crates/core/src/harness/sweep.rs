use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::domains::DomainKind;
use crate::planner::AgentPolicy;

use super::episode::{run_episode, EpisodeRecord};
use super::{ConfigError, ExperimentConfig};

/// Per-measure means over the episodes of one (policy, probability) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMeans {
    pub goals: f64,
    pub discrepancies: f64,
    pub penalty_points: f64,
    pub gold: f64,
    pub deaths: f64,
    pub episodes: usize,
}

impl CellMeans {
    fn of(records: &[&EpisodeRecord]) -> Self {
        let n = records.len();
        // Integer sums first, one division each: the mean does not depend
        // on summation order.
        let mean = |f: fn(&EpisodeRecord) -> u64| records.iter().map(|r| f(r)).sum::<u64>() as f64 / n as f64;
        Self {
            goals: mean(|r| r.goals_achieved.into()),
            discrepancies: mean(|r| r.discrepancies.into()),
            penalty_points: mean(|r| r.penalty_points.into()),
            gold: mean(|r| r.gold_collected.into()),
            deaths: mean(|r| r.deaths.into()),
            episodes: n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub domain: DomainKind,
    pub cells: BTreeMap<(AgentPolicy, u8), CellMeans>,
    /// Every episode, ordered by policy, probability, then episode index.
    pub records: Vec<EpisodeRecord>,
    /// Concatenated per-tick traces in record order, when requested.
    pub trace: Option<String>,
}

impl SweepResult {
    pub fn cell(&self, policy: AgentPolicy, probability: u8) -> Option<&CellMeans> {
        self.cells.get(&(policy, probability))
    }

    pub fn records_for(&self, policy: AgentPolicy, probability: u8) -> impl Iterator<Item = &EpisodeRecord> {
        self.records
            .iter()
            .filter(move |r| r.policy == policy && r.probability == probability)
    }

    /// Episodes that ended on a planner or simulator error.
    pub fn failures(&self) -> impl Iterator<Item = &EpisodeRecord> {
        self.records.iter().filter(|r| r.error.is_some())
    }
}

/// Run every configured cell. Episodes run in parallel; results and traces
/// are assembled in a fixed order, so the output matches a serial run.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult, ConfigError> {
    config.validate()?;
    let mut policies = config.policies.clone();
    policies.sort_unstable();
    policies.dedup();
    let mut probabilities = config.probabilities.clone();
    probabilities.sort_unstable();
    probabilities.dedup();
    let jobs: Vec<(AgentPolicy, u8, usize)> = policies
        .iter()
        .flat_map(|&pol| {
            probabilities
                .iter()
                .flat_map(move |&p| (0..config.episodes_per_cell).map(move |i| (pol, p, i)))
        })
        .collect();
    let outputs: Vec<(EpisodeRecord, String)> = jobs
        .par_iter()
        .map(|&(policy, p, i)| {
            let mut trace = String::new();
            let sink = config.trace.then_some(&mut trace);
            let record = run_episode(config.domain, policy, p, config.base_seed, i, sink);
            (record, trace)
        })
        .collect();
    let mut records = Vec::with_capacity(outputs.len());
    let mut trace = config.trace.then(String::new);
    for (record, t) in outputs {
        if let Some(all) = trace.as_mut() {
            all.push_str(&t);
        }
        records.push(record);
    }
    let mut cells = BTreeMap::new();
    for &policy in &policies {
        for &p in &probabilities {
            let cell: Vec<&EpisodeRecord> = records.iter().filter(|r| r.policy == policy && r.probability == p).collect();
            cells.insert((policy, p), CellMeans::of(&cell));
        }
    }
    Ok(SweepResult {
        domain: config.domain,
        cells,
        records,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(domain: DomainKind) -> ExperimentConfig {
        ExperimentConfig {
            domain,
            policies: AgentPolicy::ALL.to_vec(),
            probabilities: vec![0, 25, 50],
            episodes_per_cell: 6,
            base_seed: 42,
            out_path: None,
            trace: true,
        }
    }

    #[test]
    fn every_cell_present_with_exact_counts() {
        let r = run_sweep(&small(DomainKind::Oreschu)).unwrap();
        assert_eq!(r.cells.len(), 9);
        assert_eq!(r.records.len(), 54);
        assert!(r.cells.values().all(|c| c.episodes == 6));
    }

    #[test]
    fn parallel_matches_serial() {
        let config = small(DomainKind::Monster);
        let parallel = run_sweep(&config).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let serial = pool.install(|| run_sweep(&config)).unwrap();
        assert_eq!(parallel, serial);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut c = small(DomainKind::Oreschu);
        c.probabilities = vec![3];
        assert_eq!(run_sweep(&c), Err(ConfigError::Probability(3)));
    }
}
