use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use rhtn_core::domains::DomainKind;
use rhtn_core::gridworld::{Rules, Scenario, WorldState};
use rhtn_core::harness::{
    emit_csv, parse_policies, parse_probabilities, run_episode, run_oreschu_world, run_sweep, EpisodeRecord,
    ExperimentConfig, SweepResult, DEFAULT_EPISODES, ORESCHU_TICK_CAP,
};
use rhtn_core::planner::AgentPolicy;

#[derive(Parser)]
#[command(name = "rhtn", version, about = "Directive-aware HTN agents in grid-world experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run episodes for every policy and probability and write mean measures as CSV.
    Sweep(SweepArgs),
    /// Run one episode and print its per-tick trace.
    Episode(EpisodeArgs),
    /// Run a hand-written red-zone scenario file.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// oreschu, monster or all.
    #[arg(long, default_value = "all")]
    domain: String,
    /// Comma-separated policies, or all.
    #[arg(long, default_value = "all")]
    policy: String,
    /// Comma-separated respawn percentages from 0,5,...,50, or all.
    #[arg(long, default_value = "all")]
    probs: String,
    #[arg(long, default_value_t = DEFAULT_EPISODES)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; a summary table goes to stdout either way.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write every episode's trace to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct EpisodeArgs {
    #[arg(long, default_value = "oreschu")]
    domain: String,
    #[arg(long, default_value = "adaptive")]
    policy: String,
    /// Respawn percentage.
    #[arg(long, default_value = "0")]
    probs: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Episode index within the cell.
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// Write the trace here instead of stdout.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    scenario: PathBuf,
    #[arg(long, default_value = "adaptive")]
    policy: String,
    #[arg(long, default_value = "0")]
    probs: String,
    /// Seed for zone respawns.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    trace: Option<PathBuf>,
}

/// Bad input, reported with exit code 1.
#[derive(Debug)]
struct InvalidConfig(String);

impl std::fmt::Display for InvalidConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidConfig {}

fn invalid(e: impl std::fmt::Display) -> anyhow::Error {
    InvalidConfig(e.to_string()).into()
}

fn domains(text: &str) -> anyhow::Result<Vec<DomainKind>> {
    match text {
        "all" => Ok(vec![DomainKind::Oreschu, DomainKind::Monster]),
        other => DomainKind::from_name(other)
            .map(|d| vec![d])
            .ok_or_else(|| invalid(format!("unknown domain `{other}`"))),
    }
}

fn single<T: Copy>(items: Vec<T>, what: &str) -> anyhow::Result<T> {
    match items.as_slice() {
        [one] => Ok(*one),
        _ => Err(invalid(format!("exactly one {what} is required"))),
    }
}

fn print_table(result: &SweepResult) {
    println!(
        "{:<8} {:<12} {:>4} {:>8} {:>8} {:>9} {:>7} {:>7}",
        "domain", "policy", "p", "goals", "viol", "penalty", "gold", "deaths"
    );
    for (&(policy, p), m) in &result.cells {
        println!(
            "{:<8} {:<12} {:>4} {:>8.3} {:>8.3} {:>9.2} {:>7.2} {:>7.2}",
            result.domain.name(),
            policy.name(),
            p,
            m.goals,
            m.discrepancies,
            m.penalty_points,
            m.gold,
            m.deaths
        );
    }
}

fn print_record(r: &EpisodeRecord) {
    eprintln!(
        "goals {}/{} discrepancies {} penalty {} gold {} deaths {} fights {} ticks {}",
        r.goals_achieved, r.goals_assigned, r.discrepancies, r.penalty_points, r.gold_collected, r.deaths, r.fights, r.ticks_used
    );
}

fn emit_trace(trace: &str, path: Option<&PathBuf>) -> anyhow::Result<()> {
    match path {
        Some(path) => fs::write(path, trace).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{trace}");
            Ok(())
        }
    }
}

fn sweep(args: SweepArgs) -> anyhow::Result<()> {
    let policies = parse_policies(&args.policy).map_err(invalid)?;
    let probabilities = parse_probabilities(&args.probs).map_err(invalid)?;
    let mut results = Vec::new();
    for domain in domains(&args.domain)? {
        let config = ExperimentConfig {
            domain,
            policies: policies.clone(),
            probabilities: probabilities.clone(),
            episodes_per_cell: args.episodes,
            base_seed: args.seed,
            out_path: args.out.clone(),
            trace: args.trace.is_some(),
        };
        let result = run_sweep(&config).map_err(invalid)?;
        print_table(&result);
        for r in result.failures() {
            eprintln!("episode {} {} p={} failed: {}", r.index, r.policy, r.probability, r.error.as_deref().unwrap_or(""));
        }
        results.push(result);
    }
    if let Some(path) = &args.out {
        let refs: Vec<&SweepResult> = results.iter().collect();
        emit_csv(&refs, path)?;
    }
    if let Some(path) = &args.trace {
        let all: String = results.iter().filter_map(|r| r.trace.as_deref()).collect();
        emit_trace(&all, Some(path))?;
    }
    if results.iter().any(|r| r.failures().next().is_some()) {
        bail!("some episodes failed");
    }
    Ok(())
}

fn episode(args: EpisodeArgs) -> anyhow::Result<()> {
    let domain = single(domains(&args.domain)?, "domain")?;
    let policy = single(parse_policies(&args.policy).map_err(invalid)?, "policy")?;
    let p = single(parse_probabilities(&args.probs).map_err(invalid)?, "probability")?;
    let mut trace = String::new();
    let record = run_episode(domain, policy, p, args.seed, args.index, Some(&mut trace));
    emit_trace(&trace, args.trace.as_ref())?;
    print_record(&record);
    if let Some(e) = record.error {
        bail!(e);
    }
    Ok(())
}

fn replay(args: ReplayArgs) -> anyhow::Result<()> {
    let policy: AgentPolicy = single(parse_policies(&args.policy).map_err(invalid)?, "policy")?;
    let p = single(parse_probabilities(&args.probs).map_err(invalid)?, "probability")?;
    let scenario = Scenario::load(&args.scenario).map_err(invalid)?;
    let map = scenario.map();
    let goals: Vec<(usize, Arc<str>)> = scenario.goals.iter().map(|g| (g.agent, Arc::from(g.destination.as_str()))).collect();
    let rules = Rules::Reschu { budget: scenario.budget };
    let mut world = WorldState::new(map, scenario.agent_count(), rules, args.seed);
    let mut record = blank_record(policy, p, args.seed);
    let mut trace = String::new();
    run_oreschu_world(&mut world, &goals, policy, p, ORESCHU_TICK_CAP, Some(&mut trace), &mut record);
    emit_trace(&trace, args.trace.as_ref())?;
    print_record(&record);
    if let Some(e) = record.error {
        bail!(e);
    }
    Ok(())
}

fn blank_record(policy: AgentPolicy, probability: u8, seed: u64) -> EpisodeRecord {
    EpisodeRecord {
        domain: DomainKind::Oreschu,
        policy,
        probability,
        index: 0,
        seed,
        goals_assigned: 0,
        goals_achieved: 0,
        discrepancies: 0,
        penalty_points: 0,
        gold_collected: 0,
        deaths: 0,
        fights: 0,
        ticks_used: 0,
        capped: false,
        error: None,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Sweep(args) => sweep(args),
        Command::Episode(args) => episode(args),
        Command::Replay(args) => replay(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InvalidConfig>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
