use std::fmt::Write as _;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domains::{reach, zone_directive_id, AgentEnv, DomainKind, DomainPlugin, MONSTER_DIRECTIVE};
use crate::gridworld::{generate_map_with, GridMap, MapParams, WorldState};
use crate::htn::TaskList;
use crate::planner::{AgentPolicy, OnlineAgent, PlanError, PlanStatus, Rhtn};

use super::episode_seed;

/// Safety cap; with a 38-point budget and no zero-cost planned moves an
/// O-RESCHU episode cannot take more than 39 ticks.
pub const ORESCHU_TICK_CAP: u64 = 200;
pub const MONSTER_TICK_CAP: u64 = 200;

const RESCHU_AGENTS: usize = 5;

/// Everything measured in one episode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeRecord {
    pub domain: DomainKind,
    pub policy: AgentPolicy,
    pub probability: u8,
    pub index: usize,
    pub seed: u64,
    pub goals_assigned: u32,
    pub goals_achieved: u32,
    pub discrepancies: u32,
    pub penalty_points: u32,
    pub gold_collected: u32,
    pub deaths: u32,
    pub fights: u32,
    pub ticks_used: u64,
    /// The tick cap ended the episode.
    pub capped: bool,
    /// Planner or simulator failure that ended the episode early.
    pub error: Option<String>,
}

impl EpisodeRecord {
    fn empty(domain: DomainKind, policy: AgentPolicy, probability: u8, index: usize, seed: u64) -> Self {
        Self {
            domain,
            policy,
            probability,
            index,
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

    fn absorb(&mut self, world: &WorldState) {
        self.discrepancies = world.total_discrepancies();
        self.penalty_points = world.penalties().iter().sum();
        self.gold_collected = world.gold_collected();
        self.deaths = world.deaths();
        self.fights = world.fights();
        self.ticks_used = world.tick_count();
    }
}

/// Five distinct destinations, one per agent in agent order.
pub fn simulated_user_oreschu<R: Rng + ?Sized>(map: &GridMap, rng: &mut R) -> Vec<Arc<str>> {
    let n = RESCHU_AGENTS.min(map.destinations.len());
    sample(rng, map.destinations.len(), n)
        .into_iter()
        .map(|i| map.destinations[i].name.clone())
        .collect()
}

/// A gold location drawn uniformly, excluding the previous assignment.
pub fn simulated_user_monster<R: Rng + ?Sized>(map: &GridMap, rng: &mut R, previous: Option<&str>) -> Option<Arc<str>> {
    let pool: Vec<&Arc<str>> = map
        .destinations
        .iter()
        .map(|d| &d.name)
        .filter(|n| Some(n.as_ref()) != previous)
        .collect();
    if pool.is_empty() {
        return None;
    }
    Some(pool[rng.gen_range(0..pool.len())].clone())
}

fn directive_ids(domain: DomainKind, zones: &[usize]) -> String {
    if zones.is_empty() {
        return "-".to_string();
    }
    match domain {
        DomainKind::Oreschu => zones.iter().map(|&z| zone_directive_id(z)).collect::<Vec<_>>().join(","),
        DomainKind::Monster => MONSTER_DIRECTIVE.to_string(),
    }
}

fn trace_line(
    trace: &mut Option<&mut String>,
    domain: DomainKind,
    tick: u64,
    world: &WorldState,
    agent: usize,
    action: &str,
    violated: &[usize],
) {
    if let Some(out) = trace.as_deref_mut() {
        let a = &world.agents[agent];
        let resource = match domain {
            DomainKind::Oreschu => a.budget,
            DomainKind::Monster => a.hp,
        };
        let _ = writeln!(out, "{tick} {agent} {action} {} {resource} {}", a.pos, directive_ids(domain, violated));
    }
}

/// Plan and act one step for one agent; returns the action label for the
/// trace and the zones violated by the move.
fn step_agent(
    planner: &Rhtn<'_, WorldState>,
    agent: &mut OnlineAgent,
    world: &mut WorldState,
    id: usize,
) -> Result<(String, Vec<usize>), PlanError> {
    let mut env = AgentEnv::new(world, id);
    match agent.advance(planner, &mut env)? {
        None => {
            let report = env.last_move.take().expect("an executed action reports its move");
            let label = agent.plan().steps().last().map(|s| s.action.to_string()).unwrap_or_default();
            Ok((label, report.violated))
        }
        Some(status) => Ok((status.name().to_string(), Vec::new())),
    }
}

/// Run the red-zone domain on `world` until every agent with a goal is
/// done. `goals` pairs agent ids with destination names.
pub fn run_oreschu_world(
    world: &mut WorldState,
    goals: &[(usize, Arc<str>)],
    policy: AgentPolicy,
    probability: u8,
    cap: u64,
    mut trace: Option<&mut String>,
    record: &mut EpisodeRecord,
) {
    let plugin = DomainPlugin::oreschu(&world.map);
    let planner = plugin.planner(policy);
    let mut agents: Vec<(usize, OnlineAgent)> = goals
        .iter()
        .map(|(id, dest)| {
            world.agents[*id].goal = Some(dest.clone());
            (*id, OnlineAgent::new(TaskList::single(reach(*id, dest))))
        })
        .collect();
    record.goals_assigned = goals.len() as u32;
    'ticks: while agents.iter().any(|(_, a)| !a.is_done()) {
        if world.tick_count() >= cap {
            record.capped = true;
            break;
        }
        let tick = world.tick_count();
        world.begin_tick(probability);
        for (id, agent) in agents.iter_mut() {
            if agent.is_done() {
                continue;
            }
            match step_agent(&planner, agent, world, *id) {
                Ok((label, violated)) => trace_line(&mut trace, DomainKind::Oreschu, tick, world, *id, &label, &violated),
                Err(e) => {
                    agent.finish(PlanStatus::Failed);
                    record.error = Some(format!("agent {id}: {e}"));
                    world.end_tick();
                    break 'ticks;
                }
            }
        }
        world.end_tick();
    }
    record.goals_achieved = goals
        .iter()
        .filter(|(id, dest)| world.map.destination(dest).is_some_and(|d| d.cell == world.agents[*id].pos))
        .count() as u32;
    record.absorb(world);
}

fn run_monster(
    world: &mut WorldState,
    goals: [Option<Arc<str>>; 2],
    policy: AgentPolicy,
    probability: u8,
    mut trace: Option<&mut String>,
    record: &mut EpisodeRecord,
) {
    let plugin = DomainPlugin::monster();
    let planner = plugin.planner(policy);
    let mut pending = goals.into_iter().flatten();
    let Some(first) = pending.next() else {
        record.absorb(world);
        return;
    };
    let mut current = first;
    let mut agent = OnlineAgent::new(TaskList::single(reach(0, &current)));
    world.agents[0].goal = Some(current.clone());
    record.goals_assigned = 1;
    let at_goal = |w: &WorldState, g: &str| w.agents[0].hp > 0 && w.map.destination(g).is_some_and(|d| d.cell == w.agents[0].pos);
    let mut finished = false;
    while !finished {
        if world.deaths() > 0 {
            break;
        }
        if world.tick_count() >= MONSTER_TICK_CAP {
            record.capped = true;
            break;
        }
        let tick = world.tick_count();
        world.begin_tick(probability);
        loop {
            match step_agent(&planner, &mut agent, world, 0) {
                Ok((label, violated)) => {
                    trace_line(&mut trace, DomainKind::Monster, tick, world, 0, &label, &violated);
                    let Some(status) = agent.status() else {
                        break;
                    };
                    if status == PlanStatus::Completed && at_goal(world, &current) {
                        record.goals_achieved += 1;
                    }
                    // A resolved goal costs no move, so its successor starts
                    // in the same tick.
                    match pending.next() {
                        Some(next) if world.agents[0].active => {
                            agent = OnlineAgent::new(TaskList::single(reach(0, &next)));
                            world.agents[0].goal = Some(next.clone());
                            current = next;
                            record.goals_assigned += 1;
                        }
                        _ => {
                            finished = true;
                            break;
                        }
                    }
                }
                Err(e) => {
                    record.error = Some(e.to_string());
                    finished = true;
                    break;
                }
            }
        }
        world.end_tick();
    }
    // Arrival on the final tick before the cap still counts.
    if !agent.is_done() && at_goal(world, &current) {
        record.goals_achieved += 1;
    }
    record.absorb(world);
}

/// One episode of `domain` for `policy` at respawn `probability`, fully
/// determined by its seed. Pass `trace` to collect the per-tick log.
pub fn run_episode(
    domain: DomainKind,
    policy: AgentPolicy,
    probability: u8,
    base_seed: u64,
    index: usize,
    mut trace: Option<&mut String>,
) -> EpisodeRecord {
    let seed = episode_seed(base_seed, domain, probability, index);
    let mut record = EpisodeRecord::empty(domain, policy, probability, index, seed);
    if let Some(out) = trace.as_deref_mut() {
        let _ = writeln!(out, "# {domain} {policy} p={probability} episode={index} seed={seed}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let map = match generate_map_with(&mut rng, &MapParams::default()) {
        Ok(map) => map,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    match domain {
        DomainKind::Oreschu => {
            let goals: Vec<(usize, Arc<str>)> = simulated_user_oreschu(&map, &mut rng).into_iter().enumerate().collect();
            let mut world = WorldState::new(map, RESCHU_AGENTS, domain.rules(), rng.gen());
            if let Some(out) = trace.as_deref_mut() {
                let list: Vec<String> = goals.iter().map(|(a, g)| format!("{a}:{g}")).collect();
                let _ = writeln!(out, "# goals {}", list.join(" "));
            }
            run_oreschu_world(&mut world, &goals, policy, probability, ORESCHU_TICK_CAP, trace, &mut record);
        }
        DomainKind::Monster => {
            // Both goals are drawn up front so every policy faces the same
            // pair; the second is only issued once the first resolves.
            let first = simulated_user_monster(&map, &mut rng, None);
            let second = simulated_user_monster(&map, &mut rng, first.as_deref());
            let mut world = WorldState::new(map, 1, domain.rules(), rng.gen());
            if let Some(out) = trace.as_deref_mut() {
                let name = |g: &Option<Arc<str>>| g.as_deref().unwrap_or("-").to_string();
                let _ = writeln!(out, "# goals {} {}", name(&first), name(&second));
            }
            run_monster(&mut world, [first, second], policy, probability, trace, &mut record);
        }
    }
    record
}
