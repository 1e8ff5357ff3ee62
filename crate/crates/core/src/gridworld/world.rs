use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::fight::{resolve_fight, FightOutcome, Winner};
use super::geometry::{Cell, Dir};
use super::map::{GridMap, Zone, ZONE_SIZE};

pub const RESCHU_BUDGET: u32 = 38;
pub const OPEN_STEP_PENALTY: u32 = 1;
pub const ZONE_STEP_PENALTY: u32 = 20;
pub const NPC_HP: u32 = 10;
pub const MONSTER_HP: u32 = 10;
pub const GOLD_PER_SITE: u32 = 5;

const RESPAWN_TRIES: usize = 100;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoveError {
    #[error("no agent with id {0}")]
    UnknownAgent(usize),
    #[error("agent {0} is inactive")]
    InactiveAgent(usize),
    #[error("agent {agent} cannot move {dir} from {from}")]
    Inapplicable { agent: usize, dir: Dir, from: Cell },
}

/// Which simulator rules apply to a world.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rules {
    /// Movement budget charged per step; zones are red zones.
    Reschu { budget: u32 },
    /// Zones are monsters that fight on contact; destinations hold gold.
    Monster { npc_hp: u32, monster_hp: u32, gold_per_site: u32 },
}

impl Rules {
    pub fn reschu() -> Self {
        Rules::Reschu { budget: RESCHU_BUDGET }
    }

    pub fn monster() -> Self {
        Rules::Monster {
            npc_hp: NPC_HP,
            monster_hp: MONSTER_HP,
            gold_per_site: GOLD_PER_SITE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentState {
    pub id: usize,
    pub pos: Cell,
    /// Remaining movement points (unused under monster rules).
    pub budget: u32,
    /// Health (unused under red-zone rules).
    pub hp: u32,
    pub active: bool,
    pub goal: Option<Arc<str>>,
}

/// Outcome of one executed move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveReport {
    pub agent: usize,
    pub dir: Dir,
    pub from: Cell,
    pub to: Cell,
    /// Penalty points the step incurs.
    pub penalty: u32,
    /// Budget left after the step; it saturates at zero even when the
    /// penalty exceeds what was left.
    pub budget_after: u32,
    /// Zones covering the agent right after the move.
    pub violated: Vec<usize>,
    pub fight: Option<FightOutcome>,
    pub gold: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub map: GridMap,
    pub agents: Vec<AgentState>,
    rules: Rules,
    tick: u64,
    rng: ChaCha8Rng,
    gold: Vec<u32>,
    gold_collected: u32,
    discrepancies: Vec<u32>,
    penalties: Vec<u32>,
    deaths: u32,
    fights: u32,
}

impl WorldState {
    /// `agents` agents placed on the map's start cell.
    pub fn new(map: GridMap, agents: usize, rules: Rules, seed: u64) -> Self {
        let (budget, hp, gold) = match rules {
            Rules::Reschu { budget } => (budget, 0, 0),
            Rules::Monster { npc_hp, gold_per_site, .. } => (0, npc_hp, gold_per_site),
        };
        let agents = (0..agents)
            .map(|id| AgentState {
                id,
                pos: map.start,
                budget,
                hp,
                active: true,
                goal: None,
            })
            .collect::<Vec<_>>();
        let n = agents.len();
        Self {
            gold: vec![gold; map.destinations.len()],
            map,
            agents,
            rules,
            tick: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            gold_collected: 0,
            discrepancies: vec![0; n],
            penalties: vec![0; n],
            deaths: 0,
            fights: 0,
        }
    }

    pub fn rules(&self) -> Rules {
        self.rules
    }

    pub fn tick_count(&self) -> u64 {
        self.tick
    }

    pub fn rng(&self) -> &ChaCha8Rng {
        &self.rng
    }

    pub fn agent(&self, id: usize) -> Option<&AgentState> {
        self.agents.get(id)
    }

    pub fn discrepancies(&self) -> &[u32] {
        &self.discrepancies
    }

    pub fn total_discrepancies(&self) -> u32 {
        self.discrepancies.iter().sum()
    }

    /// Per-agent sum of incurred step penalties.
    pub fn penalties(&self) -> &[u32] {
        &self.penalties
    }

    pub fn gold_remaining(&self) -> &[u32] {
        &self.gold
    }

    pub fn gold_collected(&self) -> u32 {
        self.gold_collected
    }

    pub fn deaths(&self) -> u32 {
        self.deaths
    }

    pub fn fights(&self) -> u32 {
        self.fights
    }

    pub fn initial_budget(&self) -> u32 {
        match self.rules {
            Rules::Reschu { budget } => budget,
            Rules::Monster { .. } => 0,
        }
    }

    pub fn zone_covering(&self, c: Cell) -> Option<&Zone> {
        self.map.zone_at(c)
    }

    /// Zone ids currently covering `agent`.
    pub fn zones_covering_agent(&self, agent: usize) -> Vec<usize> {
        match self.agents.get(agent) {
            Some(a) => self.map.zones.iter().filter(|z| z.contains(a.pos)).map(|z| z.id).collect(),
            None => Vec::new(),
        }
    }

    /// Copy of this state with one agent relocated. Budgets, tick and RNG
    /// are untouched; this is the pure transition used for projection.
    pub fn with_agent_at(&self, agent: usize, to: Cell) -> WorldState {
        let mut next = self.clone();
        next.agents[agent].pos = to;
        next
    }

    fn agent_cells(&self) -> Vec<Cell> {
        self.agents.iter().map(|a| a.pos).collect()
    }

    /// Independently per zone, with probability `p`% the zone vanishes and
    /// reappears at a uniformly drawn anchor that covers no agent and keeps
    /// the gap to every other zone. After `RESPAWN_TRIES` rejected draws the
    /// zone stays where it was. Returns the number of relocation events.
    pub fn respawn_zones(&mut self, p: u8) -> usize {
        assert!(p <= 100, "respawn probability is a percentage");
        if p == 0 {
            return 0;
        }
        let prob = f64::from(p) / 100.0;
        let occupied = self.agent_cells();
        let (w, h) = (self.map.width, self.map.height);
        let mut events = 0;
        for i in 0..self.map.zones.len() {
            if !self.rng.gen_bool(prob) {
                continue;
            }
            events += 1;
            let id = self.map.zones[i].id;
            for _ in 0..RESPAWN_TRIES {
                let cand = Zone::new(
                    id,
                    Cell::new(self.rng.gen_range(0..=w - ZONE_SIZE), self.rng.gen_range(0..=h - ZONE_SIZE)),
                );
                let clear_of_agents = !occupied.iter().any(|c| cand.contains(*c));
                let separated = self
                    .map
                    .zones
                    .iter()
                    .enumerate()
                    .all(|(j, o)| j == i || cand.separated_from(o));
                if clear_of_agents && separated {
                    self.map.zones[i] = cand;
                    break;
                }
            }
        }
        events
    }

    /// Move one agent one cell (or stay) in the environment, charging
    /// budgets, counting violations, resolving fights and collecting gold.
    pub fn step_move(&mut self, agent: usize, dir: Dir) -> Result<MoveReport, MoveError> {
        let a = self.agents.get(agent).ok_or(MoveError::UnknownAgent(agent))?;
        if !a.active {
            return Err(MoveError::InactiveAgent(agent));
        }
        let from = a.pos;
        let to = from.step(dir);
        if !self.map.in_bounds(to) {
            return Err(MoveError::Inapplicable { agent, dir, from });
        }
        let mut report = MoveReport {
            agent,
            dir,
            from,
            to,
            penalty: 0,
            budget_after: self.agents[agent].budget,
            violated: Vec::new(),
            fight: None,
            gold: 0,
        };
        match self.rules {
            Rules::Reschu { .. } => {
                let cost = penalty_for_move(from, to, &self.map.zones);
                let a = &mut self.agents[agent];
                a.budget = a.budget.saturating_sub(cost);
                a.pos = to;
                if a.budget == 0 {
                    a.active = false;
                }
                self.penalties[agent] += cost;
                report.penalty = cost;
                report.budget_after = a.budget;
                report.violated = self.zones_covering_agent(agent);
                if !report.violated.is_empty() {
                    self.discrepancies[agent] += 1;
                }
            }
            Rules::Monster { monster_hp, .. } => {
                self.agents[agent].pos = to;
                report.violated = self.zones_covering_agent(agent);
                if let Some(&monster) = report.violated.first() {
                    self.discrepancies[agent] += 1;
                    self.fights += 1;
                    let outcome = resolve_fight(self.agents[agent].hp, monster_hp, &mut self.rng);
                    self.agents[agent].hp = outcome.npc_hp;
                    match outcome.winner {
                        Winner::Npc => self.map.zones.retain(|z| z.id != monster),
                        Winner::Monster => {
                            self.agents[agent].active = false;
                            self.deaths += 1;
                        }
                    }
                    report.fight = Some(outcome);
                }
                if self.agents[agent].hp > 0 {
                    if let Some(i) = self.map.destinations.iter().position(|d| d.cell == to) {
                        report.gold = std::mem::take(&mut self.gold[i]);
                        self.gold_collected += report.gold;
                    }
                }
            }
        }
        Ok(report)
    }

    /// Phase 1 of a tick.
    pub fn begin_tick(&mut self, p: u8) -> usize {
        self.respawn_zones(p)
    }

    /// Phase 3 of a tick.
    pub fn end_tick(&mut self) {
        self.tick += 1;
    }

    /// One full simulation step: respawn, then the given moves in ascending
    /// agent order, then advance the tick counter.
    pub fn tick(&mut self, p: u8, moves: &[(usize, Dir)]) -> Result<Vec<MoveReport>, MoveError> {
        let mut ordered = moves.to_vec();
        ordered.sort_by_key(|(id, _)| *id);
        self.begin_tick(p);
        let mut reports = Vec::with_capacity(ordered.len());
        for (id, dir) in ordered {
            if self.agents.get(id).is_some_and(|a| a.active) {
                reports.push(self.step_move(id, dir)?);
            }
        }
        self.end_tick();
        Ok(reports)
    }

    /// Grounded-atom view of the state, e.g. `at(5,(10,11))` and
    /// `red(7,(10,11),2)`.
    pub fn predicates(&self) -> Vec<Atom> {
        let mut atoms = Vec::new();
        for a in &self.agents {
            atoms.push(Atom::At { agent: a.id, cell: a.pos });
        }
        for z in &self.map.zones {
            atoms.push(Atom::Red {
                zone: z.id,
                anchor: z.anchor,
                size: ZONE_SIZE,
            });
        }
        for (i, d) in self.map.destinations.iter().enumerate() {
            atoms.push(Atom::Destination {
                name: d.name.clone(),
                cell: d.cell,
            });
            if let Rules::Monster { .. } = self.rules {
                atoms.push(Atom::Gold {
                    name: d.name.clone(),
                    amount: self.gold[i],
                });
            }
        }
        atoms
    }
}

/// Points charged for a step: 20 if either end lies in a zone, 1 for an
/// ordinary step, 0 for staying put.
pub fn penalty_for_move(from: Cell, to: Cell, zones: &[Zone]) -> u32 {
    if from == to {
        0
    } else if zones.iter().any(|z| z.contains(from) || z.contains(to)) {
        ZONE_STEP_PENALTY
    } else {
        OPEN_STEP_PENALTY
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    At { agent: usize, cell: Cell },
    Red { zone: usize, anchor: Cell, size: i32 },
    Destination { name: Arc<str>, cell: Cell },
    Gold { name: Arc<str>, amount: u32 },
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::At { agent, cell } => write!(f, "at({agent},{cell})"),
            Atom::Red { zone, anchor, size } => write!(f, "red({zone},{anchor},{size})"),
            Atom::Destination { name, cell } => write!(f, "dest({name},{cell})"),
            Atom::Gold { name, amount } => write!(f, "gold({name},{amount})"),
        }
    }
}
