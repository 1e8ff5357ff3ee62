//! Domain plugins and the environments that execute their actions.
//!
//! A plugin bundles everything the planner needs for one task domain: the
//! navigation actions and methods, the directive set, the repair hooks and
//! the simulator rules.

pub mod monster;
pub mod navigation;
pub mod oreschu;

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::directives::DirectiveSet;
use crate::gridworld::{GridMap, MoveReport, Rules, WorldState};
use crate::htn::{Domain, Task};
use crate::planner::{AgentPolicy, ExecutionEnv, RepairHooks, Rhtn};

pub use monster::{monster_directive, CowardRepair, MONSTER_DIRECTIVE};
pub use navigation::{
    alternatives, as_move, as_reach, closest_alternative, distance_to_goal, greedy_step, move_task, navigation_domain, reach,
};
pub use oreschu::{redzone_directives, zone_directive_id, ReschuRepair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DomainKind {
    Oreschu,
    Monster,
}

impl DomainKind {
    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Oreschu => "oreschu",
            DomainKind::Monster => "monster",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "oreschu" => Some(DomainKind::Oreschu),
            "monster" => Some(DomainKind::Monster),
            _ => None,
        }
    }

    pub fn rules(self) -> Rules {
        match self {
            DomainKind::Oreschu => Rules::reschu(),
            DomainKind::Monster => Rules::monster(),
        }
    }

    pub fn agent_count(self) -> usize {
        match self {
            DomainKind::Oreschu => 5,
            DomainKind::Monster => 1,
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Navigation actions and methods are identical for every map, so one
/// registry is shared.
pub fn shared_navigation() -> Arc<Domain<WorldState>> {
    static DOMAIN: OnceLock<Arc<Domain<WorldState>>> = OnceLock::new();
    DOMAIN.get_or_init(|| Arc::new(navigation_domain())).clone()
}

pub struct DomainPlugin {
    pub kind: DomainKind,
    pub domain: Arc<Domain<WorldState>>,
    pub directives: Arc<DirectiveSet<WorldState>>,
    pub hooks: Box<dyn RepairHooks<WorldState> + Send + Sync>,
}

impl DomainPlugin {
    pub fn new(kind: DomainKind, map: &GridMap) -> Self {
        match kind {
            DomainKind::Oreschu => Self::oreschu(map),
            DomainKind::Monster => Self::monster(),
        }
    }

    pub fn oreschu(map: &GridMap) -> Self {
        let domain = shared_navigation();
        let directives = Arc::new(redzone_directives(map));
        let hooks = Box::new(ReschuRepair::new(domain.clone(), directives.clone()));
        Self {
            kind: DomainKind::Oreschu,
            domain,
            directives,
            hooks,
        }
    }

    pub fn monster() -> Self {
        let domain = shared_navigation();
        let directives = Arc::new(monster_directive());
        let hooks = Box::new(CowardRepair::new(domain.clone(), directives.clone()));
        Self {
            kind: DomainKind::Monster,
            domain,
            directives,
            hooks,
        }
    }

    pub fn planner(&self, policy: AgentPolicy) -> Rhtn<'_, WorldState> {
        Rhtn::new(&self.domain, &self.directives, self.hooks.as_ref(), policy)
    }

    /// The agent stands on its destination.
    pub fn goal_reached(&self, s: &WorldState, agent: usize, destination: &str) -> bool {
        distance_to_goal(s, agent, destination) == Some(0)
    }
}

/// One agent's view of a shared world during a tick. Executing a move goes
/// straight to [`WorldState::step_move`]; the caller owns the tick phases.
pub struct AgentEnv<'w> {
    pub world: &'w mut WorldState,
    pub agent: usize,
    pub last_move: Option<MoveReport>,
}

impl<'w> AgentEnv<'w> {
    pub fn new(world: &'w mut WorldState, agent: usize) -> Self {
        Self {
            world,
            agent,
            last_move: None,
        }
    }
}

fn execute_move(world: &mut WorldState, agent: usize, action: &Task) -> Result<MoveReport, String> {
    let (dir, who) = as_move(action).ok_or_else(|| format!("`{action}` is not a move"))?;
    if who != agent {
        return Err(format!("`{action}` moves agent {who}, not agent {agent}"));
    }
    world.step_move(agent, dir).map_err(|e| e.to_string())
}

impl ExecutionEnv<WorldState> for AgentEnv<'_> {
    fn state(&self) -> &WorldState {
        self.world
    }

    fn execute(&mut self, action: &Task) -> Result<(), String> {
        self.last_move = Some(execute_move(self.world, self.agent, action)?);
        Ok(())
    }

    fn can_act(&self) -> bool {
        self.world.agent(self.agent).is_some_and(|a| a.active)
    }

    fn discrepancies(&self) -> u32 {
        self.world.discrepancies().get(self.agent).copied().unwrap_or(0)
    }

    fn snapshot_id(&self) -> u64 {
        self.world.tick_count()
    }
}

/// Single-agent environment that owns its world and runs one full tick per
/// executed action: the move, then the tick counter, then the next tick's
/// respawn, so the planner always sees the layout its move will meet.
pub struct TickingEnv {
    world: WorldState,
    agent: usize,
    respawn: u8,
    max_ticks: u64,
    pub moves: Vec<MoveReport>,
}

impl TickingEnv {
    pub fn new(mut world: WorldState, agent: usize, respawn: u8, max_ticks: u64) -> Self {
        world.begin_tick(respawn);
        Self {
            world,
            agent,
            respawn,
            max_ticks,
            moves: Vec::new(),
        }
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn into_world(self) -> WorldState {
        self.world
    }
}

impl ExecutionEnv<WorldState> for TickingEnv {
    fn state(&self) -> &WorldState {
        &self.world
    }

    fn execute(&mut self, action: &Task) -> Result<(), String> {
        let report = execute_move(&mut self.world, self.agent, action)?;
        self.moves.push(report);
        self.world.end_tick();
        self.world.begin_tick(self.respawn);
        Ok(())
    }

    fn can_act(&self) -> bool {
        self.world.tick_count() < self.max_ticks && self.world.agent(self.agent).is_some_and(|a| a.active)
    }

    fn discrepancies(&self) -> u32 {
        self.world.discrepancies().get(self.agent).copied().unwrap_or(0)
    }

    fn snapshot_id(&self) -> u64 {
        self.world.tick_count()
    }
}
