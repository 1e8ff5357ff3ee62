//! Grid simulation substrate shared by both domains: maps, zone respawn,
//! movement with budgets, monster fights and the tick loop.

mod fight;
mod geometry;
mod map;
mod scenario;
mod world;

pub use fight::{resolve_fight, FightOutcome, Winner};
pub use geometry::{Cell, Dir};
pub use map::{generate_map, generate_map_with, Destination, GridMap, MapError, MapParams, Zone, DESTINATION_NAMES, ZONE_SIZE};
pub use scenario::{DestinationSpec, GoalSpec, Scenario, ScenarioError, ZoneSpec, MAX_AGENTS, MAX_DIMENSION};
pub use world::{
    penalty_for_move, AgentState, Atom, MoveError, MoveReport, Rules, WorldState, GOLD_PER_SITE, MONSTER_HP, NPC_HP,
    OPEN_STEP_PENALTY, RESCHU_BUDGET, ZONE_STEP_PENALTY,
};
