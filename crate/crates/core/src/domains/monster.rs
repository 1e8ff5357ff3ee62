//! Single-NPC gold collection with stationary monsters.

use std::sync::Arc;

use crate::directives::{Directive, DirectiveSet};
use crate::gridworld::WorldState;
use crate::htn::{Domain, Task, TaskList};
use crate::planner::RepairHooks;

use super::oreschu::sidestep;

pub const MONSTER_DIRECTIVE: &str = "monster";

/// The NPC shares a cell with a monster.
pub fn monster_directive() -> DirectiveSet<WorldState> {
    DirectiveSet::new(vec![Directive::new(MONSTER_DIRECTIVE, |s: &WorldState| {
        s.agents.iter().any(|a| s.map.in_zone(a.pos))
    })])
    .expect("single directive")
}

/// Cowardly repair: walk around monsters, give up on gold a monster sits on.
pub struct CowardRepair {
    domain: Arc<Domain<WorldState>>,
    directives: Arc<DirectiveSet<WorldState>>,
}

impl CowardRepair {
    pub fn new(domain: Arc<Domain<WorldState>>, directives: Arc<DirectiveSet<WorldState>>) -> Self {
        Self { domain, directives }
    }
}

impl RepairHooks<WorldState> for CowardRepair {
    // Unreachable in practice: monsters never respawn onto the NPC and the
    // coward never steps onto one.
    fn repair_state(&self, _: &Directive<WorldState>, _: &WorldState, _: &TaskList) -> TaskList {
        TaskList::new()
    }

    fn repair_effect(&self, _: &Directive<WorldState>, s: &WorldState, tasks: &TaskList, a0: &Task) -> TaskList {
        sidestep(&self.domain, &self.directives, s, tasks, a0)
    }
}
