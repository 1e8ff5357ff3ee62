//! Multi-UAV navigation with red zones.

use std::sync::Arc;

use crate::directives::{Directive, DirectiveSet};
use crate::gridworld::{penalty_for_move, Dir, GridMap, WorldState};
use crate::htn::{Domain, Task, TaskList};
use crate::planner::RepairHooks;

use super::navigation::{as_move, closest_alternative, move_task, pursued_goal};

pub fn zone_directive_id(zone: usize) -> String {
    format!("red{zone}")
}

/// One directive per zone of `map`: zone `i` is violated while any agent
/// stands inside it.
pub fn redzone_directives(map: &GridMap) -> DirectiveSet<WorldState> {
    let directives = map
        .zones
        .iter()
        .map(|z| {
            let id = z.id;
            Directive::new(&zone_directive_id(id), move |s: &WorldState| {
                s.map
                    .zone(id)
                    .is_some_and(|zone| s.agents.iter().any(|a| zone.contains(a.pos)))
            })
        })
        .collect();
    DirectiveSet::new(directives).expect("zone ids are unique in a valid map")
}

/// Task repair for red zones.
pub struct ReschuRepair {
    domain: Arc<Domain<WorldState>>,
    directives: Arc<DirectiveSet<WorldState>>,
}

impl ReschuRepair {
    pub fn new(domain: Arc<Domain<WorldState>>, directives: Arc<DirectiveSet<WorldState>>) -> Self {
        Self { domain, directives }
    }
}

/// Replace the violating head move with the closest safe alternative, or
/// abandon when the destination itself is covered or no alternative exists.
pub(super) fn sidestep(
    domain: &Domain<WorldState>,
    ds: &DirectiveSet<WorldState>,
    s: &WorldState,
    tasks: &TaskList,
    a0: &Task,
) -> TaskList {
    let Some((_, agent)) = as_move(a0) else {
        return TaskList::new();
    };
    let Some(goal) = pursued_goal(tasks, agent).and_then(|d| s.map.destination(d)) else {
        return TaskList::new();
    };
    if s.map.in_zone(goal.cell) {
        return TaskList::new();
    }
    match closest_alternative(domain, ds, s, agent, goal.cell) {
        Some(a) => tasks.with_head(a),
        None => TaskList::new(),
    }
}

impl RepairHooks<WorldState> for ReschuRepair {
    /// Step out of the zone: the clearing move with the lowest penalty,
    /// then the smallest distance to the goal. The list is returned
    /// unchanged once that step is already at its head.
    fn repair_state(&self, _: &Directive<WorldState>, s: &WorldState, tasks: &TaskList) -> TaskList {
        let Some(agent) = tasks.first().and_then(as_move).map(|(_, a)| a) else {
            return TaskList::new();
        };
        if s.zones_covering_agent(agent).is_empty() {
            // Another agent's violation; nothing this agent can repair.
            return tasks.clone();
        }
        let from = s.agents[agent].pos;
        let goal = pursued_goal(tasks, agent).and_then(|d| s.map.destination(d)).map(|d| d.cell);
        let exit = Dir::PRIORITY
            .into_iter()
            .filter_map(|dir| {
                let step = move_task(dir, agent);
                let next = self.domain.apply_action(s, &step).ok()??;
                self.directives.first_violated(&next).is_none().then(|| {
                    let to = from.step(dir);
                    let cost = penalty_for_move(from, to, &s.map.zones);
                    (cost, goal.map_or(0, |g| to.manhattan(g)), step)
                })
            })
            .min_by_key(|(cost, dist, _)| (*cost, *dist))
            .map(|(_, _, step)| step);
        match exit {
            Some(step) if tasks.first() == Some(&step) => tasks.clone(),
            Some(step) => tasks.prepend(step),
            None => TaskList::new(),
        }
    }

    fn repair_effect(&self, _: &Directive<WorldState>, s: &WorldState, tasks: &TaskList, a0: &Task) -> TaskList {
        sidestep(&self.domain, &self.directives, s, tasks, a0)
    }
}
