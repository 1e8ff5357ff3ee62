//! Grid navigation vocabulary shared by both domains.
//!
//! Primitive tasks are the five moves `up(a)`, `down(a)`, `left(a)`,
//! `right(a)` and `stay(a)`; the single compound task is
//! `reach(a, destination)`, decomposed by `navigate-distant` (two or more
//! cells away) and `navigate-close` (adjacent, or already there).

use crate::directives::DirectiveSet;
use crate::gridworld::{Cell, Dir, WorldState};
use crate::htn::{ActionDef, Arg, Domain, MethodDef, Task, TaskList, TaskName};

pub const REACH: &str = "reach";
pub const NAVIGATE_DISTANT: &str = "navigate-distant";
pub const NAVIGATE_CLOSE: &str = "navigate-close";

pub fn move_task(dir: Dir, agent: usize) -> Task {
    Task::new(TaskName::primitive(dir.name()), vec![Arg::Agent(agent)])
}

pub fn reach(agent: usize, destination: &str) -> Task {
    Task::new(TaskName::compound(REACH), vec![Arg::Agent(agent), Arg::symbol(destination)])
}

/// Direction and agent of a move task.
pub fn as_move(task: &Task) -> Option<(Dir, usize)> {
    if !task.is_primitive() {
        return None;
    }
    let dir = Dir::from_name(task.name())?;
    let agent = task.args.first()?.as_agent()?;
    Some((dir, agent))
}

/// Agent and destination of a `reach` task.
pub fn as_reach(task: &Task) -> Option<(usize, &str)> {
    if task.is_primitive() || task.name() != REACH {
        return None;
    }
    match task.args.as_slice() {
        [a, d] => Some((a.as_agent()?, d.as_symbol()?)),
        _ => None,
    }
}

/// Agent position and destination cell for a `reach` task in `s`.
fn reach_endpoints(s: &WorldState, task: &Task) -> Option<(usize, Cell, Cell)> {
    let (agent, dest) = as_reach(task)?;
    let from = s.agent(agent)?.pos;
    let to = s.map.destination(dest)?.cell;
    Some((agent, from, to))
}

/// Manhattan distance from the goal's agent to its destination.
pub fn distance_to_goal(s: &WorldState, agent: usize, destination: &str) -> Option<u32> {
    Some(s.agent(agent)?.pos.manhattan(s.map.destination(destination)?.cell))
}

/// The step `navigate-distant` takes: shrink the larger of the two
/// remaining offsets, preferring the vertical axis on ties. Within an axis
/// the direction is forced, so the choice is always consistent with the
/// up, down, left, right priority order.
pub fn greedy_step(from: Cell, to: Cell) -> Option<Dir> {
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    if dx == 0 && dy == 0 {
        return None;
    }
    let vertical = if dy < 0 { Dir::Up } else { Dir::Down };
    let horizontal = if dx < 0 { Dir::Left } else { Dir::Right };
    Some(if dy.abs() >= dx.abs() { vertical } else { horizontal })
}

fn move_applicable(dir: Dir) -> impl Fn(&WorldState, &[Arg]) -> bool + Send + Sync {
    move |s: &WorldState, args: &[Arg]| {
        let Some(agent) = args.first().and_then(Arg::as_agent) else {
            return false;
        };
        s.agent(agent).is_some_and(|a| s.map.in_bounds(a.pos.step(dir)))
    }
}

fn move_transition(dir: Dir) -> impl Fn(&WorldState, &[Arg]) -> WorldState + Send + Sync {
    move |s: &WorldState, args: &[Arg]| {
        let agent = args[0].as_agent().expect("checked by applicability");
        let to = s.agents[agent].pos.step(dir);
        s.with_agent_at(agent, to)
    }
}

/// Actions and methods of the navigation domain, methods in the order
/// they are tried.
pub fn navigation_domain() -> Domain<WorldState> {
    let mut d = Domain::new();
    for dir in Dir::PRIORITY {
        d.add_action(ActionDef::new(dir.name(), move_applicable(dir), move_transition(dir)))
            .expect("move names are distinct");
    }
    d.add_method(MethodDef::new(
        NAVIGATE_DISTANT,
        REACH,
        |s: &WorldState, t: &Task| reach_endpoints(s, t).is_some_and(|(_, from, to)| from.manhattan(to) >= 2),
        |s: &WorldState, t: &Task| {
            let (agent, from, to) = reach_endpoints(s, t).expect("checked by applicability");
            let dir = greedy_step(from, to).expect("distance is at least 2");
            TaskList::from(vec![move_task(dir, agent), t.clone()])
        },
    ))
    .expect("reach is compound");
    d.add_method(MethodDef::new(
        NAVIGATE_CLOSE,
        REACH,
        |s: &WorldState, t: &Task| reach_endpoints(s, t).is_some_and(|(_, from, to)| from.manhattan(to) <= 1),
        |s: &WorldState, t: &Task| {
            let (agent, from, to) = reach_endpoints(s, t).expect("checked by applicability");
            match greedy_step(from, to) {
                Some(dir) => TaskList::single(move_task(dir, agent)),
                None => TaskList::new(),
            }
        },
    ))
    .expect("reach is compound");
    d
}

/// Moves applicable in `s` whose one-step projection violates no
/// directive. Staying put is not an alternative.
pub fn alternatives(domain: &Domain<WorldState>, ds: &DirectiveSet<WorldState>, s: &WorldState, agent: usize) -> Vec<Task> {
    Dir::MOVES
        .into_iter()
        .map(|dir| move_task(dir, agent))
        .filter(|a| match domain.apply_action(s, a) {
            Ok(Some(next)) => ds.first_violated(&next).is_none(),
            _ => false,
        })
        .collect()
}

/// The alternative minimising Manhattan distance to `goal` after the move.
/// Ties go to the earlier direction in priority order.
pub fn closest_alternative(domain: &Domain<WorldState>, ds: &DirectiveSet<WorldState>, s: &WorldState, agent: usize, goal: Cell) -> Option<Task> {
    alternatives(domain, ds, s, agent).into_iter().min_by_key(|a| {
        let (dir, _) = as_move(a).expect("alternatives are moves");
        s.agents[agent].pos.step(dir).manhattan(goal)
    })
}

/// Find the `reach` task an agent is pursuing within `tasks`.
pub fn pursued_goal(tasks: &TaskList, agent: usize) -> Option<&str> {
    tasks.iter().filter_map(as_reach).find(|(a, _)| *a == agent).map(|(_, d)| d)
}
