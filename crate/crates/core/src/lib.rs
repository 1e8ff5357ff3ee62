//! Directive-aware online HTN planning.
//!
//! An agent decomposes its assigned tasks against the current state and,
//! before each action, checks a set of directives on both the current state
//! and the action's projected effect. Depending on its policy it ignores a
//! violation, abandons the task, or repairs the task list.
//!
//! - [`htn`]: tasks, actions, methods and the domain registry.
//! - [`directives`]: directive predicates and discrepancy checks.
//! - [`planner`]: the online planner and the three agent policies.
//! - [`gridworld`]: the tick-based grid simulator with zones, budgets and fights.
//! - [`domains`]: the red-zone navigation and monster gold-collection domains.
//! - [`harness`]: episodes, sweeps and CSV output.

pub mod directives;
pub mod domains;
pub mod gridworld;
pub mod harness;
pub mod htn;
pub mod planner;
