//! Online rebellious HTN planning.
//!
//! The planner decomposes its task list against the *current* state until
//! it reaches a primitive task whose action is applicable. Before that
//! action is executed the directive set is consulted twice: once on the
//! current state and once on the one-step projection of the action. A
//! violation hands the task list to the domain's repair hooks and planning
//! resumes on the repaired list without executing anything. Only
//! [`ExecutionEnv::execute`] advances the world.
//!
//! Method backtracking is limited to alternatives explored before an action
//! is executed: executed actions cannot be undone, so once the agent acts
//! the remaining task list is committed.

use std::fmt;

use thiserror::Error;

use crate::directives::{Directive, DirectiveSet};
use crate::htn::{concat, decompose, Domain, HtnError, Plan, Task, TaskList};

pub const DEFAULT_RECURSION_LIMIT: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error(transparent)]
    Htn(#[from] HtnError),
    #[error("planning exceeded {0} expansions without choosing an action")]
    RecursionLimitExceeded(usize),
    #[error("environment rejected `{action}`: {reason}")]
    Execution { action: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentPolicy {
    /// Ignores directives entirely.
    Compliant,
    /// Abandons the task on any discrepancy.
    Nonadaptive,
    /// Repairs the task list on any discrepancy.
    Adaptive,
}

impl AgentPolicy {
    pub const ALL: [AgentPolicy; 3] = [AgentPolicy::Compliant, AgentPolicy::Nonadaptive, AgentPolicy::Adaptive];

    pub fn name(self) -> &'static str {
        match self {
            AgentPolicy::Compliant => "compliant",
            AgentPolicy::Nonadaptive => "nonadaptive",
            AgentPolicy::Adaptive => "adaptive",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

impl fmt::Display for AgentPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The world the agent acts in.
pub trait ExecutionEnv<S> {
    fn state(&self) -> &S;

    /// Run `action` for real, advancing environment dynamics.
    fn execute(&mut self, action: &Task) -> Result<(), String>;

    /// False once the agent may no longer act (budget spent, dead, out of
    /// time).
    fn can_act(&self) -> bool {
        true
    }

    /// Discrepancies recorded by the environment so far.
    fn discrepancies(&self) -> u32 {
        0
    }

    /// Identifier of the current state, stored with each executed step.
    fn snapshot_id(&self) -> u64 {
        0
    }
}

/// Domain-specific task repair. Both hooks return the replacement task
/// list; an empty list means the task is abandoned.
pub trait RepairHooks<S> {
    /// `directive` is violated in `s` itself.
    fn repair_state(&self, directive: &Directive<S>, s: &S, tasks: &TaskList) -> TaskList;

    /// Executing `a0` in `s` would violate `directive`.
    fn repair_effect(&self, directive: &Directive<S>, s: &S, tasks: &TaskList, a0: &Task) -> TaskList;
}

/// Repair that always gives up; this is what a nonadaptive agent uses.
#[derive(Debug, Clone, Copy, Default)]
pub struct AbandonHooks;

impl<S> RepairHooks<S> for AbandonHooks {
    fn repair_state(&self, _: &Directive<S>, _: &S, _: &TaskList) -> TaskList {
        TaskList::new()
    }

    fn repair_effect(&self, _: &Directive<S>, _: &S, _: &TaskList, _: &Task) -> TaskList {
        TaskList::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlanStatus {
    Completed,
    Abandoned,
    Failed,
    BudgetExhausted,
}

impl PlanStatus {
    pub fn name(self) -> &'static str {
        match self {
            PlanStatus::Completed => "completed",
            PlanStatus::Abandoned => "abandoned",
            PlanStatus::Failed => "failed",
            PlanStatus::BudgetExhausted => "budget_exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome<S> {
    pub status: PlanStatus,
    pub executed: Plan,
    pub discrepancies_incurred: u32,
    pub final_state: S,
}

/// Result of planning up to the next action to execute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Next {
    Execute { action: Task, rest: TaskList },
    Completed,
    Abandoned,
    Failed,
}

/// Pending alternatives for a compound task.
struct ChoicePoint {
    task: Task,
    rest: TaskList,
    next_method: usize,
}

/// Planner configuration: the domain, the directive set, the repair
/// procedure and the agent's policy.
pub struct Rhtn<'a, S> {
    pub domain: &'a Domain<S>,
    pub directives: &'a DirectiveSet<S>,
    pub hooks: &'a dyn RepairHooks<S>,
    pub policy: AgentPolicy,
    pub recursion_limit: usize,
}

impl<'a, S: Clone> Rhtn<'a, S> {
    pub fn new(
        domain: &'a Domain<S>,
        directives: &'a DirectiveSet<S>,
        hooks: &'a dyn RepairHooks<S>,
        policy: AgentPolicy,
    ) -> Self {
        Self {
            domain,
            directives,
            hooks,
            policy,
            recursion_limit: DEFAULT_RECURSION_LIMIT,
        }
    }

    fn effective_hooks(&self) -> &dyn RepairHooks<S> {
        match self.policy {
            AgentPolicy::Nonadaptive => &AbandonHooks,
            _ => self.hooks,
        }
    }

    /// Consult the directives before executing `a0`. Returns `tasks`
    /// itself when nothing is violated, otherwise the repaired list.
    pub fn repair_tasks_if_needed(&self, tasks: &TaskList, s: &S, a0: &Task) -> Result<TaskList, PlanError> {
        if self.policy == AgentPolicy::Compliant {
            return Ok(tasks.clone());
        }
        let hooks = self.effective_hooks();
        if let Some(d) = self.directives.first_violated(s) {
            return Ok(hooks.repair_state(d, s, tasks));
        }
        if let Some(next) = self.domain.apply_action(s, a0)? {
            if let Some(d) = self.directives.first_violated(&next) {
                return Ok(hooks.repair_effect(d, s, tasks, a0));
            }
        }
        Ok(tasks.clone())
    }

    /// Plan against `s` until an action is ready to execute, the list is
    /// exhausted, the task is abandoned, or no decomposition works.
    pub fn seek(&self, s: &S, tasks: TaskList) -> Result<Next, PlanError> {
        let mut stack: Vec<ChoicePoint> = Vec::new();
        let mut current = Some(tasks);
        let mut expansions = 0usize;
        loop {
            expansions += 1;
            if expansions > self.recursion_limit {
                return Err(PlanError::RecursionLimitExceeded(self.recursion_limit));
            }
            if let Some(tasks) = current.take() {
                let Some(t0) = tasks.first().cloned() else {
                    return Ok(Next::Completed);
                };
                if t0.is_primitive() {
                    if self.domain.apply_action(s, &t0)?.is_some() {
                        let repaired = self.repair_tasks_if_needed(&tasks, s, &t0)?;
                        if repaired == tasks {
                            return Ok(Next::Execute {
                                action: t0,
                                rest: tasks.rest(),
                            });
                        }
                        if repaired.is_empty() {
                            return Ok(Next::Abandoned);
                        }
                        current = Some(repaired);
                        continue;
                    }
                } else {
                    stack.push(ChoicePoint {
                        rest: tasks.rest(),
                        task: t0,
                        next_method: 0,
                    });
                }
            }
            // Either the head failed or a compound task needs its next method.
            let Some(cp) = stack.last_mut() else {
                return Ok(Next::Failed);
            };
            let methods: Vec<_> = self.domain.methods_for(&cp.task.head).collect();
            let mut expanded = None;
            while cp.next_method < methods.len() {
                let m = methods[cp.next_method];
                cp.next_method += 1;
                if let Some(sub) = decompose(m, s, &cp.task)? {
                    expanded = Some(concat(&sub, &cp.rest));
                    break;
                }
            }
            match expanded {
                Some(list) => current = Some(list),
                None => {
                    stack.pop();
                }
            }
        }
    }

    /// Run `tasks` to a terminal status, executing as it goes, starting from
    /// the already executed `plan`.
    pub fn rseek_plan<E: ExecutionEnv<S>>(&self, env: &mut E, tasks: TaskList, plan: Plan) -> Result<PlanOutcome<S>, PlanError> {
        let mut agent = OnlineAgent::with_plan(tasks, plan);
        loop {
            if let Some(status) = agent.advance(self, env)? {
                return Ok(PlanOutcome {
                    status,
                    executed: agent.plan,
                    discrepancies_incurred: env.discrepancies(),
                    final_state: env.state().clone(),
                });
            }
        }
    }

    pub fn rhtn<E: ExecutionEnv<S>>(&self, env: &mut E, tasks: TaskList) -> Result<PlanOutcome<S>, PlanError> {
        self.rseek_plan(env, tasks, Plan::new())
    }
}

/// Resumable planner state for one agent: the remaining task list and the
/// actions executed so far. [`OnlineAgent::advance`] executes at most one
/// action, which lets several agents share one environment tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OnlineAgent {
    agenda: TaskList,
    plan: Plan,
    status: Option<PlanStatus>,
}

impl OnlineAgent {
    pub fn new(tasks: TaskList) -> Self {
        Self::with_plan(tasks, Plan::new())
    }

    pub fn with_plan(tasks: TaskList, plan: Plan) -> Self {
        Self {
            agenda: tasks,
            plan,
            status: None,
        }
    }

    pub fn agenda(&self) -> &TaskList {
        &self.agenda
    }

    pub fn plan(&self) -> &Plan {
        &self.plan
    }

    pub fn status(&self) -> Option<PlanStatus> {
        self.status
    }

    pub fn is_done(&self) -> bool {
        self.status.is_some()
    }

    /// Force a terminal status (e.g. the episode ran out of time).
    pub fn finish(&mut self, status: PlanStatus) {
        if self.status.is_none() {
            self.status = Some(status);
        }
    }

    /// Plan and execute at most one action. Returns the terminal status once
    /// the agent is done.
    pub fn advance<S: Clone, E: ExecutionEnv<S>>(&mut self, rhtn: &Rhtn<'_, S>, env: &mut E) -> Result<Option<PlanStatus>, PlanError> {
        if self.status.is_some() {
            return Ok(self.status);
        }
        let next = rhtn.seek(env.state(), self.agenda.clone())?;
        let status = match next {
            Next::Execute { action, rest } => {
                if !env.can_act() {
                    PlanStatus::BudgetExhausted
                } else {
                    let snapshot = env.snapshot_id();
                    env.execute(&action).map_err(|reason| PlanError::Execution {
                        action: action.to_string(),
                        reason,
                    })?;
                    self.plan.push(action, snapshot);
                    self.agenda = rest;
                    return Ok(None);
                }
            }
            Next::Completed => PlanStatus::Completed,
            Next::Abandoned => PlanStatus::Abandoned,
            Next::Failed => PlanStatus::Failed,
        };
        self.agenda = TaskList::new();
        self.status = Some(status);
        Ok(self.status)
    }
}
