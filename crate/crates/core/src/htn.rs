//! Domain-agnostic HTN vocabulary: tasks, actions, methods and plans.
//!
//! A [`Domain`] is a registry of primitive [`ActionDef`]s and compound
//! [`MethodDef`]s over some state type `S`. States are treated as values:
//! every transition receives `&S` and returns a fresh successor.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HtnError {
    #[error("no action registered for primitive task `{0}`")]
    UnknownAction(String),
    #[error("method `{method}` decomposes `{expected}`, not `{found}`")]
    TaskMismatch {
        method: String,
        expected: String,
        found: String,
    },
    #[error("task name `{0}` registered as both primitive and compound")]
    KindConflict(String),
    #[error("action `{0}` registered twice")]
    DuplicateAction(String),
    #[error("task name must be nonempty")]
    EmptyName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskKind {
    Primitive,
    Compound,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaskName {
    name: Arc<str>,
    kind: TaskKind,
}

impl TaskName {
    pub fn primitive(name: &str) -> Self {
        Self {
            name: Arc::from(name),
            kind: TaskKind::Primitive,
        }
    }

    pub fn compound(name: &str) -> Self {
        Self {
            name: Arc::from(name),
            kind: TaskKind::Compound,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> TaskKind {
        self.kind
    }

    pub fn is_primitive(&self) -> bool {
        self.kind == TaskKind::Primitive
    }
}

/// A grounded task argument. There is no variable form, so every task is
/// fully grounded by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Arg {
    Agent(usize),
    Symbol(Arc<str>),
    Coord(i32, i32),
}

impl Arg {
    pub fn symbol(s: &str) -> Self {
        Arg::Symbol(Arc::from(s))
    }

    pub fn as_agent(&self) -> Option<usize> {
        match self {
            Arg::Agent(id) => Some(*id),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Arg::Symbol(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Agent(id) => write!(f, "{id}"),
            Arg::Symbol(s) => f.write_str(s),
            Arg::Coord(x, y) => write!(f, "({x},{y})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Task {
    pub head: TaskName,
    pub args: Vec<Arg>,
}

impl Task {
    pub fn new(head: TaskName, args: Vec<Arg>) -> Self {
        Self { head, args }
    }

    pub fn is_primitive(&self) -> bool {
        self.head.is_primitive()
    }

    pub fn name(&self) -> &str {
        self.head.name()
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.head.name())?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// Totally ordered work queue; index 0 is executed first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TaskList(Vec<Task>);

impl TaskList {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn single(task: Task) -> Self {
        Self(vec![task])
    }

    pub fn first(&self) -> Option<&Task> {
        self.0.first()
    }

    /// Everything after the head task.
    pub fn rest(&self) -> TaskList {
        Self(self.0.iter().skip(1).cloned().collect())
    }

    pub fn as_slice(&self) -> &[Task] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Task> {
        self.0.iter()
    }

    pub fn into_vec(self) -> Vec<Task> {
        self.0
    }

    /// Replace the head task, keeping the tail.
    pub fn with_head(&self, head: Task) -> TaskList {
        let mut v = self.0.clone();
        match v.first_mut() {
            Some(t) => *t = head,
            None => v.push(head),
        }
        Self(v)
    }

    pub fn prepend(&self, head: Task) -> TaskList {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(head);
        v.extend(self.0.iter().cloned());
        Self(v)
    }
}

impl From<Vec<Task>> for TaskList {
    fn from(v: Vec<Task>) -> Self {
        Self(v)
    }
}

impl FromIterator<Task> for TaskList {
    fn from_iter<I: IntoIterator<Item = Task>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a TaskList {
    type Item = &'a Task;
    type IntoIter = std::slice::Iter<'a, Task>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for TaskList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

/// Order-preserving concatenation of two task lists.
pub fn concat(front: &TaskList, back: &TaskList) -> TaskList {
    let mut v = Vec::with_capacity(front.len() + back.len());
    v.extend(front.0.iter().cloned());
    v.extend(back.0.iter().cloned());
    TaskList(v)
}

type Applicable<S> = Box<dyn Fn(&S, &[Arg]) -> bool + Send + Sync>;
type Transition<S> = Box<dyn Fn(&S, &[Arg]) -> S + Send + Sync>;
type MethodGuard<S> = Box<dyn Fn(&S, &Task) -> bool + Send + Sync>;
type Decomposition<S> = Box<dyn Fn(&S, &Task) -> TaskList + Send + Sync>;

pub struct ActionDef<S> {
    head: TaskName,
    applicable: Applicable<S>,
    transition: Transition<S>,
}

impl<S> ActionDef<S> {
    pub fn new(
        name: &str,
        applicable: impl Fn(&S, &[Arg]) -> bool + Send + Sync + 'static,
        transition: impl Fn(&S, &[Arg]) -> S + Send + Sync + 'static,
    ) -> Self {
        Self {
            head: TaskName::primitive(name),
            applicable: Box::new(applicable),
            transition: Box::new(transition),
        }
    }

    pub fn head(&self) -> &TaskName {
        &self.head
    }

    pub fn is_applicable(&self, state: &S, args: &[Arg]) -> bool {
        (self.applicable)(state, args)
    }

    /// Successor state, or `None` when the action is not applicable.
    pub fn apply(&self, state: &S, args: &[Arg]) -> Option<S> {
        if (self.applicable)(state, args) {
            Some((self.transition)(state, args))
        } else {
            None
        }
    }
}

pub struct MethodDef<S> {
    name: Arc<str>,
    task: TaskName,
    applicable: MethodGuard<S>,
    decomposition: Decomposition<S>,
}

impl<S> MethodDef<S> {
    pub fn new(
        name: &str,
        task: &str,
        applicable: impl Fn(&S, &Task) -> bool + Send + Sync + 'static,
        decomposition: impl Fn(&S, &Task) -> TaskList + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: Arc::from(name),
            task: TaskName::compound(task),
            applicable: Box::new(applicable),
            decomposition: Box::new(decomposition),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn task(&self) -> &TaskName {
        &self.task
    }
}

/// Decompose `task` with `method`. `Ok(None)` means the method is not
/// applicable in `state`.
pub fn decompose<S>(
    method: &MethodDef<S>,
    state: &S,
    task: &Task,
) -> Result<Option<TaskList>, HtnError> {
    if task.head != method.task {
        return Err(HtnError::TaskMismatch {
            method: method.name.to_string(),
            expected: method.task.name().to_string(),
            found: task.head.name().to_string(),
        });
    }
    if (method.applicable)(state, task) {
        Ok(Some((method.decomposition)(state, task)))
    } else {
        Ok(None)
    }
}

/// Registry of actions and methods (the planning model).
pub struct Domain<S> {
    actions: Vec<ActionDef<S>>,
    action_index: HashMap<Arc<str>, usize>,
    methods: Vec<MethodDef<S>>,
    kinds: HashMap<Arc<str>, TaskKind>,
}

impl<S> Default for Domain<S> {
    fn default() -> Self {
        Self {
            actions: Vec::new(),
            action_index: HashMap::new(),
            methods: Vec::new(),
            kinds: HashMap::new(),
        }
    }
}

impl<S> Domain<S> {
    pub fn new() -> Self {
        Self::default()
    }

    fn claim(&mut self, name: &Arc<str>, kind: TaskKind) -> Result<(), HtnError> {
        if name.is_empty() {
            return Err(HtnError::EmptyName);
        }
        match self.kinds.get(name) {
            Some(k) if *k != kind => Err(HtnError::KindConflict(name.to_string())),
            _ => {
                self.kinds.insert(name.clone(), kind);
                Ok(())
            }
        }
    }

    pub fn add_action(&mut self, action: ActionDef<S>) -> Result<(), HtnError> {
        let name = action.head.name.clone();
        if self.action_index.contains_key(&name) {
            return Err(HtnError::DuplicateAction(name.to_string()));
        }
        self.claim(&name, TaskKind::Primitive)?;
        self.action_index.insert(name, self.actions.len());
        self.actions.push(action);
        Ok(())
    }

    /// Methods are tried in registration order.
    pub fn add_method(&mut self, method: MethodDef<S>) -> Result<(), HtnError> {
        let name = method.task.name.clone();
        self.claim(&name, TaskKind::Compound)?;
        self.methods.push(method);
        Ok(())
    }

    pub fn action(&self, name: &str) -> Option<&ActionDef<S>> {
        self.action_index.get(name).map(|&i| &self.actions[i])
    }

    pub fn methods_for<'a>(&'a self, head: &'a TaskName) -> impl Iterator<Item = &'a MethodDef<S>> {
        self.methods.iter().filter(move |m| &m.task == head)
    }

    pub fn methods(&self) -> &[MethodDef<S>] {
        &self.methods
    }

    pub fn kind_of(&self, name: &str) -> Option<TaskKind> {
        self.kinds.get(name).copied()
    }

    pub fn is_registered(&self, task: &Task) -> bool {
        self.kind_of(task.name()) == Some(task.head.kind())
    }

    /// Apply a primitive task. `Ok(None)` is the inapplicable case; an
    /// unregistered head is a malformed domain and reported as an error.
    pub fn apply_action(&self, state: &S, action: &Task) -> Result<Option<S>, HtnError> {
        let def = self
            .action(action.name())
            .filter(|_| action.is_primitive())
            .ok_or_else(|| HtnError::UnknownAction(action.to_string()))?;
        Ok(def.apply(state, &action.args))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanStep {
    pub action: Task,
    /// Tick of the state the action was executed in.
    pub snapshot: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Plan {
    steps: Vec<PlanStep>,
}

impl Plan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, action: Task, snapshot: u64) {
        self.steps.push(PlanStep { action, snapshot });
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[PlanStep] {
        &self.steps
    }

    pub fn actions(&self) -> impl Iterator<Item = &Task> {
        self.steps.iter().map(|s| &s.action)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[derive(Clone, Debug, PartialEq)]
    struct Counter(i32);

    fn counter_domain() -> Domain<Counter> {
        let mut d = Domain::new();
        d.add_action(ActionDef::new("inc", |_: &Counter, _: &[Arg]| true, |s: &Counter, _: &[Arg]| Counter(s.0 + 1)))
            .unwrap();
        d.add_action(ActionDef::new("dec", |s: &Counter, _: &[Arg]| s.0 > 0, |s: &Counter, _: &[Arg]| Counter(s.0 - 1)))
            .unwrap();
        d.add_method(MethodDef::new(
            "noop",
            "settle",
            |s: &Counter, _: &Task| s.0 == 0,
            |_: &Counter, _: &Task| TaskList::new(),
        ))
        .unwrap();
        d
    }

    fn t(name: &str) -> Task {
        Task::new(TaskName::primitive(name), vec![])
    }

    #[test]
    fn inapplicable_is_not_an_error() {
        let d = counter_domain();
        assert_eq!(d.apply_action(&Counter(0), &t("dec")).unwrap(), None);
        assert_eq!(d.apply_action(&Counter(1), &t("dec")).unwrap(), Some(Counter(0)));
    }

    #[test]
    fn unknown_action_is_an_error() {
        let d = counter_domain();
        assert!(matches!(
            d.apply_action(&Counter(0), &t("jump")),
            Err(HtnError::UnknownAction(_))
        ));
    }

    #[test]
    fn kind_is_fixed_per_name() {
        let mut d = counter_domain();
        let err = d
            .add_method(MethodDef::new("bad", "inc", |_: &Counter, _: &Task| true, |_: &Counter, _: &Task| TaskList::new()))
            .unwrap_err();
        assert_eq!(err, HtnError::KindConflict("inc".into()));
        assert_eq!(
            d.add_action(ActionDef::new("", |_: &Counter, _: &[Arg]| true, |s: &Counter, _: &[Arg]| s.clone()))
                .unwrap_err(),
            HtnError::EmptyName
        );
    }

    #[test]
    fn decompose_checks_task_head() {
        let d = counter_domain();
        let m = &d.methods()[0];
        let settle = Task::new(TaskName::compound("settle"), vec![]);
        assert_eq!(decompose(m, &Counter(0), &settle).unwrap(), Some(TaskList::new()));
        assert_eq!(decompose(m, &Counter(3), &settle).unwrap(), None);
        let other = Task::new(TaskName::compound("other"), vec![]);
        assert!(matches!(decompose(m, &Counter(0), &other), Err(HtnError::TaskMismatch { .. })));
    }

    #[test]
    fn concat_examples() {
        let (a, b, c) = (t("a"), t("b"), t("c"));
        let front = TaskList::from(vec![a.clone(), b.clone()]);
        let back = TaskList::single(c.clone());
        assert_eq!(concat(&front, &back), TaskList::from(vec![a, b, c]));
        assert_eq!(concat(&TaskList::new(), &back), back);
        assert_eq!(concat(&back, &TaskList::new()), back);
    }

    #[test]
    fn task_display() {
        let reach = Task::new(TaskName::compound("reach"), vec![Arg::Agent(0), Arg::symbol("brown")]);
        assert_eq!(reach.to_string(), "reach(0,brown)");
        assert_eq!(TaskList::single(reach).to_string(), "(reach(0,brown))");
    }

    fn arb_list() -> impl Strategy<Value = TaskList> {
        prop::collection::vec((0usize..4, 0usize..6), 0..8).prop_map(|v| {
            v.into_iter()
                .map(|(n, a)| Task::new(TaskName::primitive(["a", "b", "c", "d"][n]), vec![Arg::Agent(a)]))
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn concat_is_associative(x in arb_list(), y in arb_list(), z in arb_list()) {
            prop_assert_eq!(concat(&concat(&x, &y), &z), concat(&x, &concat(&y, &z)));
        }

        #[test]
        fn concat_identity_and_length(x in arb_list(), y in arb_list()) {
            prop_assert_eq!(concat(&TaskList::new(), &x), x.clone());
            prop_assert_eq!(concat(&x, &TaskList::new()), x.clone());
            prop_assert_eq!(concat(&x, &y).len(), x.len() + y.len());
        }
    }
}
