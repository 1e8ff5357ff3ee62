//! Directive sets and discrepancy detection.
//!
//! A directive is a pure boolean predicate over states; `true` marks a
//! state the agent must not be in. Detection comes in two flavours:
//! immediate (the current state) and projected (the state reached by
//! applying upcoming actions without touching the environment).

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::htn::{Domain, HtnError, Task};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DirectiveError {
    #[error("duplicate directive id `{0}`")]
    DuplicateId(String),
    #[error("projected check requested while `{0}` is already violated")]
    PreconditionViolated(String),
    #[error("action `{0}` is not applicable")]
    Inapplicable(String),
    #[error(transparent)]
    Htn(#[from] HtnError),
}

type Predicate<S> = Arc<dyn Fn(&S) -> bool + Send + Sync>;

#[derive(Clone)]
pub struct Directive<S> {
    id: Arc<str>,
    predicate: Predicate<S>,
}

impl<S> Directive<S> {
    pub fn new(id: &str, predicate: impl Fn(&S) -> bool + Send + Sync + 'static) -> Self {
        Self {
            id: Arc::from(id),
            predicate: Arc::new(predicate),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// True when `state` violates this directive.
    pub fn violated(&self, state: &S) -> bool {
        (self.predicate)(state)
    }
}

impl<S> fmt::Debug for Directive<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Directive").field(&self.id).finish()
    }
}

/// Ordered directive set. When several directives are violated at once the
/// first one in insertion order is reported.
#[derive(Clone, Debug)]
pub struct DirectiveSet<S> {
    directives: Vec<Directive<S>>,
}

impl<S> Default for DirectiveSet<S> {
    fn default() -> Self {
        Self { directives: Vec::new() }
    }
}

impl<S> DirectiveSet<S> {
    pub fn new(directives: Vec<Directive<S>>) -> Result<Self, DirectiveError> {
        let mut seen = HashSet::new();
        for d in &directives {
            if !seen.insert(d.id.clone()) {
                return Err(DirectiveError::DuplicateId(d.id.to_string()));
            }
        }
        Ok(Self { directives })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.directives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directives.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Directive<S>> {
        self.directives.iter()
    }

    pub fn get(&self, id: &str) -> Option<&Directive<S>> {
        self.directives.iter().find(|d| d.id() == id)
    }

    pub fn first_violated(&self, state: &S) -> Option<&Directive<S>> {
        self.directives.iter().find(|d| d.violated(state))
    }

    pub fn violated_ids(&self, state: &S) -> Vec<&str> {
        self.directives
            .iter()
            .filter(|d| d.violated(state))
            .map(|d| d.id())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscrepancyKind {
    Immediate,
    Projected,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyReport<S> {
    pub kind: DiscrepancyKind,
    pub directive_id: Option<String>,
    pub state: S,
}

impl<S> DiscrepancyReport<S> {
    fn none(state: S) -> Self {
        Self {
            kind: DiscrepancyKind::None,
            directive_id: None,
            state,
        }
    }

    pub fn is_none(&self) -> bool {
        self.kind == DiscrepancyKind::None
    }
}

pub fn check_immediate<S: Clone>(ds: &DirectiveSet<S>, s: &S) -> DiscrepancyReport<S> {
    match ds.first_violated(s) {
        Some(d) => DiscrepancyReport {
            kind: DiscrepancyKind::Immediate,
            directive_id: Some(d.id().to_string()),
            state: s.clone(),
        },
        None => DiscrepancyReport::none(s.clone()),
    }
}

/// State reached by applying `actions` in order, using only action
/// transitions. `Ok(None)` if some step is inapplicable. An empty sequence
/// projects to the input state.
pub fn project<S: Clone>(domain: &Domain<S>, s: &S, actions: &[Task]) -> Result<Option<S>, HtnError> {
    let mut cur = s.clone();
    for a in actions {
        match domain.apply_action(&cur, a)? {
            Some(next) => cur = next,
            None => return Ok(None),
        }
    }
    Ok(Some(cur))
}

/// One-step lookahead: does executing `a0` in `s` lead to a violation?
///
/// Only meaningful when `s` itself is clean; a violated `s` is a caller
/// ordering bug and reported as [`DirectiveError::PreconditionViolated`].
pub fn check_projected<S: Clone>(
    domain: &Domain<S>,
    ds: &DirectiveSet<S>,
    s: &S,
    a0: &Task,
) -> Result<DiscrepancyReport<S>, DirectiveError> {
    if let Some(d) = ds.first_violated(s) {
        return Err(DirectiveError::PreconditionViolated(d.id().to_string()));
    }
    let next = domain
        .apply_action(s, a0)?
        .ok_or_else(|| DirectiveError::Inapplicable(a0.to_string()))?;
    Ok(match ds.first_violated(&next) {
        Some(d) => DiscrepancyReport {
            kind: DiscrepancyKind::Projected,
            directive_id: Some(d.id().to_string()),
            state: next,
        },
        None => DiscrepancyReport::none(next),
    })
}
