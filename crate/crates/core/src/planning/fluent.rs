use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A grounded proposition such as `(On Block_C Block_B)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Fluent {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Fluent {
    pub fn new(predicate: impl Into<String>, args: &[&str]) -> Self {
        Self {
            predicate: predicate.into(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }

    /// Canonical parenthesized label.
    pub fn label(&self) -> String {
        self.to_string()
    }

    /// Parses a canonical label back into a fluent.
    pub fn parse(label: &str) -> Result<Self> {
        let (predicate, args) = parse_sexpr(label)?;
        Ok(Self { predicate, args })
    }
}

impl fmt::Display for Fluent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn parse_sexpr(label: &str) -> Result<(String, Vec<String>)> {
    let inner = label
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| Error::InvalidDomain(format!("malformed label {label:?}")))?;
    let mut parts = inner.split_whitespace();
    let head = parts
        .next()
        .ok_or_else(|| Error::InvalidDomain(format!("empty label {label:?}")))?;
    Ok((head.to_string(), parts.map(str::to_string).collect()))
}

pub type FluentSet = BTreeSet<Fluent>;

/// A fully instantiated action. Only `label` is visible to the recognizer;
/// preconditions and effects drive the simulator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundedAction {
    pub label: String,
    pub preconds: FluentSet,
    pub add_effects: FluentSet,
    pub del_effects: FluentSet,
}

impl GroundedAction {
    pub fn new(
        label: impl Into<String>,
        preconds: FluentSet,
        add_effects: FluentSet,
        del_effects: FluentSet,
    ) -> Result<Self> {
        let label = label.into();
        if let Some(f) = add_effects.intersection(&del_effects).next() {
            return Err(Error::InvalidDomain(format!(
                "action {label} both adds and deletes {f}"
            )));
        }
        Ok(Self {
            label,
            preconds,
            add_effects,
            del_effects,
        })
    }

    /// An action known only by its label (e.g. read from a manifest).
    pub fn label_only(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            preconds: FluentSet::new(),
            add_effects: FluentSet::new(),
            del_effects: FluentSet::new(),
        }
    }
}

/// A planning state: the set of true fluents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct State(pub FluentSet);

impl State {
    pub fn contains(&self, f: &Fluent) -> bool {
        self.0.contains(f)
    }

    pub fn fluents(&self) -> &FluentSet {
        &self.0
    }
}

impl FromIterator<Fluent> for State {
    fn from_iter<I: IntoIterator<Item = Fluent>>(iter: I) -> Self {
        State(iter.into_iter().collect())
    }
}

/// STRIPS progression: `(s \ del) ∪ add`, provided `pre ⊆ s`.
pub fn apply_action(s: &State, a: &GroundedAction) -> Result<State> {
    if let Some(missing) = a.preconds.iter().find(|p| !s.contains(p)) {
        return Err(Error::InapplicableAction {
            action: a.label.clone(),
            missing: missing.label(),
        });
    }
    let mut next = s.0.clone();
    for f in &a.del_effects {
        next.remove(f);
    }
    next.extend(a.add_effects.iter().cloned());
    Ok(State(next))
}

/// `g ⊆ s`.
pub fn is_goal_satisfied(s: &State, g: &FluentSet) -> bool {
    g.iter().all(|f| s.contains(f))
}
