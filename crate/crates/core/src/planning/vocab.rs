//! Indexed fluent and action vocabularies, and their text manifest.
//!
//! Manifest layout (UTF-8, `\n` line endings):
//!
//! ```text
//! grnet-vocabulary 1
//! domain <domain id>
//! fluents <count>
//! <one fluent label per line, index order>
//! actions <count>
//! <one action label per line, index order>
//! ```
//!
//! The vocabulary checksum is the hex SHA-256 of the manifest text.

use std::collections::HashMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::fluent::{Fluent, GroundedAction};
use crate::error::{Error, Result};

const MANIFEST_HEADER: &str = "grnet-vocabulary 1";

#[derive(Clone, Debug)]
pub struct DomainVocabulary {
    domain_id: String,
    fluents: Vec<Fluent>,
    actions: Vec<GroundedAction>,
    fluent_index: HashMap<String, usize>,
    action_index: HashMap<String, usize>,
}

impl PartialEq for DomainVocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.domain_id == other.domain_id
            && self.fluents == other.fluents
            && self.actions == other.actions
    }
}

impl DomainVocabulary {
    /// Fluents are sorted lexically by label; actions keep the given order.
    pub fn new(
        domain_id: impl Into<String>,
        mut fluents: Vec<Fluent>,
        actions: Vec<GroundedAction>,
    ) -> Result<Self> {
        fluents.sort_by_cached_key(Fluent::label);
        let mut fluent_index = HashMap::with_capacity(fluents.len());
        for (i, f) in fluents.iter().enumerate() {
            if fluent_index.insert(f.label(), i + 1).is_some() {
                return Err(Error::InvalidDomain(format!("duplicate fluent {f}")));
            }
        }
        let mut action_index = HashMap::with_capacity(actions.len());
        for (i, a) in actions.iter().enumerate() {
            if action_index.insert(a.label.clone(), i + 1).is_some() {
                return Err(Error::InvalidDomain(format!("duplicate action {}", a.label)));
            }
        }
        Ok(Self {
            domain_id: domain_id.into(),
            fluents,
            actions,
            fluent_index,
            action_index,
        })
    }

    pub fn domain_id(&self) -> &str {
        &self.domain_id
    }

    pub fn fluents(&self) -> &[Fluent] {
        &self.fluents
    }

    pub fn actions(&self) -> &[GroundedAction] {
        &self.actions
    }

    pub fn num_fluents(&self) -> usize {
        self.fluents.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    /// 1-based index of a fluent label.
    pub fn fluent_index(&self, label: &str) -> Option<usize> {
        self.fluent_index.get(label).copied()
    }

    /// 0-based output slot of a fluent (its index minus one).
    pub fn fluent_slot(&self, f: &Fluent) -> Result<usize> {
        self.fluent_index(&f.label())
            .map(|i| i - 1)
            .ok_or_else(|| Error::OutOfVocabulary(format!("fluent {f}")))
    }

    /// 1-based index of an action label.
    pub fn action_index(&self, label: &str) -> Option<usize> {
        self.action_index.get(label).copied()
    }

    /// Action at a 1-based index.
    pub fn action(&self, index: usize) -> Option<&GroundedAction> {
        index.checked_sub(1).and_then(|i| self.actions.get(i))
    }

    pub fn manifest(&self) -> String {
        let mut out = String::new();
        out.push_str(MANIFEST_HEADER);
        out.push('\n');
        out.push_str(&format!("domain {}\n", self.domain_id));
        out.push_str(&format!("fluents {}\n", self.fluents.len()));
        for f in &self.fluents {
            out.push_str(&f.label());
            out.push('\n');
        }
        out.push_str(&format!("actions {}\n", self.actions.len()));
        for a in &self.actions {
            out.push_str(&a.label);
            out.push('\n');
        }
        out
    }

    pub fn checksum(&self) -> String {
        hex::encode(Sha256::digest(self.manifest().as_bytes()))
    }

    /// Rebuilds a label-only vocabulary from manifest text.
    pub fn from_manifest(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: String| Error::Parse {
            path: "<manifest>".into(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| bad(0, format!("manifest ends before {what}")))
        };
        let (n, header) = next("header")?;
        if header != MANIFEST_HEADER {
            return Err(bad(n, format!("unknown manifest header {header:?}")));
        }
        let (n, domain) = next("domain")?;
        let domain_id = domain
            .strip_prefix("domain ")
            .ok_or_else(|| bad(n, "expected `domain <id>`".into()))?
            .to_string();
        let count = |n: usize, line: &str, key: &str| -> Result<usize> {
            line.strip_prefix(key)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| bad(n, format!("expected `{key}<count>`")))
        };
        let (n, line) = next("fluent count")?;
        let nf = count(n, line, "fluents ")?;
        let mut fluents = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (n, line) = next("fluent label")?;
            fluents.push(Fluent::parse(line).map_err(|e| bad(n, e.to_string()))?);
        }
        let (n, line) = next("action count")?;
        let na = count(n, line, "actions ")?;
        let mut actions = Vec::with_capacity(na);
        for _ in 0..na {
            let (_, line) = next("action label")?;
            actions.push(GroundedAction::label_only(line));
        }
        let vocab = Self::new(domain_id, fluents, actions)?;
        if vocab.manifest() != text {
            return Err(bad(0, "manifest is not in canonical form".into()));
        }
        Ok(vocab)
    }

    pub fn write_manifest(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.manifest())?;
        Ok(())
    }

    pub fn read_manifest(path: &Path) -> Result<Self> {
        Self::from_manifest(&std::fs::read_to_string(path)?)
    }
}
