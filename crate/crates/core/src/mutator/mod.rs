//! Mutator representation, application, fingerprinting, and packs.

mod external;
mod fingerprint;
pub mod pack;
mod rewrite;
mod sample;

pub use external::{ExternalMutator, FILE_PLACEHOLDER};
pub use fingerprint::{
    dedup_mutators, fingerprint_mutator, sample_from_dir, MutatorFingerprint, SampleInput,
};
pub use pack::{load_mutator_pack, load_pack_str, save_mutator_pack, save_pack_str};
pub use rewrite::{MutationResult, RewriteRule};
pub use sample::{normal_quantile, sample_size};

use std::collections::BTreeSet;
use std::path::Path;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MutatorError {
    #[error("mutator {id}: invalid pattern {pattern:?}: {reason}")]
    InvalidPattern { id: String, pattern: String, reason: String },
    #[error("mutator {id}: replacement references group {group} but pattern has {available}")]
    ReplacementGroupOutOfRange { id: String, group: usize, available: usize },
    #[error("mutator {id}: element set must not be empty")]
    NoElements { id: String },
    #[error("mutator {id}: bad command: {command}")]
    BadCommand { id: String, command: String },
    #[error("plugin {id} timed out; mutation skipped")]
    PluginTimeout { id: String },
    #[error("plugin {id} exited with {exit:?}; mutation skipped: {stderr}")]
    PluginNonZeroExit { id: String, exit: Option<i32>, stderr: String },
    #[error("duplicate mutator id {0}")]
    DuplicateId(String),
    #[error("pack parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("registry restriction is empty")]
    EmptySelection,
    #[error("unknown mutator id {0}")]
    UnknownId(String),
    #[error("io: {0}")]
    Io(String),
}

/// Where a rewrite applies within one input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    AllMatches,
    FirstMatch,
    RandomMatchSite,
}

impl Scope {
    pub fn name(&self) -> &'static str {
        match self {
            Scope::AllMatches => "all-matches",
            Scope::FirstMatch => "first-match",
            Scope::RandomMatchSite => "random-match-site",
        }
    }

    pub fn parse_name(s: &str) -> Option<Scope> {
        match s {
            "all-matches" => Some(Scope::AllMatches),
            "first-match" => Some(Scope::FirstMatch),
            "random-match-site" => Some(Scope::RandomMatchSite),
            _ => None,
        }
    }
}

/// Kind of change a mutator makes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Action {
    Add,
    Modify,
    Remove,
    Swap,
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::Add => "Add",
            Action::Modify => "Modify",
            Action::Remove => "Remove",
            Action::Swap => "Swap",
        }
    }

    pub fn parse_name(s: &str) -> Option<Action> {
        match s {
            "Add" => Some(Action::Add),
            "Modify" => Some(Action::Modify),
            "Remove" => Some(Action::Remove),
            "Swap" => Some(Action::Swap),
            _ => None,
        }
    }
}

/// Program element a mutator manipulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Element {
    Attribute,
    BuiltinFunction,
    UnaryOperator,
    FunctionDeclaration,
    Literal,
    Initialization,
    Parameter,
    Expression,
    StorageClassSpecifier,
    Statement,
    Type,
    VariableDeclaration,
    Character,
}

impl Element {
    pub const ALL: &'static [Element] = &[
        Element::Attribute,
        Element::BuiltinFunction,
        Element::UnaryOperator,
        Element::FunctionDeclaration,
        Element::Literal,
        Element::Initialization,
        Element::Parameter,
        Element::Expression,
        Element::StorageClassSpecifier,
        Element::Statement,
        Element::Type,
        Element::VariableDeclaration,
        Element::Character,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Element::Attribute => "Attribute",
            Element::BuiltinFunction => "BuiltinFunction",
            Element::UnaryOperator => "UnaryOperator",
            Element::FunctionDeclaration => "FunctionDeclaration",
            Element::Literal => "Literal",
            Element::Initialization => "Initialization",
            Element::Parameter => "Parameter",
            Element::Expression => "Expression",
            Element::StorageClassSpecifier => "StorageClassSpecifier",
            Element::Statement => "Statement",
            Element::Type => "Type",
            Element::VariableDeclaration => "VariableDeclaration",
            Element::Character => "Character",
        }
    }

    pub fn parse_name(s: &str) -> Option<Element> {
        Element::ALL.iter().copied().find(|e| e.name() == s)
    }
}

/// A code transformation: native rewrite rule or external command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mutator {
    Rewrite(RewriteRule),
    External(ExternalMutator),
}

impl Mutator {
    pub fn id(&self) -> &str {
        match self {
            Mutator::Rewrite(r) => &r.id,
            Mutator::External(e) => &e.id,
        }
    }

    pub fn action(&self) -> Action {
        match self {
            Mutator::Rewrite(r) => r.action,
            Mutator::External(e) => e.action,
        }
    }

    pub fn elements(&self) -> &[Element] {
        match self {
            Mutator::Rewrite(r) => &r.elements,
            Mutator::External(e) => &e.elements,
        }
    }

    pub fn provenance(&self) -> &str {
        match self {
            Mutator::Rewrite(r) => &r.provenance,
            Mutator::External(e) => &e.provenance,
        }
    }

    /// Apply to a whole source text. Rewrite rules never touch the
    /// filesystem; external mutators stage the text in `scratch` (a private
    /// temp dir when `None`).
    pub fn apply(
        &self,
        source: &str,
        rng: &mut impl Rng,
        scratch: Option<&Path>,
    ) -> Result<MutationResult, MutatorError> {
        match self {
            Mutator::Rewrite(rule) => Ok(rule.apply(source, rng)),
            Mutator::External(ext) => match scratch {
                Some(dir) => ext.apply(source, dir),
                None => {
                    let dir = tempfile::tempdir().map_err(|e| MutatorError::Io(e.to_string()))?;
                    ext.apply(source, dir.path())
                }
            },
        }
    }
}

/// Ordered mutator collection with an optional "successful-only" scheduling
/// filter. Ids are unique; the filter is always a subset of the ids.
#[derive(Debug, Clone, Default)]
pub struct MutatorRegistry {
    entries: Vec<Mutator>,
    successful_only: Option<BTreeSet<String>>,
}

impl MutatorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, mutator: Mutator) -> Result<(), MutatorError> {
        if self.get(mutator.id()).is_some() {
            return Err(MutatorError::DuplicateId(mutator.id().to_string()));
        }
        self.entries.push(mutator);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Mutator> {
        self.entries.iter()
    }

    pub fn get(&self, id: &str) -> Option<&Mutator> {
        self.entries.iter().find(|m| m.id() == id)
    }

    pub fn ids(&self) -> Vec<String> {
        self.entries.iter().map(|m| m.id().to_string()).collect()
    }

    /// Mutators eligible for scheduling: all of them, or the
    /// successful-only subset. Non-selected mutators stay in the registry
    /// for reporting and replay.
    pub fn active(&self) -> Vec<&Mutator> {
        match &self.successful_only {
            None => self.entries.iter().collect(),
            Some(ids) => self.entries.iter().filter(|m| ids.contains(m.id())).collect(),
        }
    }

    pub fn successful_only(&self) -> Option<&BTreeSet<String>> {
        self.successful_only.as_ref()
    }

    /// Restrict scheduling to `ids`. Every id must exist; an empty set is
    /// rejected.
    pub fn restrict(&mut self, ids: BTreeSet<String>) -> Result<(), MutatorError> {
        if ids.is_empty() {
            return Err(MutatorError::EmptySelection);
        }
        for id in &ids {
            if self.get(id).is_none() {
                return Err(MutatorError::UnknownId(id.clone()));
            }
        }
        self.successful_only = Some(ids);
        Ok(())
    }

    pub fn clear_restriction(&mut self) {
        self.successful_only = None;
    }
}
