//! Regex rewrite rules: the native mutator representation.
//!
//! Rules use an extended-regex pattern with `\b` word boundaries and a
//! sed-style replacement template where `\1`..`\9` reference capture groups
//! and a backslash before any other character produces that character
//! literally.

use rand::Rng;
use regex::{Captures, Regex};

use super::{Action, Element, MutatorError, Scope};

#[derive(Debug, Clone)]
pub struct RewriteRule {
    pub id: String,
    pattern_src: String,
    replacement: String,
    guard_src: Option<String>,
    pub scope: Scope,
    pub action: Action,
    pub elements: Vec<Element>,
    pub provenance: String,
    regex: Regex,
    guard: Option<Regex>,
}

/// Result of applying one mutator to one input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutationResult {
    pub output: String,
    pub changed: bool,
    pub sites_matched: usize,
    /// Index of the rewritten match for random-site scope.
    pub site_chosen: Option<usize>,
}

impl MutationResult {
    pub fn unchanged(source: &str, sites: usize) -> Self {
        MutationResult {
            output: source.to_string(),
            changed: false,
            sites_matched: sites,
            site_chosen: None,
        }
    }
}

impl PartialEq for RewriteRule {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.pattern_src == other.pattern_src
            && self.replacement == other.replacement
            && self.guard_src == other.guard_src
            && self.scope == other.scope
            && self.action == other.action
            && self.elements == other.elements
            && self.provenance == other.provenance
    }
}
impl Eq for RewriteRule {}

impl RewriteRule {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: &str,
        pattern: &str,
        replacement: &str,
        scope: Scope,
        guard: Option<&str>,
        action: Action,
        elements: Vec<Element>,
        provenance: &str,
    ) -> Result<Self, MutatorError> {
        let regex = Regex::new(pattern).map_err(|e| MutatorError::InvalidPattern {
            id: id.to_string(),
            pattern: pattern.to_string(),
            reason: e.to_string(),
        })?;
        let guard_re = match guard {
            Some(g) => Some(Regex::new(g).map_err(|e| MutatorError::InvalidPattern {
                id: id.to_string(),
                pattern: g.to_string(),
                reason: e.to_string(),
            })?),
            None => None,
        };
        let max_group = max_group_reference(replacement);
        if max_group > regex.captures_len() - 1 {
            return Err(MutatorError::ReplacementGroupOutOfRange {
                id: id.to_string(),
                group: max_group,
                available: regex.captures_len() - 1,
            });
        }
        if elements.is_empty() {
            return Err(MutatorError::NoElements { id: id.to_string() });
        }
        Ok(RewriteRule {
            id: id.to_string(),
            pattern_src: pattern.to_string(),
            replacement: replacement.to_string(),
            guard_src: guard.map(str::to_string),
            scope,
            action,
            elements,
            provenance: provenance.to_string(),
            regex,
            guard: guard_re,
        })
    }

    pub fn pattern(&self) -> &str {
        &self.pattern_src
    }

    pub fn replacement(&self) -> &str {
        &self.replacement
    }

    pub fn guard(&self) -> Option<&str> {
        self.guard_src.as_deref()
    }

    /// Apply the rule. Pure in (rule, source, rng state): the same seed
    /// always picks the same site.
    pub fn apply(&self, source: &str, rng: &mut impl Rng) -> MutationResult {
        if let Some(guard) = &self.guard {
            if !guard.is_match(source) {
                return MutationResult::unchanged(source, 0);
            }
        }
        let sites: Vec<(usize, usize)> = self
            .regex
            .find_iter(source)
            .map(|m| (m.start(), m.end()))
            .collect();
        if sites.is_empty() {
            return MutationResult::unchanged(source, 0);
        }
        let (output, site_chosen) = match self.scope {
            Scope::AllMatches => {
                let out = self
                    .regex
                    .replace_all(source, |caps: &Captures| expand(&self.replacement, caps))
                    .into_owned();
                (out, None)
            }
            Scope::FirstMatch => (self.replace_site(source, &sites, 0), None),
            Scope::RandomMatchSite => {
                let idx = rng.gen_range(0..sites.len());
                (self.replace_site(source, &sites, idx), Some(idx))
            }
        };
        let changed = output != source;
        MutationResult { output, changed, sites_matched: sites.len(), site_chosen }
    }

    /// Replay a previous random-site application without consuming RNG.
    pub fn apply_at_site(&self, source: &str, site: usize) -> MutationResult {
        let sites: Vec<(usize, usize)> = self
            .regex
            .find_iter(source)
            .map(|m| (m.start(), m.end()))
            .collect();
        if site >= sites.len() {
            return MutationResult::unchanged(source, sites.len());
        }
        let output = self.replace_site(source, &sites, site);
        let changed = output != source;
        MutationResult { output, changed, sites_matched: sites.len(), site_chosen: Some(site) }
    }

    fn replace_site(&self, source: &str, sites: &[(usize, usize)], idx: usize) -> String {
        let (start, _end) = sites[idx];
        // Re-run capture matching anchored at the chosen site so groups are
        // available for expansion.
        let caps = self
            .regex
            .captures_at(source, start)
            .expect("match disappeared between find and captures");
        let m = caps.get(0).unwrap();
        debug_assert_eq!(m.start(), start);
        let mut out = String::with_capacity(source.len());
        out.push_str(&source[..m.start()]);
        out.push_str(&expand(&self.replacement, &caps));
        out.push_str(&source[m.end()..]);
        out
    }
}

/// Highest capture group referenced by a replacement template.
fn max_group_reference(replacement: &str) -> usize {
    let mut max = 0;
    let mut chars = replacement.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some(d @ '1'..='9') => max = max.max(d as usize - '0' as usize),
                Some(_) | None => {}
            }
        }
    }
    max
}

/// Expand a sed-style replacement against one match's captures.
fn expand(replacement: &str, caps: &Captures) -> String {
    let mut out = String::with_capacity(replacement.len());
    let mut chars = replacement.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some(d @ '1'..='9') => {
                let idx = d as usize - '0' as usize;
                if let Some(m) = caps.get(idx) {
                    out.push_str(m.as_str());
                }
            }
            Some('\\') => out.push('\\'),
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}
