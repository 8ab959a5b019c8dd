//! Mutator pack files.
//!
//! A pack is a plain-text file of `[mutator]` stanzas:
//!
//! ```text
//! # comment
//! [mutator]
//! id = M3
//! kind = rewrite
//! pattern = \bextern\b
//! replacement = static
//! scope = all-matches
//! action = Modify
//! elements = StorageClassSpecifier
//! provenance = gcc#108449
//! ```
//!
//! `kind = external` stanzas carry `command` (whitespace-split argv with one
//! `{input}` placeholder) and `timeout_ms` instead of pattern/replacement.
//! `guard` is optional on rewrite stanzas. Load and save round-trip.

use std::path::Path;
use std::time::Duration;

use super::{Action, Element, ExternalMutator, Mutator, MutatorError, MutatorRegistry, RewriteRule, Scope};
use crate::textfmt::{self, Stanza};

/// Rewrite stanzas without an explicit scope get the mined default.
pub const DEFAULT_SCOPE: Scope = Scope::RandomMatchSite;
pub const DEFAULT_EXTERNAL_TIMEOUT_MS: u64 = 10_000;

pub fn load_mutator_pack(path: &Path) -> Result<MutatorRegistry, MutatorError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| MutatorError::Io(format!("{}: {e}", path.display())))?;
    load_pack_str(&text)
}

pub fn load_pack_str(text: &str) -> Result<MutatorRegistry, MutatorError> {
    let stanzas = textfmt::parse(text)
        .map_err(|e| MutatorError::Parse { line: 0, message: e.to_string() })?;
    let mut registry = MutatorRegistry::new();
    for stanza in &stanzas {
        if stanza.name.is_empty() && stanza.fields.is_empty() {
            continue;
        }
        if stanza.name != "mutator" {
            return Err(MutatorError::Parse {
                line: stanza.line,
                message: format!("unexpected section [{}]", stanza.name),
            });
        }
        let mutator = mutator_from_stanza(stanza)?;
        registry.push(mutator)?;
    }
    Ok(registry)
}

fn field<'a>(stanza: &'a Stanza, key: &str) -> Result<&'a str, MutatorError> {
    stanza.get(key).ok_or(MutatorError::Parse {
        line: stanza.line,
        message: format!("missing field `{key}`"),
    })
}

fn mutator_from_stanza(stanza: &Stanza) -> Result<Mutator, MutatorError> {
    let id = field(stanza, "id")?;
    let kind = stanza.get("kind").unwrap_or("rewrite");
    let action_name = field(stanza, "action")?;
    let action = Action::parse_name(action_name).ok_or(MutatorError::Parse {
        line: stanza.line,
        message: format!("bad action {action_name:?}"),
    })?;
    let mut elements = Vec::new();
    for name in field(stanza, "elements")?.split(',') {
        let name = name.trim();
        if name.is_empty() {
            continue;
        }
        let element = Element::parse_name(name).ok_or(MutatorError::Parse {
            line: stanza.line,
            message: format!("bad element {name:?}"),
        })?;
        if !elements.contains(&element) {
            elements.push(element);
        }
    }
    let provenance = stanza.get("provenance").unwrap_or("");

    match kind {
        "rewrite" => {
            let pattern = field(stanza, "pattern")?;
            let replacement = field(stanza, "replacement")?;
            let scope = match stanza.get("scope") {
                None => DEFAULT_SCOPE,
                Some(s) => Scope::parse_name(s).ok_or(MutatorError::Parse {
                    line: stanza.line,
                    message: format!("bad scope {s:?}"),
                })?,
            };
            let rule = RewriteRule::new(
                id,
                pattern,
                replacement,
                scope,
                stanza.get("guard"),
                action,
                elements,
                provenance,
            )?;
            Ok(Mutator::Rewrite(rule))
        }
        "external" => {
            let command: Vec<String> =
                field(stanza, "command")?.split_whitespace().map(str::to_string).collect();
            let timeout_ms = match stanza.get("timeout_ms") {
                None => DEFAULT_EXTERNAL_TIMEOUT_MS,
                Some(v) => v.parse::<u64>().map_err(|_| MutatorError::Parse {
                    line: stanza.line,
                    message: format!("bad timeout_ms {v:?}"),
                })?,
            };
            let ext = ExternalMutator::new(
                id,
                command,
                Duration::from_millis(timeout_ms),
                action,
                elements,
                provenance,
            )?;
            Ok(Mutator::External(ext))
        }
        other => Err(MutatorError::Parse {
            line: stanza.line,
            message: format!("bad kind {other:?} (expected rewrite|external)"),
        }),
    }
}

pub fn save_mutator_pack(registry: &MutatorRegistry, path: &Path) -> Result<(), MutatorError> {
    std::fs::write(path, save_pack_str(registry))
        .map_err(|e| MutatorError::Io(format!("{}: {e}", path.display())))
}

pub fn save_pack_str(registry: &MutatorRegistry) -> String {
    let mut stanzas = Vec::with_capacity(registry.len());
    for mutator in registry.iter() {
        let mut stanza = Stanza::new("mutator");
        stanza.push("id", mutator.id());
        match mutator {
            Mutator::Rewrite(rule) => {
                stanza.push("kind", "rewrite");
                stanza.push("pattern", rule.pattern());
                stanza.push("replacement", rule.replacement());
                stanza.push("scope", rule.scope.name());
                if let Some(guard) = rule.guard() {
                    stanza.push("guard", guard);
                }
            }
            Mutator::External(ext) => {
                stanza.push("kind", "external");
                stanza.push("command", ext.command.join(" "));
                stanza.push("timeout_ms", ext.timeout.as_millis().to_string());
            }
        }
        stanza.push("action", mutator.action().name());
        let elements: Vec<&str> = mutator.elements().iter().map(|e| e.name()).collect();
        stanza.push("elements", elements.join(","));
        stanza.push("provenance", mutator.provenance());
        stanzas.push(stanza);
    }
    textfmt::render(&stanzas)
}
