//! External (plugin) mutators: opaque commands that edit a file in place.
//!
//! This is the escape hatch for context-sensitive transformations (AST
//! visitors and the like) that cannot be expressed as a single rewrite rule.
//! Failures are soft by contract: a timed-out or non-zero plugin means
//! "mutation skipped", never a dead campaign.

use std::io::Write;
use std::path::Path;
use std::time::Duration;

use super::{Action, Element, MutationResult, MutatorError};
use crate::runner::exec;

pub const FILE_PLACEHOLDER: &str = "{input}";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalMutator {
    pub id: String,
    /// Argv with exactly one `{input}` placeholder for the target file.
    pub command: Vec<String>,
    pub timeout: Duration,
    pub action: Action,
    pub elements: Vec<Element>,
    pub provenance: String,
}

impl ExternalMutator {
    pub fn new(
        id: &str,
        command: Vec<String>,
        timeout: Duration,
        action: Action,
        elements: Vec<Element>,
        provenance: &str,
    ) -> Result<Self, MutatorError> {
        let holes = command.iter().filter(|a| a.contains(FILE_PLACEHOLDER)).count();
        if command.is_empty() || holes != 1 {
            return Err(MutatorError::BadCommand { id: id.to_string(), command: command.join(" ") });
        }
        if timeout.is_zero() {
            return Err(MutatorError::BadCommand {
                id: id.to_string(),
                command: "timeout must be positive".to_string(),
            });
        }
        if elements.is_empty() {
            return Err(MutatorError::NoElements { id: id.to_string() });
        }
        Ok(ExternalMutator {
            id: id.to_string(),
            command,
            timeout,
            action,
            elements,
            provenance: provenance.to_string(),
        })
    }

    /// Write `source` to a fresh file under `scratch`, run the plugin on it,
    /// and read the file back.
    pub fn apply(&self, source: &str, scratch: &Path) -> Result<MutationResult, MutatorError> {
        let mut file = tempfile::Builder::new()
            .prefix("mutant-")
            .suffix(".c")
            .tempfile_in(scratch)
            .map_err(|e| MutatorError::Io(e.to_string()))?;
        file.write_all(source.as_bytes()).map_err(|e| MutatorError::Io(e.to_string()))?;
        file.flush().map_err(|e| MutatorError::Io(e.to_string()))?;

        let argv: Vec<String> = self
            .command
            .iter()
            .map(|a| a.replace(FILE_PLACEHOLDER, &file.path().to_string_lossy()))
            .collect();
        let result = exec::run(&argv, scratch, self.timeout, &["PATH".to_string()])
            .map_err(|e| MutatorError::Io(format!("spawn {argv:?}: {e}")))?;
        if result.timed_out {
            return Err(MutatorError::PluginTimeout { id: self.id.clone() });
        }
        if result.exit_code != Some(0) {
            return Err(MutatorError::PluginNonZeroExit {
                id: self.id.clone(),
                exit: result.exit_code,
                stderr: result.stderr.chars().take(400).collect(),
            });
        }
        let output = std::fs::read_to_string(file.path()).map_err(|e| MutatorError::Io(e.to_string()))?;
        let changed = output != source;
        Ok(MutationResult {
            changed,
            sites_matched: usize::from(changed),
            site_chosen: None,
            output,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn script(dir: &Path, body: &str) -> String {
        let path = dir.join("plugin.sh");
        std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
        use std::os::unix::fs::PermissionsExt;
        let mut perms = std::fs::metadata(&path).unwrap().permissions();
        perms.set_mode(0o755);
        std::fs::set_permissions(&path, perms).unwrap();
        path.to_string_lossy().into_owned()
    }

    fn ext(cmd: Vec<String>, timeout_ms: u64) -> ExternalMutator {
        ExternalMutator::new(
            "ext-test",
            cmd,
            Duration::from_millis(timeout_ms),
            Action::Add,
            vec![Element::FunctionDeclaration],
            "t",
        )
        .unwrap()
    }

    #[test]
    fn appending_plugin_reports_change() {
        let dir = tempfile::tempdir().unwrap();
        let sh = script(dir.path(), r#"printf 'extern int f(int);\n' >> "$1""#);
        let m = ext(vec![sh, FILE_PLACEHOLDER.to_string()], 2000);
        let r = m.apply("int g();\n", dir.path()).unwrap();
        assert!(r.changed);
        assert_eq!(r.output, "int g();\nextern int f(int);\n");
    }

    #[test]
    fn identity_plugin_reports_unchanged() {
        let dir = tempfile::tempdir().unwrap();
        let sh = script(dir.path(), "true");
        let m = ext(vec![sh, FILE_PLACEHOLDER.to_string()], 2000);
        let r = m.apply("int g();\n", dir.path()).unwrap();
        assert!(!r.changed);
        assert_eq!(r.sites_matched, 0);
    }

    #[test]
    fn sleeping_plugin_times_out() {
        let dir = tempfile::tempdir().unwrap();
        let sh = script(dir.path(), "sleep 30");
        let m = ext(vec![sh, FILE_PLACEHOLDER.to_string()], 150);
        match m.apply("int g();\n", dir.path()) {
            Err(MutatorError::PluginTimeout { .. }) => {}
            other => panic!("expected PluginTimeout, got {other:?}"),
        }
    }

    #[test]
    fn failing_plugin_is_nonzero_exit() {
        let dir = tempfile::tempdir().unwrap();
        let sh = script(dir.path(), "echo boom >&2; exit 2");
        let m = ext(vec![sh, FILE_PLACEHOLDER.to_string()], 2000);
        match m.apply("int g();\n", dir.path()) {
            Err(MutatorError::PluginNonZeroExit { exit: Some(2), .. }) => {}
            other => panic!("expected PluginNonZeroExit, got {other:?}"),
        }
    }

    #[test]
    fn command_needs_exactly_one_placeholder() {
        let bad = ExternalMutator::new(
            "x",
            vec!["tool".into()],
            Duration::from_secs(1),
            Action::Add,
            vec![Element::Expression],
            "t",
        );
        assert!(matches!(bad, Err(MutatorError::BadCommand { .. })));
    }
}
