//! Target compiler invocation and outcome classification.
//!
//! A target is described by an argv template with one `{input}` placeholder,
//! e.g. `cc -O2 -c {input} -o /dev/null`. Each compile writes the candidate
//! source to a fresh file in a private scratch directory, runs the target
//! under a wall-clock timeout with a cleared (allow-listed) environment, and
//! classifies the result.

mod classify;
pub mod exec;
mod trace;

pub use classify::classify_outcome;
pub use trace::{parse_stack_trace, Frame, StackTrace, TraceDialect};

use std::io::Write;
use std::path::Path;
use std::time::Duration;

use thiserror::Error;

pub const INPUT_PLACEHOLDER: &str = "{input}";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("target template must contain exactly one {INPUT_PLACEHOLDER}: {0:?}")]
    BadTemplate(String),
    #[error("failed to launch target {argv:?}: {source}")]
    LaunchFailure {
        argv: Vec<String>,
        #[source]
        source: std::io::Error,
    },
    #[error("scratch io: {0}")]
    Io(#[from] std::io::Error),
}

/// How to invoke the compiler under test.
#[derive(Debug, Clone)]
pub struct TargetConfig {
    /// Argv with exactly one `{input}` placeholder.
    pub argv: Vec<String>,
    pub timeout: Duration,
    /// Environment variable names passed through to the child.
    pub env_allow: Vec<String>,
    pub dialect: TraceDialect,
    /// Suffix for the written input file.
    pub input_suffix: String,
}

impl TargetConfig {
    /// Split a whitespace-separated command template.
    pub fn from_template(template: &str) -> Result<Self, RunnerError> {
        let argv: Vec<String> = template.split_whitespace().map(str::to_string).collect();
        let holes = argv.iter().filter(|a| a.contains(INPUT_PLACEHOLDER)).count();
        if argv.is_empty() || holes != 1 {
            return Err(RunnerError::BadTemplate(template.to_string()));
        }
        Ok(TargetConfig {
            argv,
            timeout: DEFAULT_TIMEOUT,
            env_allow: vec!["PATH".to_string()],
            dialect: TraceDialect::Generic,
            input_suffix: ".c".to_string(),
        })
    }

    pub fn template(&self) -> String {
        self.argv.join(" ")
    }

    fn resolved_argv(&self, input: &Path) -> Vec<String> {
        self.argv
            .iter()
            .map(|a| a.replace(INPUT_PLACEHOLDER, &input.to_string_lossy()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CrashKind {
    SegmentationFault,
    AssertionFailure,
    Hang,
    InternalCompilerError,
}

impl CrashKind {
    pub fn name(&self) -> &'static str {
        match self {
            CrashKind::SegmentationFault => "segmentation-fault",
            CrashKind::AssertionFailure => "assertion-failure",
            CrashKind::Hang => "hang",
            CrashKind::InternalCompilerError => "internal-compiler-error",
        }
    }

    pub fn parse_name(name: &str) -> Option<CrashKind> {
        match name {
            "segmentation-fault" => Some(CrashKind::SegmentationFault),
            "assertion-failure" => Some(CrashKind::AssertionFailure),
            "hang" => Some(CrashKind::Hang),
            "internal-compiler-error" => Some(CrashKind::InternalCompilerError),
            _ => None,
        }
    }
}

impl std::fmt::Display for CrashKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeKind {
    Success,
    CompileError,
    Crash(CrashKind),
}

impl OutcomeKind {
    pub fn is_crash(&self) -> bool {
        matches!(self, OutcomeKind::Crash(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitInfo {
    Code(i32),
    Signal(i32),
    TimedOut,
}

/// Classified result of one target invocation.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub kind: OutcomeKind,
    pub exit: ExitInfo,
    pub duration: Duration,
    pub stdout: String,
    pub stderr: String,
    /// Present only for crash outcomes, and possibly empty even then.
    pub stacktrace: Option<StackTrace>,
}

/// Compile `source` in a private scratch directory that is removed on
/// return.
pub fn compile(cfg: &TargetConfig, source: &str) -> Result<RunOutcome, RunnerError> {
    let scratch = tempfile::tempdir()?;
    compile_in(cfg, source, scratch.path())
}

/// Compile `source`, using `scratch` as the working directory. The input
/// file is created fresh inside `scratch`; the caller owns cleanup (this is
/// what lets coverage providers read per-run dumps the target wrote next to
/// the input).
pub fn compile_in(cfg: &TargetConfig, source: &str, scratch: &Path) -> Result<RunOutcome, RunnerError> {
    let mut input = tempfile::Builder::new()
        .prefix("input-")
        .suffix(&cfg.input_suffix)
        .tempfile_in(scratch)?;
    input.write_all(source.as_bytes())?;
    input.flush()?;

    let argv = cfg.resolved_argv(input.path());
    let result = exec::run(&argv, scratch, cfg.timeout, &cfg.env_allow)
        .map_err(|source| RunnerError::LaunchFailure { argv: argv.clone(), source })?;

    let kind = classify_outcome(result.exit_code, result.signal, &result.stderr, result.timed_out);
    let exit = if result.timed_out {
        ExitInfo::TimedOut
    } else if let Some(sig) = result.signal {
        ExitInfo::Signal(sig)
    } else {
        ExitInfo::Code(result.exit_code.unwrap_or(0))
    };
    let stacktrace = if kind.is_crash() {
        Some(parse_stack_trace(&result.stderr, cfg.dialect))
    } else {
        None
    };
    Ok(RunOutcome {
        kind,
        exit,
        duration: result.duration,
        stdout: result.stdout,
        stderr: result.stderr,
        stacktrace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A tiny scripted stand-in compiler: crashes on planted tokens, errors
    /// on the word `syntaxerror`, succeeds otherwise.
    pub(crate) fn fake_compiler(dir: &Path) -> TargetConfig {
        let script = dir.join("fakecc.sh");
        std::fs::write(
            &script,
            r#"#!/bin/sh
f="$1"
if grep -q FAKE_HANG "$f"; then sleep 60; fi
if grep -q FAKE_SEGV "$f"; then kill -SEGV $$; fi
if grep -q FAKE_ASSERT "$f"; then
  echo "fakecc: check.c:9: verify: Assertion \`ok' failed." >&2
  echo "0x000001 verify" >&2
  printf '\tcheck.c:9\n' >&2
  exit 134
fi
if grep -q FAKE_ICE "$f"; then
  echo "$f:1:1: internal compiler error: in fold, at fold.c:42" >&2
  echo "0x000002 fold" >&2
  printf '\tfold.c:42\n' >&2
  exit 1
fi
if grep -q syntaxerror "$f"; then
  echo "$f:1:1: error: expected declaration" >&2
  exit 1
fi
exit 0
"#,
        )
        .unwrap();
        let mut perms = std::fs::metadata(&script).unwrap().permissions();
        use std::os::unix::fs::PermissionsExt;
        perms.set_mode(0o755);
        std::fs::set_permissions(&script, perms).unwrap();
        let mut cfg = TargetConfig::from_template(&format!("{} {{input}}", script.display())).unwrap();
        cfg.timeout = Duration::from_millis(400);
        cfg.dialect = TraceDialect::GccIce;
        cfg
    }

    #[test]
    fn template_validation() {
        assert!(TargetConfig::from_template("cc -O2 -c {input} -o /dev/null").is_ok());
        assert!(TargetConfig::from_template("cc -O2").is_err());
        assert!(TargetConfig::from_template("cc {input} {input}").is_err());
        assert!(TargetConfig::from_template("").is_err());
    }

    #[test]
    fn empty_translation_unit_succeeds() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fake_compiler(dir.path());
        let out = compile(&cfg, "").unwrap();
        assert_eq!(out.kind, OutcomeKind::Success);
        assert!(out.stacktrace.is_none());
    }

    #[test]
    fn planted_patterns_classify_per_kind() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fake_compiler(dir.path());
        let segv = compile(&cfg, "int x; /* FAKE_SEGV */").unwrap();
        assert_eq!(segv.kind, OutcomeKind::Crash(CrashKind::SegmentationFault));
        let assert_ = compile(&cfg, "int x; /* FAKE_ASSERT */").unwrap();
        assert_eq!(assert_.kind, OutcomeKind::Crash(CrashKind::AssertionFailure));
        let ice = compile(&cfg, "int x; /* FAKE_ICE */").unwrap();
        assert_eq!(ice.kind, OutcomeKind::Crash(CrashKind::InternalCompilerError));
        assert_eq!(ice.stacktrace.as_ref().unwrap().frames[0].function, "fold");
        let hang = compile(&cfg, "int x; /* FAKE_HANG */").unwrap();
        assert_eq!(hang.kind, OutcomeKind::Crash(CrashKind::Hang));
        assert!(hang.duration >= cfg.timeout);
    }

    #[test]
    fn diagnostics_are_plain_compile_errors() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fake_compiler(dir.path());
        let out = compile(&cfg, "this is syntaxerror garbage").unwrap();
        assert_eq!(out.kind, OutcomeKind::CompileError);
        assert!(out.stacktrace.is_none());
    }

    #[test]
    fn missing_binary_is_launch_failure() {
        let cfg = TargetConfig::from_template("/nonexistent/cc1 {input}").unwrap();
        match compile(&cfg, "int x;") {
            Err(RunnerError::LaunchFailure { .. }) => {}
            other => panic!("expected LaunchFailure, got {other:?}"),
        }
    }
}
