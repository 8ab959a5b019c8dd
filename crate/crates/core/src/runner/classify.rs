//! Outcome classification for one compiler invocation.

use std::sync::OnceLock;

use regex::Regex;

use super::{CrashKind, OutcomeKind};

fn assertion_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // glibc/LLVM style `Assertion `x > 0' failed.` plus the bare
    // `Assertion failed: (...)` form.
    RE.get_or_init(|| Regex::new(r"(?i)assertion[^\n]{0,200}failed").unwrap())
}

/// Map raw process results onto an outcome kind.
///
/// Precedence is fixed: Hang > SegmentationFault > AssertionFailure >
/// InternalCompilerError > CompileError. A timed-out process is a Hang no
/// matter what made it into stderr before the kill; a SIGSEGV kill wins over
/// any banner text; assertion text wins over the bug-report banner because
/// assertion failures also print it.
pub fn classify_outcome(
    exit_code: Option<i32>,
    signal: Option<i32>,
    stderr: &str,
    timed_out: bool,
) -> OutcomeKind {
    if timed_out {
        return OutcomeKind::Crash(CrashKind::Hang);
    }
    if let Some(sig) = signal {
        if sig == libc::SIGSEGV || sig == libc::SIGBUS {
            return OutcomeKind::Crash(CrashKind::SegmentationFault);
        }
    }
    if assertion_re().is_match(stderr) {
        return OutcomeKind::Crash(CrashKind::AssertionFailure);
    }
    let lower = stderr.to_lowercase();
    if lower.contains("internal compiler error") || lower.contains("please submit a bug report") {
        return OutcomeKind::Crash(CrashKind::InternalCompilerError);
    }
    if signal.is_some() || exit_code.unwrap_or(0) != 0 {
        return OutcomeKind::CompileError;
    }
    OutcomeKind::Success
}

#[cfg(test)]
mod tests {
    use super::*;

    const GCC_ICE: &str = "z1.c: In function 'f':\nz1.c:2:1: internal compiler error: in eliminate_unnecessary_stmts, at tree-ssa-dce.cc:1512\n";
    const CLANG_ASSERT: &str = "clang: SemaDecl.cpp:123: void check(): Assertion `D != nullptr' failed.\nPLEASE submit a bug report to https://github.com/llvm/llvm-project/issues/\n";

    #[test]
    fn precedence_table() {
        use CrashKind::*;
        use OutcomeKind::*;
        // (exit, signal, stderr, timed_out) -> kind
        let cases: &[(Option<i32>, Option<i32>, &str, bool, OutcomeKind)] = &[
            (None, None, "", true, Crash(Hang)),
            // timeout beats any stderr content or signal
            (None, Some(libc::SIGKILL), CLANG_ASSERT, true, Crash(Hang)),
            (None, Some(libc::SIGSEGV), "", false, Crash(SegmentationFault)),
            (None, Some(libc::SIGBUS), "", false, Crash(SegmentationFault)),
            // segv beats assertion text
            (None, Some(libc::SIGSEGV), CLANG_ASSERT, false, Crash(SegmentationFault)),
            // clang assertions also print the bug-report banner; assertion wins
            (None, Some(libc::SIGABRT), CLANG_ASSERT, false, Crash(AssertionFailure)),
            (Some(134), None, "Assertion failed: (x > 0), function f, file a.c", false, Crash(AssertionFailure)),
            (Some(1), None, GCC_ICE, false, Crash(InternalCompilerError)),
            (Some(1), None, "PLEASE submit a bug report to ...", false, Crash(InternalCompilerError)),
            // zero exit but an ICE banner still counts as a crash
            (Some(0), None, GCC_ICE, false, Crash(InternalCompilerError)),
            (Some(1), None, "a.c:1:1: error: expected ';'", false, CompileError),
            // a kill by a signal outside the segfault set is a plain failure
            (None, Some(libc::SIGABRT), "", false, CompileError),
            (Some(0), None, "warning: unused variable", false, Success),
            (Some(0), None, "", false, Success),
        ];
        for (i, (exit, sig, stderr, t, want)) in cases.iter().enumerate() {
            let got = classify_outcome(*exit, *sig, stderr, *t);
            assert_eq!(got, *want, "case {i}");
        }
    }

    #[test]
    fn classification_is_deterministic() {
        for _ in 0..3 {
            assert_eq!(
                classify_outcome(Some(1), None, GCC_ICE, false),
                OutcomeKind::Crash(CrashKind::InternalCompilerError)
            );
        }
    }
}
