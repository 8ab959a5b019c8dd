//! Candidate validation: run the script against all four test pairs and
//! classify the result.

use std::time::Duration;

use super::script::{apply_script, CandidateMutator, ORIGINAL_TEST_INDEX};

/// Four-way validation taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeTag {
    /// All 4 test cases pass.
    Correct,
    /// Exactly 3 of 4 pass.
    PartiallyCorrect,
    /// The harness itself failed (script uninterpretable, sandbox failure).
    Error,
    /// 2 or fewer pass.
    Wrong,
}

impl OutcomeTag {
    pub fn name(&self) -> &'static str {
        match self {
            OutcomeTag::Correct => "correct",
            OutcomeTag::PartiallyCorrect => "partially-correct",
            OutcomeTag::Error => "error",
            OutcomeTag::Wrong => "wrong",
        }
    }

    /// A candidate ships only when tagged Correct or PartiallyCorrect.
    pub fn is_reportable(&self) -> bool {
        matches!(self, OutcomeTag::Correct | OutcomeTag::PartiallyCorrect)
    }
}

/// Total mapping from (tests passed, harness health) to a tag.
pub fn outcome_tag(passed: u8, harness_ok: bool) -> OutcomeTag {
    if !harness_ok {
        OutcomeTag::Error
    } else if passed == 4 {
        OutcomeTag::Correct
    } else if passed == 3 {
        OutcomeTag::PartiallyCorrect
    } else {
        OutcomeTag::Wrong
    }
}

#[derive(Debug, Clone)]
pub struct ValidationOutcome {
    pub tag: OutcomeTag,
    pub passed: u8,
    /// Per-test diffs or the harness error text; fed to the refiner.
    pub diagnostics: String,
    /// Whether the original negative→positive pair was among the passers.
    pub original_passed: bool,
}

/// Byte comparison after trailing-whitespace normalization: trailing blanks
/// stripped per line, trailing newlines dropped.
pub fn normalize_for_compare(text: &str) -> String {
    let mut out: Vec<&str> = text.lines().map(str::trim_end).collect();
    while out.last() == Some(&"") {
        out.pop();
    }
    out.join("\n")
}

fn diff_excerpt(expected: &str, got: &str) -> String {
    let cap = |s: &str| -> String {
        let mut t: String = s.chars().take(240).collect();
        if t.len() < s.len() {
            t.push_str("...");
        }
        t
    };
    format!("--- expected\n{}\n--- got\n{}", cap(expected), cap(got))
}

/// Run the candidate against all four pairs. Site selection is seeded by
/// test index, so validation is deterministic.
pub fn validate_mutator(candidate: &CandidateMutator, timeout: Duration) -> ValidationOutcome {
    debug_assert_eq!(candidate.tests.len(), 4, "candidate must carry exactly 4 tests");
    let mut passed = 0u8;
    let mut original_passed = false;
    let mut diagnostics = Vec::new();
    for (index, test) in candidate.tests.iter().enumerate() {
        match apply_script(&candidate.script, &test.input, index as u64, timeout) {
            Err(harness_error) => {
                return ValidationOutcome {
                    tag: outcome_tag(passed, false),
                    passed,
                    diagnostics: format!("harness failure on test {}: {harness_error}", index + 1),
                    original_passed,
                };
            }
            Ok(output) => {
                let want = normalize_for_compare(&test.expected_output);
                let got = normalize_for_compare(&output);
                if want == got {
                    passed += 1;
                    if index == ORIGINAL_TEST_INDEX {
                        original_passed = true;
                    }
                } else {
                    diagnostics.push(format!("test {} failed:\n{}", index + 1, diff_excerpt(&want, &got)));
                }
            }
        }
    }
    ValidationOutcome {
        tag: outcome_tag(passed, true),
        passed,
        diagnostics: diagnostics.join("\n"),
        original_passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miner::issue::GeneratedTest;
    use crate::miner::script::Script;
    use crate::mutator::Scope;

    fn candidate_with_passes(n: usize) -> CandidateMutator {
        // extern -> static rule; failing tests expect an impossible output.
        let mut tests = Vec::new();
        for i in 0..4 {
            let input = format!("extern int f{i}();");
            let expected = if i < n {
                format!("static int f{i}();")
            } else {
                "WRONG OUTPUT".to_string()
            };
            tests.push(GeneratedTest { input, expected_output: expected });
        }
        CandidateMutator {
            generalized_description: "swap extern for static".into(),
            script_text: String::new(),
            script: Script::Rewrite {
                pattern: r"\bextern\b".into(),
                replacement: "static".into(),
                scope: Scope::RandomMatchSite,
            },
            tests,
            refinement_count: 0,
        }
    }

    #[test]
    fn taxonomy_is_total_over_passed_and_harness() {
        for passed in 0..=4u8 {
            assert_eq!(outcome_tag(passed, false), OutcomeTag::Error);
        }
        assert_eq!(outcome_tag(4, true), OutcomeTag::Correct);
        assert_eq!(outcome_tag(3, true), OutcomeTag::PartiallyCorrect);
        for passed in 0..=2u8 {
            assert_eq!(outcome_tag(passed, true), OutcomeTag::Wrong);
        }
    }

    #[test]
    fn pass_counts_map_to_tags() {
        let timeout = Duration::from_secs(5);
        assert_eq!(validate_mutator(&candidate_with_passes(4), timeout).tag, OutcomeTag::Correct);
        assert_eq!(validate_mutator(&candidate_with_passes(3), timeout).tag, OutcomeTag::PartiallyCorrect);
        assert_eq!(validate_mutator(&candidate_with_passes(2), timeout).tag, OutcomeTag::Wrong);
        assert_eq!(validate_mutator(&candidate_with_passes(0), timeout).tag, OutcomeTag::Wrong);
    }

    #[test]
    fn original_pair_pass_is_tracked() {
        let outcome = validate_mutator(&candidate_with_passes(4), Duration::from_secs(5));
        assert!(outcome.original_passed);
        let outcome = validate_mutator(&candidate_with_passes(3), Duration::from_secs(5));
        assert!(!outcome.original_passed, "test 4 is the original pair and fails here");
    }

    #[test]
    fn broken_script_is_a_harness_error_with_diagnostics() {
        let mut candidate = candidate_with_passes(4);
        candidate.script = Script::External("exit 3\n".into());
        let outcome = validate_mutator(&candidate, Duration::from_secs(5));
        assert_eq!(outcome.tag, OutcomeTag::Error);
        assert!(outcome.diagnostics.contains("harness failure"), "{}", outcome.diagnostics);
    }

    #[test]
    fn failing_tests_produce_diffs() {
        let outcome = validate_mutator(&candidate_with_passes(2), Duration::from_secs(5));
        assert!(outcome.diagnostics.contains("--- expected"));
        assert!(outcome.diagnostics.contains("--- got"));
    }

    #[test]
    fn normalization_strips_trailing_whitespace_only() {
        assert_eq!(normalize_for_compare("a  \nb\t\n\n\n"), "a\nb");
        assert_ne!(normalize_for_compare("a b"), normalize_for_compare("a  b"));
    }
}
