//! The mutator miner: fixed-and-closed bug reports in, validated mutators
//! out.
//!
//! Four stages per issue:
//!
//! 1. extract the bug-triggering (positive) input and screen it against the
//!    current compiler — a crash means the bug is still live, so the issue
//!    is discarded;
//! 2. derive a non-triggering (negative) variant with an LLM;
//! 3. review the negative (compile check plus a human consistency gate,
//!    auto-accepted in batch mode);
//! 4. generalize the mutation description, generate extra test pairs,
//!    synthesize a sed-style script, and validate/refine it until it passes.
//!
//! A mutator is emitted only for Correct or PartiallyCorrect validation
//! outcomes, and always reproduces its original negative→positive pair.

pub mod issue;
pub mod llm;
pub mod script;
pub mod tracker;
pub mod validate;

pub use issue::{Compiler, DateRange, GeneratedTest, IssueRecord, IssueStatus, TestCasePair};
pub use llm::{HttpLlmClient, LlmClient, LlmError, ReplayTranscript};
pub use script::{CandidateMutator, Script, MAX_REFINEMENTS};
pub use tracker::{
    scrape_issues, BugzillaTracker, FixtureTracker, GithubTracker, TrackerClient, TrackerError,
};
pub use validate::{outcome_tag, validate_mutator, OutcomeTag, ValidationOutcome};

use std::sync::Arc;
use std::sync::OnceLock;
use std::time::Duration;

use regex::Regex;
use thiserror::Error;

use crate::bundled;
use crate::mutator::{Mutator, MutatorRegistry};
use crate::runner::{self, OutcomeKind, TargetConfig};
use script::ORIGINAL_TEST_INDEX;
use validate::normalize_for_compare;

#[derive(Debug, Error)]
pub enum MinerError {
    #[error("issue has no usable code block")]
    NoInput,
    #[error("malformed llm response ({what}): {detail}")]
    MalformedResponse { what: String, detail: String },
    #[error("generated test pair is degenerate (input equals output)")]
    DegeneratePair,
    #[error("refinement budget exhausted ({MAX_REFINEMENTS} iterations)")]
    RefinementBudgetExhausted,
    #[error("issue parse: {0}")]
    IssueParse(String),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Tracker(#[from] TrackerError),
    #[error(transparent)]
    Runner(#[from] runner::RunnerError),
    #[error(transparent)]
    Mutator(#[from] crate::mutator::MutatorError),
}

/// Where in the pipeline an issue was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Extract,
    Screen,
    DeriveNegative,
    ReviewNegative,
    Generate,
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Extract => "extract",
            Stage::Screen => "screen",
            Stage::DeriveNegative => "derive-negative",
            Stage::ReviewNegative => "review-negative",
            Stage::Generate => "generate",
        }
    }
}

/// Prompt templates with `{placeholder}` slots.
#[derive(Debug, Clone)]
pub struct PromptSet {
    pub derive_negative: String,
    pub generalize: String,
    pub generate_tests: String,
    pub create_script: String,
    pub refine: String,
    pub example_script: String,
}

impl Default for PromptSet {
    fn default() -> Self {
        PromptSet {
            derive_negative: bundled::PROMPT_DERIVE_NEGATIVE.to_string(),
            generalize: bundled::PROMPT_GENERALIZE.to_string(),
            generate_tests: bundled::PROMPT_GENERATE_TESTS.to_string(),
            create_script: bundled::PROMPT_CREATE_SCRIPT.to_string(),
            refine: bundled::PROMPT_REFINE.to_string(),
            example_script: bundled::EXAMPLE_SCRIPT.to_string(),
        }
    }
}

/// Fill `{name}` placeholders in a template.
pub fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (name, value) in vars {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    out
}

/// Ordered model list; the first is primary, the rest are fallbacks for
/// negative derivation.
pub struct LlmStack {
    pub models: Vec<Arc<dyn LlmClient>>,
    /// Additional models tried when derivation yields a malformed response.
    pub derive_retries: usize,
}

impl LlmStack {
    pub fn single(client: Arc<dyn LlmClient>) -> Self {
        LlmStack { models: vec![client], derive_retries: 1 }
    }

    fn primary(&self) -> &dyn LlmClient {
        self.models[0].as_ref()
    }
}

/// The manual consistency judgment of the review stage.
pub trait Reviewer {
    fn confirm(&mut self, pair: &TestCasePair) -> bool;
}

/// Batch mode: accept every compiling negative.
pub struct AutoAccept;
impl Reviewer for AutoAccept {
    fn confirm(&mut self, _pair: &TestCasePair) -> bool {
        true
    }
}

pub struct AutoReject;
impl Reviewer for AutoReject {
    fn confirm(&mut self, _pair: &TestCasePair) -> bool {
        false
    }
}

#[derive(Debug, Clone)]
pub enum MineResult {
    Mined(Mutator),
    Rejected { stage: Stage, reason: String },
}

#[derive(Debug, Clone, Default)]
pub struct MineLog {
    pub llm_calls: u32,
    pub refinements: u32,
    /// (tag, passed) per validation round.
    pub validations: Vec<(OutcomeTag, u8)>,
}

#[derive(Debug, Clone)]
pub struct MineReport {
    pub issue_id: String,
    pub result: MineResult,
    pub log: MineLog,
}

#[derive(Debug, Clone)]
pub struct MinerConfig {
    pub generated_tests: usize,
    pub max_refinements: u32,
    pub script_timeout: Duration,
    /// Where external candidate scripts are written when they cannot be
    /// lifted to rewrite rules.
    pub script_dir: std::path::PathBuf,
    pub prompts: PromptSet,
    /// Cap on report text stuffed into prompts.
    pub max_report_chars: usize,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            generated_tests: 3,
            max_refinements: MAX_REFINEMENTS,
            script_timeout: Duration::from_secs(10),
            script_dir: std::env::temp_dir().join("relapse-scripts"),
            prompts: PromptSet::default(),
            max_report_chars: 6000,
        }
    }
}

/// Stage ① (first half): pick the first self-contained code block.
pub fn extract_positive(issue: &IssueRecord) -> Option<String> {
    issue.code_blocks.first().cloned()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Screen {
    Keep,
    Discard(String),
}

/// Stage ① (second half): compile the positive with the current compiler;
/// a crash means the bug is still present, so discard. Plain compile errors
/// keep the issue. Runner infrastructure failures also discard.
pub fn screen_fixed(issue: &IssueRecord, positive: &str, target: &TargetConfig) -> Screen {
    match runner::compile(target, positive) {
        Ok(outcome) => match outcome.kind {
            OutcomeKind::Crash(kind) => {
                Screen::Discard(format!("issue {}: positive still crashes ({kind})", issue.id))
            }
            _ => Screen::Keep,
        },
        Err(e) => Screen::Discard(format!("infrastructure: {e}")),
    }
}

fn report_text(issue: &IssueRecord, cap: usize) -> String {
    let mut text = format!("{}\n\n{}", issue.title, issue.discussion);
    if text.len() > cap {
        let mut end = cap;
        while !text.is_char_boundary(end) {
            end -= 1;
        }
        text.truncate(end);
    }
    text
}

/// Stage ②: ask for a similar input that does not manifest the bug. Tries
/// the primary model, then up to `derive_retries` fallbacks on malformed
/// output.
pub fn derive_negative(
    issue: &IssueRecord,
    positive: &str,
    stack: &LlmStack,
    cfg: &MinerConfig,
    log: &mut MineLog,
) -> Result<TestCasePair, MinerError> {
    let prompt = fill(
        &cfg.prompts.derive_negative,
        &[
            ("bug_report", report_text(issue, cfg.max_report_chars).as_str()),
            ("bug_revealing_input", positive),
        ],
    );
    let budget = stack.models.len().min(1 + stack.derive_retries);
    let mut last_err = MinerError::MalformedResponse {
        what: "derive-negative".into(),
        detail: "no models configured".into(),
    };
    for model in stack.models.iter().take(budget) {
        log.llm_calls += 1;
        let response = match model.send(&prompt, "derive-negative") {
            Ok(r) => r,
            Err(e) => {
                last_err = e.into();
                continue;
            }
        };
        match parse_derive_response(&response, positive) {
            Ok(pair) => return Ok(pair),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

fn parse_derive_response(response: &str, positive: &str) -> Result<TestCasePair, MinerError> {
    let (description, negative) = script::split_description_and_code(response)?;
    let pair = TestCasePair {
        positive: positive.to_string(),
        negative,
        mutation_description: description,
    };
    pair.validate()?;
    Ok(pair)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Review {
    Accepted,
    /// `manual = false`: the negative failed the automated compile check.
    Rejected { manual: bool, reason: String },
}

/// Stage ③: the negative must compile without crashing, then the human
/// consistency judgment runs (auto-accept in batch mode).
pub fn review_negative(
    pair: &TestCasePair,
    target: &TargetConfig,
    reviewer: &mut dyn Reviewer,
) -> Review {
    match runner::compile(target, &pair.negative) {
        Ok(outcome) => match outcome.kind {
            OutcomeKind::Crash(kind) => {
                return Review::Rejected {
                    manual: false,
                    reason: format!("negative crashes current compiler ({kind})"),
                }
            }
            OutcomeKind::CompileError => {
                return Review::Rejected {
                    manual: false,
                    reason: "negative does not compile".to_string(),
                }
            }
            OutcomeKind::Success => {}
        },
        Err(e) => {
            return Review::Rejected { manual: false, reason: format!("infrastructure: {e}") }
        }
    }
    if reviewer.confirm(pair) {
        Review::Accepted
    } else {
        Review::Rejected { manual: true, reason: "operator rejected the negative".to_string() }
    }
}

fn description_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)<description>(.*?)</description>").unwrap())
}

/// Stage ④a: reverse and de-specialize the mutation description.
pub fn generalize_description(
    description: &str,
    llm: &dyn LlmClient,
    prompts: &PromptSet,
    log: &mut MineLog,
) -> Result<String, MinerError> {
    let prompt = fill(&prompts.generalize, &[("description_to_reverse", description)]);
    log.llm_calls += 1;
    let response = llm.send(&prompt, "generalize-mutation")?;
    let general = description_re()
        .captures(&response)
        .map(|c| c.get(1).unwrap().as_str().trim().to_string())
        .ok_or_else(|| MinerError::MalformedResponse {
            what: "generalize".into(),
            detail: "missing <description> tags".into(),
        })?;
    if general.is_empty() {
        return Err(MinerError::MalformedResponse {
            what: "generalize".into(),
            detail: "empty description".into(),
        });
    }
    Ok(general)
}

fn parse_test_pairs(response: &str, n: usize) -> Result<Vec<GeneratedTest>, MinerError> {
    let mut tests = Vec::with_capacity(n);
    for k in 1..=n {
        let input_re = Regex::new(&format!(r"(?s)<input{k}>(.*?)</input{k}>")).unwrap();
        let output_re = Regex::new(&format!(r"(?s)<output{k}>(.*?)</output{k}>")).unwrap();
        let input = input_re.captures(response).map(|c| c.get(1).unwrap().as_str().trim().to_string());
        let output = output_re.captures(response).map(|c| c.get(1).unwrap().as_str().trim().to_string());
        match (input, output) {
            (Some(input), Some(output)) => {
                if normalize_for_compare(&input) == normalize_for_compare(&output) {
                    return Err(MinerError::DegeneratePair);
                }
                tests.push(GeneratedTest { input, expected_output: output });
            }
            _ => {
                return Err(MinerError::MalformedResponse {
                    what: "generate-tests".into(),
                    detail: format!("missing <input{k}>/<output{k}> pair"),
                })
            }
        }
    }
    Ok(tests)
}

/// Stage ④b: generate `n` fresh input/output pairs validating the general
/// rule. A degenerate pair triggers one regeneration before failing.
pub fn generate_tests(
    generalized: &str,
    llm: &dyn LlmClient,
    prompts: &PromptSet,
    n: usize,
    log: &mut MineLog,
) -> Result<Vec<GeneratedTest>, MinerError> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let prompt = fill(&prompts.generate_tests, &[("generalized_description", generalized)]);
    log.llm_calls += 1;
    let response = llm.send(&prompt, "generate-tests")?;
    match parse_test_pairs(&response, n) {
        Err(MinerError::DegeneratePair) => {
            log.llm_calls += 1;
            let retry = llm.send(&prompt, "generate-tests")?;
            parse_test_pairs(&retry, n)
        }
        other => other,
    }
}

/// Stage ④c: synthesize the bash script and assemble the candidate with its
/// four tests (three generated plus the original pair, negative in,
/// positive out).
pub fn create_script(
    generalized: &str,
    original: &TestCasePair,
    generated: Vec<GeneratedTest>,
    llm: &dyn LlmClient,
    prompts: &PromptSet,
    log: &mut MineLog,
) -> Result<CandidateMutator, MinerError> {
    let prompt = fill(
        &prompts.create_script,
        &[
            ("generalized_description", generalized),
            ("negative_input", original.negative.as_str()),
            ("positive_input", original.positive.as_str()),
            ("example_script", prompts.example_script.as_str()),
        ],
    );
    log.llm_calls += 1;
    let response = llm.send(&prompt, "create-script")?;
    let script_text = script::parse_code_block(&response)?;
    let lifted = script::lift_script(&script_text);
    let mut tests = generated;
    tests.push(GeneratedTest {
        input: original.negative.clone(),
        expected_output: original.positive.clone(),
    });
    debug_assert_eq!(tests.len() - 1, ORIGINAL_TEST_INDEX);
    Ok(CandidateMutator {
        generalized_description: generalized.to_string(),
        script_text,
        script: lifted,
        tests,
        refinement_count: 0,
    })
}

/// Stage ④d: one refinement round. Requires an Error or Wrong outcome and
/// budget left.
pub fn refine_mutator(
    candidate: &CandidateMutator,
    outcome: &ValidationOutcome,
    llm: &dyn LlmClient,
    prompts: &PromptSet,
    max_refinements: u32,
    log: &mut MineLog,
) -> Result<CandidateMutator, MinerError> {
    debug_assert!(matches!(outcome.tag, OutcomeTag::Error | OutcomeTag::Wrong));
    if candidate.refinement_count >= max_refinements {
        return Err(MinerError::RefinementBudgetExhausted);
    }
    let test_context = candidate
        .tests
        .iter()
        .enumerate()
        .map(|(i, t)| format!("test {}:\ninput:\n{}\nexpected output:\n{}", i + 1, t.input, t.expected_output))
        .collect::<Vec<_>>()
        .join("\n\n");
    let prompt = fill(
        &prompts.refine,
        &[
            ("mutation_description", candidate.generalized_description.as_str()),
            ("refinement_context", outcome.diagnostics.as_str()),
            ("test_case_context", test_context.as_str()),
            ("mutator_bash_script", candidate.script_text.as_str()),
        ],
    );
    log.llm_calls += 1;
    log.refinements += 1;
    let response = llm.send(&prompt, "refine-mutator")?;
    let script_text = script::parse_code_block(&response)?;
    let lifted = script::lift_script(&script_text);
    Ok(CandidateMutator {
        generalized_description: candidate.generalized_description.clone(),
        script_text,
        script: lifted,
        tests: candidate.tests.clone(),
        refinement_count: candidate.refinement_count + 1,
    })
}

fn fresh_id(registry: &MutatorRegistry, issue: &IssueRecord) -> String {
    let base = format!("{}-{}", issue.compiler.name(), issue.id);
    if registry.get(&base).is_none() {
        return base;
    }
    let mut n = 2;
    loop {
        let id = format!("{base}-{n}");
        if registry.get(&id).is_none() {
            return id;
        }
        n += 1;
    }
}

/// Orchestrate the full four-stage workflow for one issue. On success the
/// mutator is appended to `registry` with the issue id as provenance.
pub fn mine_issue(
    issue: &IssueRecord,
    target: &TargetConfig,
    stack: &LlmStack,
    reviewer: &mut dyn Reviewer,
    registry: &mut MutatorRegistry,
    cfg: &MinerConfig,
) -> MineReport {
    let mut log = MineLog::default();
    let rejected = |stage: Stage, reason: String, log: MineLog| MineReport {
        issue_id: issue.id.clone(),
        result: MineResult::Rejected { stage, reason },
        log,
    };

    // ① extract + screen
    let Some(positive) = extract_positive(issue) else {
        return rejected(Stage::Extract, MinerError::NoInput.to_string(), log);
    };
    if let Screen::Discard(reason) = screen_fixed(issue, &positive, target) {
        return rejected(Stage::Screen, reason, log);
    }

    // ② derive negative
    let pair = match derive_negative(issue, &positive, stack, cfg, &mut log) {
        Ok(pair) => pair,
        Err(e) => return rejected(Stage::DeriveNegative, e.to_string(), log),
    };

    // ③ review negative
    if let Review::Rejected { manual, reason } = review_negative(&pair, target, reviewer) {
        let reason = if manual { format!("manual: {reason}") } else { format!("auto: {reason}") };
        return rejected(Stage::ReviewNegative, reason, log);
    }

    // ④ generalize / generate / create / validate / refine
    let llm = stack.primary();
    let generalized = match generalize_description(&pair.mutation_description, llm, &cfg.prompts, &mut log) {
        Ok(g) => g,
        Err(e) => return rejected(Stage::Generate, e.to_string(), log),
    };
    let generated = match generate_tests(&generalized, llm, &cfg.prompts, cfg.generated_tests, &mut log) {
        Ok(t) => t,
        Err(e) => return rejected(Stage::Generate, e.to_string(), log),
    };
    let mut candidate =
        match create_script(&generalized, &pair, generated, llm, &cfg.prompts, &mut log) {
            Ok(c) => c,
            Err(e) => return rejected(Stage::Generate, e.to_string(), log),
        };

    loop {
        let outcome = validate_mutator(&candidate, cfg.script_timeout);
        log.validations.push((outcome.tag, outcome.passed));
        if outcome.tag.is_reportable() {
            if !outcome.original_passed {
                return rejected(
                    Stage::Generate,
                    "validation passed without reproducing the original pair".to_string(),
                    log,
                );
            }
            let id = fresh_id(registry, issue);
            let mutator = match candidate.into_mutator(&id, &issue.id, &cfg.script_dir) {
                Ok(m) => m,
                Err(e) => return rejected(Stage::Generate, e.to_string(), log),
            };
            registry.push(mutator.clone()).expect("fresh id");
            return MineReport { issue_id: issue.id.clone(), result: MineResult::Mined(mutator), log };
        }
        match refine_mutator(&candidate, &outcome, llm, &cfg.prompts, cfg.max_refinements, &mut log) {
            Ok(next) => candidate = next,
            Err(e) => return rejected(Stage::Generate, e.to_string(), log),
        }
    }
}
