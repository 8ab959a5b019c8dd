//! Mining compiler-fuzzing mutators from bug histories, and fuzzing with them.
//!
//! The pipeline has three legs:
//!
//! 1. **Mine** ([`miner`]): turn fixed-and-closed bug reports into small,
//!    generalized rewrite rules. A report's bug-triggering input (the
//!    *positive* test case) is paired with an LLM-derived non-triggering
//!    variant (the *negative*); a create/validate/refine agent loop then
//!    produces a mutator that rewrites the negative back into the positive
//!    and generalizes beyond the original pair.
//! 2. **Fuzz** ([`fuzz`]): a coverage-guided mutational loop that applies the
//!    mined mutators to a seed corpus, keeps mutants that reach new coverage,
//!    and records compiler crashes.
//! 3. **Triage** ([`triage`]): stack-trace based crash deduplication (top two
//!    non-helper frames), mutation-chain minimization, module classification,
//!    and campaign statistics.
//!
//! [`mutator`] holds the transformation engine itself and [`runner`] the
//! sandboxed compiler invocation and outcome classification shared by all
//! three legs.

pub mod bundled;
pub mod fuzz;
pub mod miner;
pub mod mutator;
pub mod runner;
pub mod textfmt;
pub mod triage;
