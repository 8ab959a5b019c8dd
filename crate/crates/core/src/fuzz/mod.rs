//! Coverage-guided mutational fuzzing campaigns.

pub mod campaign;
pub mod coverage;
pub mod queue;

pub use campaign::{
    init_campaign, load_crash_events, resume, Campaign, CampaignConfig, CampaignReport, Counters,
    CrashEvent, StepError, StepResult,
};
pub use coverage::{CoverageProvider, CoverageSpec, EdgeFileCoverage, Signature, TokenCoverage};
pub use queue::{ChainStep, QueueEntry};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FuzzError {
    #[error("seed corpus {0} has no readable files")]
    EmptyCorpus(String),
    #[error("corrupt campaign state: {0}")]
    CorruptState(String),
    #[error("campaign io: {0}")]
    Io(String),
    #[error(transparent)]
    Mutator(#[from] crate::mutator::MutatorError),
    #[error(transparent)]
    Runner(#[from] crate::runner::RunnerError),
}
