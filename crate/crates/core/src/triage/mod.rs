//! Crash triage: dedup keys, grouping, chain minimization, module
//! classification, and campaign statistics.

pub mod group;
pub mod key;
pub mod minimize;
pub mod modules;
pub mod report;
pub mod stats;

pub use group::{event_key, group_crashes, CrashGroup};
pub use key::{dedup_key, DedupKey, FrameId};
pub use minimize::{ddmin, minimize_chain, MinimizedChain, ReplayContext};
pub use modules::{classify_module, ClassifierTable, ModuleClass};
pub use stats::{diff_campaigns, mutator_stats, MutatorStats, VennRegion};
