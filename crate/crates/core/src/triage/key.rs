//! Crash identity: the two innermost non-helper stack frames.

use crate::runner::{CrashKind, StackTrace};

/// One frame's identity inside a dedup key: symbolic name plus its source
/// location or raw program counter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrameId {
    pub function: String,
    pub location: String,
}

impl std::fmt::Display for FrameId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.location.is_empty() {
            write!(f, "{}", self.function)
        } else {
            write!(f, "{}@{}", self.function, self.location)
        }
    }
}

/// Dedup identity of one crash.
///
/// Changes strictly below the second surviving frame never affect the key;
/// helper frames never enter it. Traces with fewer than two usable frames
/// fall back to a partial pair or, with no frames at all, to a sentinel
/// derived from the crash kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DedupKey {
    Frames { first: FrameId, second: Option<FrameId> },
    KindSentinel(CrashKind),
}

impl std::fmt::Display for DedupKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DedupKey::Frames { first, second } => match second {
                Some(second) => write!(f, "({first}, {second})"),
                None => write!(f, "({first}, -)"),
            },
            DedupKey::KindSentinel(kind) => write!(f, "(no-trace:{kind})"),
        }
    }
}

impl DedupKey {
    /// Function names of the key frames, for reporting.
    pub fn functions(&self) -> Vec<&str> {
        match self {
            DedupKey::Frames { first, second } => {
                let mut v = vec![first.function.as_str()];
                if let Some(s) = second {
                    v.push(s.function.as_str());
                }
                v
            }
            DedupKey::KindSentinel(_) => Vec::new(),
        }
    }
}

/// Compute the dedup key for a crash trace. `helpers` are substrings; any
/// frame whose function name contains one is diagnostic plumbing and is
/// skipped.
pub fn dedup_key(trace: &StackTrace, helpers: &[String], kind: CrashKind) -> DedupKey {
    let mut survivors = trace
        .frames
        .iter()
        .filter(|f| !helpers.iter().any(|h| f.function.contains(h.as_str())));
    let first = survivors.next();
    let second = survivors.next();
    match (first, second) {
        (None, _) => DedupKey::KindSentinel(kind),
        (Some(f1), f2) => DedupKey::Frames {
            first: FrameId { function: f1.function.clone(), location: f1.location.clone() },
            second: f2.map(|f| FrameId { function: f.function.clone(), location: f.location.clone() }),
        },
    }
}
