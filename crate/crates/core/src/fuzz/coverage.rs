//! Coverage feedback: keep a mutant only when it exercises something new.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::runner::RunOutcome;

/// Coverage signature of one run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature(pub BTreeSet<String>);

/// Observes run artifacts and tracks the global coverage map.
///
/// `is_new` is monotone: once a signature has been reported new (and folded
/// into the map), it is never new again.
pub trait CoverageProvider: Send {
    fn observe(&self, outcome: &RunOutcome, scratch: &Path) -> Signature;
    /// True iff the signature contains anything unseen; folds it in.
    fn is_new(&mut self, signature: &Signature) -> bool;
    /// Size of the global map.
    fn size(&self) -> usize;
    fn snapshot(&self) -> Vec<String>;
    fn restore(&mut self, items: Vec<String>);
}

/// Which shipped provider a campaign uses (kept for state persistence).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverageSpec {
    /// Parse `[cov] <token>` lines from target stdout.
    Token,
    /// Read an edge-count dump the target wrote at this scratch-relative
    /// path (`edge-id count` per line; count 0 lines ignored).
    EdgeFile(String),
}

impl CoverageSpec {
    pub fn build(&self) -> Box<dyn CoverageProvider> {
        match self {
            CoverageSpec::Token => Box::new(TokenCoverage::default()),
            CoverageSpec::EdgeFile(rel) => Box::new(EdgeFileCoverage::new(rel)),
        }
    }

    pub fn name(&self) -> String {
        match self {
            CoverageSpec::Token => "token".to_string(),
            CoverageSpec::EdgeFile(rel) => format!("edge:{rel}"),
        }
    }

    pub fn parse_name(name: &str) -> Option<CoverageSpec> {
        if name == "token" {
            return Some(CoverageSpec::Token);
        }
        name.strip_prefix("edge:").map(|rel| CoverageSpec::EdgeFile(rel.to_string()))
    }
}

const COV_PREFIX: &str = "[cov] ";

/// Branch-token coverage echoed by the fixture compiler on stdout.
#[derive(Debug, Default)]
pub struct TokenCoverage {
    seen: BTreeSet<String>,
}

impl CoverageProvider for TokenCoverage {
    fn observe(&self, outcome: &RunOutcome, _scratch: &Path) -> Signature {
        let tokens = outcome
            .stdout
            .lines()
            .filter_map(|l| l.strip_prefix(COV_PREFIX))
            .map(|t| t.trim().to_string())
            .filter(|t| !t.is_empty())
            .collect();
        Signature(tokens)
    }

    fn is_new(&mut self, signature: &Signature) -> bool {
        let mut new = false;
        for token in &signature.0 {
            if self.seen.insert(token.clone()) {
                new = true;
            }
        }
        new
    }

    fn size(&self) -> usize {
        self.seen.len()
    }

    fn snapshot(&self) -> Vec<String> {
        self.seen.iter().cloned().collect()
    }

    fn restore(&mut self, items: Vec<String>) {
        self.seen = items.into_iter().collect();
    }
}

/// Edge-count dumps (gcov/profile style exports) written by the target next
/// to the input file.
#[derive(Debug)]
pub struct EdgeFileCoverage {
    rel_path: PathBuf,
    seen: BTreeSet<String>,
}

impl EdgeFileCoverage {
    pub fn new(rel_path: impl Into<PathBuf>) -> Self {
        EdgeFileCoverage { rel_path: rel_path.into(), seen: BTreeSet::new() }
    }
}

impl CoverageProvider for EdgeFileCoverage {
    fn observe(&self, _outcome: &RunOutcome, scratch: &Path) -> Signature {
        let path = scratch.join(&self.rel_path);
        let mut edges = BTreeSet::new();
        if let Ok(text) = std::fs::read_to_string(&path) {
            for line in text.lines() {
                let mut parts = line.split_whitespace();
                let (Some(edge), count) = (parts.next(), parts.next()) else { continue };
                let hit = count.map_or(true, |c| c.parse::<u64>().map_or(false, |n| n > 0));
                if hit {
                    edges.insert(edge.to_string());
                }
            }
        }
        Signature(edges)
    }

    fn is_new(&mut self, signature: &Signature) -> bool {
        let mut new = false;
        for edge in &signature.0 {
            if self.seen.insert(edge.clone()) {
                new = true;
            }
        }
        new
    }

    fn size(&self) -> usize {
        self.seen.len()
    }

    fn snapshot(&self) -> Vec<String> {
        self.seen.iter().cloned().collect()
    }

    fn restore(&mut self, items: Vec<String>) {
        self.seen = items.into_iter().collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::{ExitInfo, OutcomeKind};
    use std::time::Duration;

    fn outcome_with_stdout(stdout: &str) -> RunOutcome {
        RunOutcome {
            kind: OutcomeKind::Success,
            exit: ExitInfo::Code(0),
            duration: Duration::from_millis(1),
            stdout: stdout.to_string(),
            stderr: String::new(),
            stacktrace: None,
        }
    }

    #[test]
    fn token_coverage_reads_cov_lines() {
        let cov = TokenCoverage::default();
        let sig = cov.observe(
            &outcome_with_stdout("[cov] kw:extern\nnoise\n[cov] BRANCH_A\n"),
            Path::new("/tmp"),
        );
        assert_eq!(sig.0.len(), 2);
        assert!(sig.0.contains("BRANCH_A"));
    }

    #[test]
    fn is_new_is_monotone() {
        let mut cov = TokenCoverage::default();
        let a = Signature(BTreeSet::from(["x".to_string(), "y".to_string()]));
        assert!(cov.is_new(&a));
        assert!(!cov.is_new(&a), "a signature reported new is never new again");
        let partial = Signature(BTreeSet::from(["y".to_string()]));
        assert!(!cov.is_new(&partial));
        let superset = Signature(BTreeSet::from(["y".to_string(), "z".to_string()]));
        assert!(cov.is_new(&superset));
        assert_eq!(cov.size(), 3);
    }

    #[test]
    fn snapshot_restores() {
        let mut cov = TokenCoverage::default();
        cov.is_new(&Signature(BTreeSet::from(["a".to_string(), "b".to_string()])));
        let snap = cov.snapshot();
        let mut again = TokenCoverage::default();
        again.restore(snap);
        assert_eq!(again.size(), 2);
        assert!(!again.is_new(&Signature(BTreeSet::from(["a".to_string()]))));
    }

    #[test]
    fn edge_file_coverage_reads_dump() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("edges.out"), "e1 3\ne2 0\ne3 1\nbare\n").unwrap();
        let cov = EdgeFileCoverage::new("edges.out");
        let sig = cov.observe(&outcome_with_stdout(""), dir.path());
        assert!(sig.0.contains("e1"));
        assert!(!sig.0.contains("e2"), "zero-count edges are not hits");
        assert!(sig.0.contains("e3"));
        assert!(sig.0.contains("bare"), "count-less lines are hits");
        // missing dump is an empty signature
        let none = cov.observe(&outcome_with_stdout(""), Path::new("/nonexistent"));
        assert!(none.0.is_empty());
    }

    #[test]
    fn spec_round_trips() {
        for spec in [CoverageSpec::Token, CoverageSpec::EdgeFile("cov.out".into())] {
            assert_eq!(CoverageSpec::parse_name(&spec.name()), Some(spec.clone()));
        }
        assert_eq!(CoverageSpec::parse_name("bogus"), None);
    }
}
