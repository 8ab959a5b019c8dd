//! A-posteriori mutation-chain minimization.
//!
//! Replays subsequences of a crash's chain from its originating seed and
//! searches (ddmin) for a 1-minimal subsequence that still crashes with the
//! same dedup key. All size-1 reproducing subsequences are enumerated as
//! well: a crash reproducible by mutator A alone or mutator B alone credits
//! both.

use std::collections::HashMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::fuzz::{ChainStep, CrashEvent};
use crate::mutator::MutatorRegistry;
use crate::runner::{compile, parse_stack_trace, OutcomeKind, TargetConfig, TraceDialect};

use super::group::event_key;
use super::key::{dedup_key, DedupKey};

#[derive(Debug, Clone)]
pub struct MinimizedChain {
    pub original: Vec<ChainStep>,
    /// Subsequence of `original`; equals it when verification failed.
    pub minimal: Vec<ChainStep>,
    /// True iff replaying `minimal` reproduces a crash with the same key.
    pub verified: bool,
    /// Every single step that reproduces the crash alone.
    pub singletons: Vec<ChainStep>,
    /// Replay compile invocations spent.
    pub replays: u64,
    /// Why verification failed, when it did.
    pub failure: Option<String>,
}

/// Everything replay needs.
pub struct ReplayContext<'a> {
    pub registry: &'a MutatorRegistry,
    pub target: &'a TargetConfig,
    pub helpers: &'a [String],
    /// Campaign directory; origin seed paths are relative to it.
    pub root: &'a Path,
}

impl ReplayContext<'_> {
    /// Apply `steps` to the origin seed and compile. Returns the crash key
    /// when the result crashes, `Ok(None)` otherwise.
    pub fn replay(&self, origin_seed: &str, steps: &[&ChainStep]) -> Result<Option<DedupKey>, String> {
        let seed_path = self.root.join(origin_seed);
        let mut source = std::fs::read_to_string(&seed_path)
            .map_err(|e| format!("{}: {e}", seed_path.display()))?;
        for step in steps {
            let mutator = self
                .registry
                .get(&step.mutator_id)
                .ok_or_else(|| format!("mutator {} not in registry", step.mutator_id))?;
            let mut rng = ChaCha12Rng::seed_from_u64(step.rng_seed);
            let result = mutator
                .apply(&source, &mut rng, None)
                .map_err(|e| format!("replay apply: {e}"))?;
            source = result.output;
        }
        let outcome = compile(self.target, &source).map_err(|e| format!("replay compile: {e}"))?;
        match outcome.kind {
            OutcomeKind::Crash(kind) => {
                let trace = parse_stack_trace(&outcome.stderr, TraceDialect::Generic);
                Ok(Some(dedup_key(&trace, self.helpers, kind)))
            }
            _ => Ok(None),
        }
    }
}

/// Zeller-style ddmin over subsequences. `test` must be true for the full
/// sequence; the result is 1-minimal with respect to `test`.
pub fn ddmin<T: Clone, F: FnMut(&[T]) -> bool>(items: &[T], mut test: F) -> Vec<T> {
    let mut current: Vec<T> = items.to_vec();
    if current.len() <= 1 {
        return current;
    }
    let mut granularity = 2usize;
    loop {
        let chunk_size = current.len().div_ceil(granularity);
        let chunks: Vec<Vec<T>> = current.chunks(chunk_size).map(<[T]>::to_vec).collect();
        let mut reduced = false;

        for chunk in &chunks {
            if chunk.len() < current.len() && test(chunk) {
                current = chunk.clone();
                granularity = 2;
                reduced = true;
                break;
            }
        }
        if !reduced && granularity > 2 {
            for skip in 0..chunks.len() {
                let complement: Vec<T> = chunks
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != skip)
                    .flat_map(|(_, c)| c.iter().cloned())
                    .collect();
                if !complement.is_empty() && complement.len() < current.len() && test(&complement) {
                    current = complement;
                    granularity = (granularity - 1).max(2);
                    reduced = true;
                    break;
                }
            }
        }
        if !reduced {
            if granularity >= current.len() {
                break;
            }
            granularity = (granularity * 2).min(current.len());
        }
        if current.len() <= 1 {
            break;
        }
    }
    current
}

/// Minimize one crash's chain. Non-reproducible events come back
/// `verified = false` with the original chain (replay divergence is
/// reported, not fatal).
pub fn minimize_chain(event: &CrashEvent, ctx: &ReplayContext) -> MinimizedChain {
    let original = event.chain.clone();
    let reference = event_key(event, ctx.helpers);
    let mut replays: u64 = 0;
    let mut cache: HashMap<Vec<usize>, bool> = HashMap::new();
    let mut failure: Option<String> = None;

    // Test on index subsets so caching is exact.
    let indices: Vec<usize> = (0..original.len()).collect();
    let mut test_indices = |subset: &[usize], replays: &mut u64, failure: &mut Option<String>| -> bool {
        if let Some(&hit) = cache.get(subset) {
            return hit;
        }
        let steps: Vec<&ChainStep> = subset.iter().map(|&i| &original[i]).collect();
        let result = match ctx.replay(&event.origin_seed, &steps) {
            Ok(Some(key)) => key == reference,
            Ok(None) => false,
            Err(e) => {
                if failure.is_none() {
                    *failure = Some(e);
                }
                false
            }
        };
        *replays += 1;
        cache.insert(subset.to_vec(), result);
        result
    };

    if original.is_empty() || !test_indices(&indices, &mut replays, &mut failure) {
        let failure = Some(failure.unwrap_or_else(|| {
            "replay divergence: full chain no longer reproduces the crash".to_string()
        }));
        return MinimizedChain {
            minimal: original.clone(),
            original,
            verified: false,
            singletons: Vec::new(),
            replays,
            failure,
        };
    }

    let minimal_idx = ddmin(&indices, |subset| test_indices(subset, &mut replays, &mut failure));

    let mut singletons = Vec::new();
    for &i in &indices {
        if test_indices(&[i], &mut replays, &mut failure) {
            singletons.push(original[i].clone());
        }
    }

    MinimizedChain {
        minimal: minimal_idx.iter().map(|&i| original[i].clone()).collect(),
        original,
        verified: true,
        singletons,
        replays,
        failure: None,
    }
}
