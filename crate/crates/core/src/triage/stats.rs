//! Campaign statistics: bugs-per-mutator, chain-length histograms,
//! action/element distributions, and cross-campaign Venn regions.

use std::collections::{BTreeMap, BTreeSet};

use crate::mutator::MutatorRegistry;

use super::group::CrashGroup;
use super::minimize::MinimizedChain;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MutatorStats {
    /// Distinct crash groups credited to each mutator.
    pub bugs_by_mutator: BTreeMap<String, u64>,
    /// #bugs -> #mutators revealing exactly that many.
    pub bugs_histogram: BTreeMap<u64, u64>,
    /// Minimized chain length -> #crash groups.
    pub chain_length_histogram: BTreeMap<usize, u64>,
    /// Action name -> #successful mutators.
    pub action_distribution: BTreeMap<String, u64>,
    /// Element name -> #successful mutators.
    pub element_distribution: BTreeMap<String, u64>,
}

/// Credit mutators with the crash groups their minimized chains touch.
///
/// A group whose minimal chain has length 1 credits every mutator with a
/// reproducing singleton (disjunctive: reproducible by A alone or B alone
/// credits both). Longer minimal chains credit their members conjunctively.
/// `minimized` is aligned with `groups` (one per representative).
pub fn mutator_stats(
    groups: &[CrashGroup],
    minimized: &[MinimizedChain],
    registry: &MutatorRegistry,
) -> MutatorStats {
    assert_eq!(groups.len(), minimized.len(), "one minimized chain per group");
    let mut stats = MutatorStats::default();

    for chain in minimized {
        *stats.chain_length_histogram.entry(chain.minimal.len()).or_insert(0) += 1;
        let credited: BTreeSet<&str> = if chain.verified && chain.minimal.len() == 1 {
            chain.singletons.iter().map(|s| s.mutator_id.as_str()).collect()
        } else {
            chain.minimal.iter().map(|s| s.mutator_id.as_str()).collect()
        };
        for id in credited {
            *stats.bugs_by_mutator.entry(id.to_string()).or_insert(0) += 1;
        }
    }

    for &bugs in stats.bugs_by_mutator.values() {
        *stats.bugs_histogram.entry(bugs).or_insert(0) += 1;
    }

    for id in stats.bugs_by_mutator.keys() {
        if let Some(mutator) = registry.get(id) {
            *stats.action_distribution.entry(mutator.action().name().to_string()).or_insert(0) += 1;
            for element in mutator.elements() {
                *stats.element_distribution.entry(element.name().to_string()).or_insert(0) += 1;
            }
        }
    }
    stats
}

/// One region of the Venn decomposition: keys found by exactly `members`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VennRegion {
    pub members: Vec<String>,
    pub count: u64,
}

/// All region cardinalities of the key-set Venn decomposition, smallest
/// member sets first. Region counts sum to |union of all keys|.
pub fn diff_campaigns(sets: &BTreeMap<String, BTreeSet<String>>) -> Vec<VennRegion> {
    let names: Vec<&String> = sets.keys().collect();
    let mut union: BTreeSet<&String> = BTreeSet::new();
    for keys in sets.values() {
        union.extend(keys.iter());
    }
    let mut counts: BTreeMap<Vec<String>, u64> = BTreeMap::new();
    for key in union {
        let members: Vec<String> = names
            .iter()
            .filter(|name| sets[**name].contains(key))
            .map(|name| (*name).clone())
            .collect();
        *counts.entry(members).or_insert(0) += 1;
    }
    // Emit every non-empty subset, zero counts included, size then name
    // order.
    let mut regions = Vec::new();
    let n = names.len();
    for mask in 1u32..(1 << n) {
        let members: Vec<String> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| names[i].clone())
            .collect();
        let count = counts.get(&members).copied().unwrap_or(0);
        regions.push(VennRegion { members, count });
    }
    regions.sort_by(|a, b| a.members.len().cmp(&b.members.len()).then_with(|| a.members.cmp(&b.members)));
    regions
}
