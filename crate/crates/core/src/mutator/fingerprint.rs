//! Behavioral fingerprints and duplicate elimination.
//!
//! Two mutators are behavioral duplicates when they produce identical output
//! on every element of a representative input sample. The fingerprint is a
//! SHA-256 over the per-input mutated outputs with index and length framing,
//! so output boundaries cannot alias.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

use super::{Mutator, MutatorRegistry};

/// One sample input, identified by its (relative) path.
#[derive(Debug, Clone)]
pub struct SampleInput {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutatorFingerprint {
    /// Hex SHA-256 over the framed per-input outputs.
    pub digest: String,
    pub sample_size: usize,
    /// Hex SHA-256 of the ordered sample name list.
    pub sample_manifest_digest: String,
}

/// Load a sample from a directory, ordered lexicographically by file name.
pub fn sample_from_dir(dir: &std::path::Path) -> std::io::Result<Vec<SampleInput>> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .map(|e| e.path())
        .collect();
    entries.sort();
    let mut sample = Vec::with_capacity(entries.len());
    for path in entries {
        let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let contents = std::fs::read_to_string(&path)?;
        sample.push(SampleInput { name, contents });
    }
    Ok(sample)
}

fn frame(hasher: &mut Sha256, index: u64, bytes: &[u8]) {
    hasher.update(index.to_le_bytes());
    hasher.update((bytes.len() as u64).to_le_bytes());
    hasher.update(bytes);
}

/// Per-input mutation seed. Depends only on the campaign seed and the input
/// index, never on the mutator, so extensionally equal mutators collide.
fn input_seed(rng_seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = rng_seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const PLUGIN_FAILURE_SENTINEL: &[u8] = b"\x00<plugin-failure>\x00";

/// Fingerprint one mutator against an ordered sample.
pub fn fingerprint_mutator(
    mutator: &Mutator,
    sample: &[SampleInput],
    rng_seed: u64,
) -> MutatorFingerprint {
    let scratch = tempfile::tempdir().ok();
    let mut hasher = Sha256::new();
    for (i, input) in sample.iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(input_seed(rng_seed, i as u64));
        let scratch_path = scratch.as_ref().map(|d| d.path());
        match mutator.apply(&input.contents, &mut rng, scratch_path) {
            Ok(result) => frame(&mut hasher, i as u64, result.output.as_bytes()),
            Err(_) => frame(&mut hasher, i as u64, PLUGIN_FAILURE_SENTINEL),
        }
    }
    let digest = hex::encode(hasher.finalize());

    let mut manifest = Sha256::new();
    for (i, input) in sample.iter().enumerate() {
        frame(&mut manifest, i as u64, input.name.as_bytes());
    }
    MutatorFingerprint {
        digest,
        sample_size: sample.len(),
        sample_manifest_digest: hex::encode(manifest.finalize()),
    }
}

/// Keep the first mutator (registry order) for each behavioral fingerprint,
/// dropping later collisions. Returns the surviving registry and the
/// (kept-id, dropped-id) pairs.
pub fn dedup_mutators(
    registry: &MutatorRegistry,
    sample: &[SampleInput],
    rng_seed: u64,
) -> (MutatorRegistry, Vec<(String, String)>) {
    let mut survivors = MutatorRegistry::new();
    let mut by_digest: std::collections::HashMap<String, String> = std::collections::HashMap::new();
    let mut dropped = Vec::new();
    for mutator in registry.iter() {
        let fp = fingerprint_mutator(mutator, sample, rng_seed);
        match by_digest.get(&fp.digest) {
            Some(kept) => dropped.push((kept.clone(), mutator.id().to_string())),
            None => {
                by_digest.insert(fp.digest, mutator.id().to_string());
                survivors
                    .push(mutator.clone())
                    .expect("ids unique in source registry");
            }
        }
    }
    if let Some(ids) = registry.successful_only() {
        let retained: std::collections::BTreeSet<String> = ids
            .iter()
            .filter(|id| survivors.get(id).is_some())
            .cloned()
            .collect();
        if !retained.is_empty() {
            survivors.restrict(retained).expect("retained ids exist");
        }
    }
    (survivors, dropped)
}
