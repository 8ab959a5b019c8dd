//! Corpus queue entries and their mutation chains.

use crate::textfmt::{self, Stanza};

use super::FuzzError;

/// One applied mutation: enough to replay it deterministically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainStep {
    pub mutator_id: String,
    /// Chosen match site for random-site rules.
    pub site: Option<usize>,
    /// Seed of the RNG handed to the mutator.
    pub rng_seed: u64,
}

/// A corpus item: its text and the chain that produced it from its seed.
#[derive(Debug, Clone)]
pub struct QueueEntry {
    pub id: u64,
    pub source: String,
    /// Empty for seed-corpus entries; grows by exactly one per enqueued
    /// mutant.
    pub chain: Vec<ChainStep>,
    /// Campaign-relative path of the originating seed.
    pub origin_seed: String,
    /// Execution counter at enqueue time.
    pub added_at: u64,
}

pub fn chain_to_stanzas(chain: &[ChainStep]) -> Vec<Stanza> {
    chain
        .iter()
        .map(|step| {
            let mut s = Stanza::new("step");
            s.push("mutator", &step.mutator_id);
            s.push("site", step.site.map_or("-".to_string(), |v| v.to_string()));
            s.push("seed", format!("{:#x}", step.rng_seed));
            s
        })
        .collect()
}

pub fn chain_from_stanzas(stanzas: &[Stanza]) -> Result<Vec<ChainStep>, FuzzError> {
    let mut chain = Vec::new();
    for stanza in stanzas.iter().filter(|s| s.name == "step") {
        let mutator_id = stanza
            .get("mutator")
            .ok_or_else(|| FuzzError::CorruptState("step without mutator".into()))?
            .to_string();
        let site = match stanza.get("site") {
            None | Some("-") => None,
            Some(v) => Some(v.parse::<usize>().map_err(|_| {
                FuzzError::CorruptState(format!("bad site {v:?}"))
            })?),
        };
        let seed_text = stanza
            .get("seed")
            .ok_or_else(|| FuzzError::CorruptState("step without seed".into()))?;
        let rng_seed = parse_u64_hex(seed_text)?;
        chain.push(ChainStep { mutator_id, site, rng_seed });
    }
    Ok(chain)
}

pub fn parse_u64_hex(text: &str) -> Result<u64, FuzzError> {
    let digits = text.strip_prefix("0x").unwrap_or(text);
    u64::from_str_radix(digits, 16)
        .map_err(|_| FuzzError::CorruptState(format!("bad hex integer {text:?}")))
}

impl QueueEntry {
    /// Sidecar metadata written next to an enqueued mutant.
    pub fn meta_text(&self) -> String {
        let mut stanzas = Vec::new();
        let mut head = Stanza::new("");
        head.push("id", self.id.to_string());
        head.push("origin_seed", &self.origin_seed);
        head.push("added_at", self.added_at.to_string());
        stanzas.push(head);
        stanzas.extend(chain_to_stanzas(&self.chain));
        textfmt::render(&stanzas)
    }

    pub fn from_meta(meta: &str, source: String) -> Result<QueueEntry, FuzzError> {
        let stanzas = textfmt::parse(meta).map_err(|e| FuzzError::CorruptState(e.to_string()))?;
        let head = stanzas
            .first()
            .filter(|s| s.name.is_empty())
            .ok_or_else(|| FuzzError::CorruptState("meta missing header fields".into()))?;
        let id = head
            .get("id")
            .and_then(|v| v.parse::<u64>().ok())
            .ok_or_else(|| FuzzError::CorruptState("meta missing id".into()))?;
        let origin_seed = head
            .get("origin_seed")
            .ok_or_else(|| FuzzError::CorruptState("meta missing origin_seed".into()))?
            .to_string();
        let added_at = head
            .get("added_at")
            .and_then(|v| v.parse::<u64>().ok())
            .ok_or_else(|| FuzzError::CorruptState("meta missing added_at".into()))?;
        let chain = chain_from_stanzas(&stanzas)?;
        Ok(QueueEntry { id, source, chain, origin_seed, added_at })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meta_round_trips() {
        let entry = QueueEntry {
            id: 42,
            source: "int x;".into(),
            chain: vec![
                ChainStep { mutator_id: "M3".into(), site: Some(1), rng_seed: 0xdead_beef },
                ChainStep { mutator_id: "M9".into(), site: None, rng_seed: 7 },
            ],
            origin_seed: "seeds/01-vfork.c".into(),
            added_at: 137,
        };
        let meta = entry.meta_text();
        let back = QueueEntry::from_meta(&meta, entry.source.clone()).unwrap();
        assert_eq!(back.id, 42);
        assert_eq!(back.chain, entry.chain);
        assert_eq!(back.origin_seed, entry.origin_seed);
        assert_eq!(back.added_at, 137);
    }

    #[test]
    fn truncated_meta_is_corrupt() {
        assert!(QueueEntry::from_meta("id = 1\n", String::new()).is_err());
        assert!(QueueEntry::from_meta("", String::new()).is_err());
    }
}
