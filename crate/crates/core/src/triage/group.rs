//! Crash grouping by dedup key.

use crate::fuzz::CrashEvent;
use crate::runner::{parse_stack_trace, CrashKind, TraceDialect};

use super::key::{dedup_key, DedupKey};
use super::modules::ModuleClass;

#[derive(Debug, Clone)]
pub struct CrashGroup {
    pub key: DedupKey,
    pub members: Vec<CrashEvent>,
    /// Index (into `members`) of the byte-smallest crashing input.
    pub representative: usize,
    pub kind: CrashKind,
    pub module: ModuleClass,
}

impl CrashGroup {
    pub fn representative_event(&self) -> &CrashEvent {
        &self.members[self.representative]
    }
}

/// Recompute one event's dedup key from its stored stderr. Triage always
/// parses with the generic dialect so keys are stable across targets.
pub fn event_key(event: &CrashEvent, helpers: &[String]) -> DedupKey {
    let trace = parse_stack_trace(&event.stderr, TraceDialect::Generic);
    dedup_key(&trace, helpers, event.kind)
}

/// Partition events by dedup key. Groups come out in first-occurrence
/// order; the representative is the byte-smallest member input.
pub fn group_crashes(events: &[CrashEvent], helpers: &[String]) -> Vec<CrashGroup> {
    let mut order: Vec<DedupKey> = Vec::new();
    let mut by_key: std::collections::HashMap<DedupKey, Vec<CrashEvent>> =
        std::collections::HashMap::new();
    for event in events {
        let key = event_key(event, helpers);
        if !by_key.contains_key(&key) {
            order.push(key.clone());
        }
        by_key.entry(key).or_default().push(event.clone());
    }
    order
        .into_iter()
        .map(|key| {
            let members = by_key.remove(&key).unwrap();
            let representative = members
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    a.source
                        .len()
                        .cmp(&b.source.len())
                        .then_with(|| a.source.cmp(&b.source))
                })
                .map(|(i, _)| i)
                .unwrap();
            let kind = members[0].kind;
            CrashGroup { key, members, representative, kind, module: ModuleClass::Unknown }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzz::ChainStep;

    fn gcc_stderr(frames: &[(&str, &str)]) -> String {
        let mut out = String::from("x.c:1:1: internal compiler error: in f, at x.c:1\n");
        for (i, (name, loc)) in frames.iter().enumerate() {
            out.push_str(&format!("0x{:06x} {name}\n\t{loc}\n", 0xa000 + i));
        }
        out
    }

    pub(crate) fn event(source: &str, frames: &[(&str, &str)]) -> CrashEvent {
        CrashEvent {
            ordinal: 0,
            entry_id: 0,
            origin_seed: "seeds/a.c".into(),
            chain: vec![ChainStep { mutator_id: "M3".into(), site: None, rng_seed: 1 }],
            source: source.into(),
            kind: CrashKind::InternalCompilerError,
            stderr: gcc_stderr(frames),
            key: DedupKey::KindSentinel(CrashKind::InternalCompilerError),
            exec_index: 0,
            wall_offset_secs: 0.0,
        }
    }

    #[test]
    fn same_top_two_frames_group_together() {
        let helpers = Vec::new();
        let events = vec![
            event("int a;", &[("f1", "a.c:1"), ("f2", "b.c:2"), ("deep", "z.c:9")]),
            event("int bbbb;", &[("f1", "a.c:1"), ("f2", "b.c:2"), ("other", "q.c:4")]),
        ];
        let groups = group_crashes(&events, &helpers);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].members.len(), 2);
        // byte-smallest input is the representative
        assert_eq!(groups[0].representative_event().source, "int a;");
    }

    #[test]
    fn differing_second_frame_splits_groups() {
        let helpers = Vec::new();
        let events = vec![
            event("a", &[("f1", "a.c:1"), ("f2", "b.c:2")]),
            event("b", &[("f1", "a.c:1"), ("f3", "c.c:3")]),
        ];
        let groups = group_crashes(&events, &helpers);
        assert_eq!(groups.len(), 2);
    }

    #[test]
    fn grouping_partitions_all_events() {
        let helpers = Vec::new();
        let events = vec![
            event("a", &[("f1", "a.c:1"), ("f2", "b.c:2")]),
            event("b", &[("f1", "a.c:1"), ("f3", "c.c:3")]),
            event("c", &[("f1", "a.c:1"), ("f2", "b.c:2")]),
        ];
        let groups = group_crashes(&events, &helpers);
        let total: usize = groups.iter().map(|g| g.members.len()).sum();
        assert_eq!(total, events.len());
        // deterministic first-occurrence order
        assert_eq!(groups[0].members.len(), 2);
        assert_eq!(groups[1].members.len(), 1);
    }
}
