//! Campaign state and the coverage-guided fuzzing loop.
//!
//! Scheduling is FIFO cycling over the queue with a uniform-random mutator
//! pick per step. A mutant is compiled only when the mutator changed it;
//! crash-triggering mutants go to the crash store, mutants reaching new
//! coverage are enqueued, everything else is discarded.
//!
//! Per-worker RNG streams are split deterministically from the master seed
//! (one ChaCha stream per worker), so a single-worker run is bit-for-bit
//! reproducible and `persist`/`resume` restores the exact stream positions.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::coverage::{CoverageProvider, CoverageSpec};
use super::queue::{chain_from_stanzas, chain_to_stanzas, parse_u64_hex, ChainStep, QueueEntry};
use super::FuzzError;
use crate::mutator::{save_mutator_pack, Mutator, MutatorError, MutatorRegistry};
use crate::runner::{compile_in, CrashKind, OutcomeKind, TargetConfig};
use crate::textfmt::{self, Stanza};
use crate::triage::key::{dedup_key, DedupKey};

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub jobs: usize,
    pub budget: Duration,
    pub master_seed: u64,
    /// Secondary stop condition: cap on generated files (= executions).
    pub max_files: Option<u64>,
    /// Execute the seed corpus once at init to warm the coverage map.
    pub warm_coverage: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            jobs: 1,
            budget: Duration::from_secs(60),
            master_seed: 0,
            max_files: None,
            warm_coverage: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Counters {
    pub executions: u64,
    pub files_generated: u64,
    pub crashes_raw: u64,
    pub crashes_unique: u64,
    pub nochange_steps: u64,
    pub infra_errors: u64,
}

/// A classified compiler failure with everything needed to replay it.
#[derive(Debug, Clone)]
pub struct CrashEvent {
    /// 1-based index in the crash store.
    pub ordinal: u64,
    pub entry_id: u64,
    /// Campaign-relative seed path this mutant descends from.
    pub origin_seed: String,
    /// Full mutation chain from the seed, final step included.
    pub chain: Vec<ChainStep>,
    /// The crashing source text.
    pub source: String,
    pub kind: CrashKind,
    pub stderr: String,
    pub key: DedupKey,
    pub exec_index: u64,
    pub wall_offset_secs: f64,
}

#[derive(Debug, Clone)]
pub enum StepResult {
    /// Mutator did not change the input (or plugin skipped); nothing ran.
    NoChange,
    /// Compiled, no crash, no new coverage (compile errors land here too).
    Mutant,
    /// Mutant enqueued.
    NewCoverage,
    Crash(Box<CrashEvent>),
}

#[derive(Debug, thiserror::Error)]
pub enum StepError {
    #[error("infrastructure: {0}")]
    Infrastructure(String),
}

#[derive(Debug, Clone)]
struct SeriesRow {
    wall_secs: f64,
    executions: u64,
    unique_crashes: u64,
    coverage_size: usize,
}

struct Shared {
    queue: Vec<Arc<QueueEntry>>,
    cursor: u64,
    next_id: u64,
    step_count: u64,
    counters: Counters,
    coverage: Box<dyn CoverageProvider>,
    seen_keys: BTreeSet<DedupKey>,
    crashes: Vec<CrashEvent>,
    series: Vec<SeriesRow>,
    run_log: Vec<String>,
    worker_rngs: Vec<ChaCha12Rng>,
}

pub struct Campaign {
    pub dir: PathBuf,
    pub config: CampaignConfig,
    pub target: TargetConfig,
    pub registry: MutatorRegistry,
    pub helpers: Vec<String>,
    coverage_spec: CoverageSpec,
    shared: Mutex<Shared>,
    started: Instant,
    elapsed_base: f64,
}

#[derive(Debug, Clone)]
pub struct CampaignReport {
    pub counters: Counters,
    pub queue_len: usize,
    pub coverage_size: usize,
    pub unique_keys: Vec<DedupKey>,
    pub dir: PathBuf,
}

fn worker_rngs(master_seed: u64, jobs: usize) -> Vec<ChaCha12Rng> {
    (0..jobs)
        .map(|i| {
            let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
            rng.set_stream(i as u64 + 1);
            rng
        })
        .collect()
}

/// Seed the queue from a corpus directory. Every readable file becomes an
/// entry with an empty chain; file order is lexicographic by name.
pub fn init_campaign(
    seed_dir: &Path,
    registry: MutatorRegistry,
    target: TargetConfig,
    coverage_spec: CoverageSpec,
    config: CampaignConfig,
    helpers: Vec<String>,
    dir: &Path,
) -> Result<Campaign, FuzzError> {
    std::fs::create_dir_all(dir.join("seeds")).map_err(|e| FuzzError::Io(e.to_string()))?;
    std::fs::create_dir_all(dir.join("queue")).map_err(|e| FuzzError::Io(e.to_string()))?;
    std::fs::create_dir_all(dir.join("crashes/raw")).map_err(|e| FuzzError::Io(e.to_string()))?;

    let mut names: Vec<_> = std::fs::read_dir(seed_dir)
        .map_err(|e| FuzzError::Io(format!("{}: {e}", seed_dir.display())))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();

    let mut queue = Vec::new();
    for name in &names {
        let Ok(source) = std::fs::read_to_string(seed_dir.join(name)) else { continue };
        let rel = format!("seeds/{name}");
        std::fs::write(dir.join(&rel), &source).map_err(|e| FuzzError::Io(e.to_string()))?;
        queue.push(Arc::new(QueueEntry {
            id: queue.len() as u64,
            source,
            chain: Vec::new(),
            origin_seed: rel,
            added_at: 0,
        }));
    }
    if queue.is_empty() {
        return Err(FuzzError::EmptyCorpus(seed_dir.display().to_string()));
    }

    save_mutator_pack(&registry, &dir.join("pack.snapshot"))?;

    let mut coverage = coverage_spec.build();
    if config.warm_coverage {
        for entry in &queue {
            let scratch = tempfile::tempdir().map_err(|e| FuzzError::Io(e.to_string()))?;
            let outcome = compile_in(&target, &entry.source, scratch.path())?;
            if outcome.kind == OutcomeKind::Success {
                let sig = coverage.observe(&outcome, scratch.path());
                coverage.is_new(&sig);
            }
        }
    }

    let next_id = queue.len() as u64;
    let jobs = config.jobs.max(1);
    let campaign = Campaign {
        dir: dir.to_path_buf(),
        target,
        registry,
        helpers,
        coverage_spec,
        shared: Mutex::new(Shared {
            queue,
            cursor: 0,
            next_id,
            step_count: 0,
            counters: Counters::default(),
            coverage,
            seen_keys: BTreeSet::new(),
            crashes: Vec::new(),
            series: Vec::new(),
            run_log: Vec::new(),
            worker_rngs: worker_rngs(config.master_seed, jobs),
        }),
        started: Instant::now(),
        elapsed_base: 0.0,
        config,
    };
    campaign.persist()?;
    Ok(campaign)
}

impl Campaign {
    pub fn counters(&self) -> Counters {
        self.shared.lock().unwrap().counters.clone()
    }

    pub fn queue_len(&self) -> usize {
        self.shared.lock().unwrap().queue.len()
    }

    pub fn queue_entry(&self, index: usize) -> Option<Arc<QueueEntry>> {
        self.shared.lock().unwrap().queue.get(index).cloned()
    }

    pub fn coverage_size(&self) -> usize {
        self.shared.lock().unwrap().coverage.size()
    }

    pub fn unique_keys(&self) -> Vec<DedupKey> {
        self.shared.lock().unwrap().seen_keys.iter().cloned().collect()
    }

    pub fn crashes(&self) -> Vec<CrashEvent> {
        self.shared.lock().unwrap().crashes.clone()
    }

    pub fn run_log(&self) -> Vec<String> {
        self.shared.lock().unwrap().run_log.clone()
    }

    fn elapsed_total(&self) -> f64 {
        self.elapsed_base + self.started.elapsed().as_secs_f64()
    }

    /// Restrict scheduling to the given mutator ids ("successful-only"
    /// mode). Non-selected mutators stay loaded for replay and reporting.
    pub fn restrict_registry(&mut self, ids: BTreeSet<String>) -> Result<(), MutatorError> {
        self.registry.restrict(ids)
    }

    /// One fuzzing step on worker `worker`'s RNG stream.
    pub fn fuzz_step(&self, worker: usize) -> Result<StepResult, StepError> {
        // Phase 1: schedule an entry and a mutator, draw the step seed.
        let (step_no, entry, mutator, step_seed) = {
            let mut s = self.shared.lock().unwrap();
            debug_assert!(!s.queue.is_empty());
            let idx = (s.cursor % s.queue.len() as u64) as usize;
            s.cursor += 1;
            s.step_count += 1;
            let step_no = s.step_count;
            let entry = Arc::clone(&s.queue[idx]);
            let active = self.registry.active();
            debug_assert!(!active.is_empty());
            let pick = s.worker_rngs[worker].gen_range(0..active.len());
            let step_seed: u64 = s.worker_rngs[worker].gen();
            (step_no, entry, active[pick], step_seed)
        };

        // Phase 2: mutate outside the lock.
        let scratch = tempfile::tempdir()
            .map_err(|e| self.infra_step(step_no, worker, &entry, mutator, e.to_string()))?;
        let mut rng = ChaCha12Rng::seed_from_u64(step_seed);
        let mutation = match mutator.apply(&entry.source, &mut rng, Some(scratch.path())) {
            Ok(result) => result,
            Err(_plugin) => {
                // Plugin failures are soft: mutation skipped.
                self.log_simple(step_no, worker, &entry, mutator, "skip", 0, None, step_seed, true);
                return Ok(StepResult::NoChange);
            }
        };
        if !mutation.changed {
            self.log_simple(
                step_no, worker, &entry, mutator, "nochange",
                mutation.sites_matched, mutation.site_chosen, step_seed, true,
            );
            return Ok(StepResult::NoChange);
        }

        // Phase 3: compile.
        let outcome = match compile_in(&self.target, &mutation.output, scratch.path()) {
            Ok(outcome) => outcome,
            Err(e) => {
                return Err(self.infra_step(step_no, worker, &entry, mutator, e.to_string()))
            }
        };

        let final_step = ChainStep {
            mutator_id: mutator.id().to_string(),
            site: mutation.site_chosen,
            rng_seed: step_seed,
        };

        // Phase 4: feedback.
        let mut s = self.shared.lock().unwrap();
        s.counters.executions += 1;
        s.counters.files_generated += 1;
        let execs = s.counters.executions;
        match outcome.kind {
            OutcomeKind::Crash(kind) => {
                let trace = outcome.stacktrace.clone().unwrap_or_default();
                let key = dedup_key(&trace, &self.helpers, kind);
                s.counters.crashes_raw += 1;
                let ordinal = s.counters.crashes_raw;
                let new_key = s.seen_keys.insert(key.clone());
                if new_key {
                    s.counters.crashes_unique += 1;
                }
                let mut chain = entry.chain.clone();
                chain.push(final_step);
                let event = CrashEvent {
                    ordinal,
                    entry_id: entry.id,
                    origin_seed: entry.origin_seed.clone(),
                    chain,
                    source: mutation.output,
                    kind,
                    stderr: outcome.stderr,
                    key,
                    exec_index: execs,
                    wall_offset_secs: self.elapsed_total(),
                };
                s.crashes.push(event.clone());
                if new_key {
                    let row = self.series_row(&s);
                    s.series.push(row);
                }
                self.push_log(
                    &mut s, step_no, worker, &entry, mutator,
                    &format!("crash:{}", kind.name()),
                    mutation.sites_matched, event.chain.last().unwrap().site, step_seed,
                );
                drop(s);
                self.write_crash_files(&event)
                    .map_err(StepError::Infrastructure)?;
                Ok(StepResult::Crash(Box::new(event)))
            }
            OutcomeKind::CompileError => {
                self.push_log(
                    &mut s, step_no, worker, &entry, mutator, "compile-error",
                    mutation.sites_matched, mutation.site_chosen, step_seed,
                );
                Ok(StepResult::Mutant)
            }
            OutcomeKind::Success => {
                let sig = s.coverage.observe(&outcome, scratch.path());
                if s.coverage.is_new(&sig) {
                    let id = s.next_id;
                    s.next_id += 1;
                    let mut chain = entry.chain.clone();
                    chain.push(final_step);
                    let new_entry = Arc::new(QueueEntry {
                        id,
                        source: mutation.output,
                        chain,
                        origin_seed: entry.origin_seed.clone(),
                        added_at: execs,
                    });
                    s.queue.push(Arc::clone(&new_entry));
                    let row = self.series_row(&s);
                    s.series.push(row);
                    self.push_log(
                        &mut s, step_no, worker, &entry, mutator, "new-coverage",
                        mutation.sites_matched, mutation.site_chosen, step_seed,
                    );
                    drop(s);
                    self.write_queue_files(&new_entry).map_err(StepError::Infrastructure)?;
                    Ok(StepResult::NewCoverage)
                } else {
                    self.push_log(
                        &mut s, step_no, worker, &entry, mutator, "mutant",
                        mutation.sites_matched, mutation.site_chosen, step_seed,
                    );
                    Ok(StepResult::Mutant)
                }
            }
        }
    }

    fn infra_step(
        &self,
        step_no: u64,
        worker: usize,
        entry: &QueueEntry,
        mutator: &Mutator,
        message: String,
    ) -> StepError {
        let mut s = self.shared.lock().unwrap();
        s.counters.infra_errors += 1;
        self.push_log(&mut s, step_no, worker, entry, mutator, "infra", 0, None, 0);
        StepError::Infrastructure(message)
    }

    fn log_simple(
        &self,
        step_no: u64,
        worker: usize,
        entry: &QueueEntry,
        mutator: &Mutator,
        result: &str,
        sites: usize,
        site: Option<usize>,
        seed: u64,
        count_nochange: bool,
    ) {
        let mut s = self.shared.lock().unwrap();
        if count_nochange {
            s.counters.nochange_steps += 1;
        }
        self.push_log(&mut s, step_no, worker, entry, mutator, result, sites, site, seed);
    }

    #[allow(clippy::too_many_arguments)]
    fn push_log(
        &self,
        s: &mut Shared,
        step_no: u64,
        worker: usize,
        entry: &QueueEntry,
        mutator: &Mutator,
        result: &str,
        sites: usize,
        site: Option<usize>,
        seed: u64,
    ) {
        let site = site.map_or("-".to_string(), |v| v.to_string());
        s.run_log.push(format!(
            "step={step_no} worker={worker} entry={} mut={} result={result} sites={sites} site={site} seed={seed:#x} execs={} queue={} cov={} unique={}",
            entry.id,
            mutator.id(),
            s.counters.executions,
            s.queue.len(),
            s.coverage.size(),
            s.counters.crashes_unique,
        ));
    }

    fn series_row(&self, s: &Shared) -> SeriesRow {
        SeriesRow {
            wall_secs: self.elapsed_total(),
            executions: s.counters.executions,
            unique_crashes: s.counters.crashes_unique,
            coverage_size: s.coverage.size(),
        }
    }

    fn write_queue_files(&self, entry: &QueueEntry) -> Result<(), String> {
        let stem = self.dir.join("queue").join(format!("{:06}", entry.id));
        std::fs::write(stem.with_extension("c"), &entry.source).map_err(|e| e.to_string())?;
        std::fs::write(stem.with_extension("meta"), entry.meta_text()).map_err(|e| e.to_string())
    }

    fn write_crash_files(&self, event: &CrashEvent) -> Result<(), String> {
        let stem = self.dir.join("crashes/raw").join(format!("{:06}", event.ordinal));
        std::fs::write(stem.with_extension("c"), &event.source).map_err(|e| e.to_string())?;
        std::fs::write(stem.with_extension("stderr"), &event.stderr).map_err(|e| e.to_string())?;
        let mut head = Stanza::new("");
        head.push("ordinal", event.ordinal.to_string());
        head.push("kind", event.kind.name());
        head.push("entry_id", event.entry_id.to_string());
        head.push("origin_seed", &event.origin_seed);
        head.push("exec_index", event.exec_index.to_string());
        head.push("wall_offset_secs", format!("{:.3}", event.wall_offset_secs));
        let mut stanzas = vec![head, key_to_stanza(&event.key)];
        stanzas.extend(chain_to_stanzas(&event.chain));
        std::fs::write(stem.with_extension("meta"), textfmt::render(&stanzas))
            .map_err(|e| e.to_string())
    }

    /// Run workers until the time budget or file cap is hit, then persist.
    pub fn run(&self) -> Result<CampaignReport, FuzzError> {
        let remaining = self.config.budget.as_secs_f64() - self.elapsed_base;
        let deadline = Instant::now()
            + Duration::from_secs_f64(remaining.max(0.0));
        let jobs = self.config.jobs.max(1);
        let stop = AtomicBool::new(false);

        let worker_loop = |worker: usize| {
            loop {
                if stop.load(Ordering::Relaxed) || Instant::now() >= deadline {
                    break;
                }
                if let Some(max) = self.config.max_files {
                    if self.shared.lock().unwrap().counters.executions >= max {
                        stop.store(true, Ordering::Relaxed);
                        break;
                    }
                }
                // Step errors are already counted; keep fuzzing.
                let _ = self.fuzz_step(worker);
            }
        };

        if jobs == 1 {
            worker_loop(0);
        } else {
            std::thread::scope(|scope| {
                for worker in 0..jobs {
                    scope.spawn(move || worker_loop(worker));
                }
            });
        }

        {
            let mut s = self.shared.lock().unwrap();
            let row = self.series_row(&s);
            s.series.push(row);
        }
        self.persist()?;
        Ok(self.report())
    }

    pub fn report(&self) -> CampaignReport {
        let s = self.shared.lock().unwrap();
        CampaignReport {
            counters: s.counters.clone(),
            queue_len: s.queue.len(),
            coverage_size: s.coverage.size(),
            unique_keys: s.seen_keys.iter().cloned().collect(),
            dir: self.dir.clone(),
        }
    }

    /// Write `campaign.state`, `stats.csv`, and `run.log`. The queue and
    /// crash store are already on disk (written as they grew).
    pub fn persist(&self) -> Result<(), FuzzError> {
        let s = self.shared.lock().unwrap();

        let mut csv = String::from("timestamp,executions,unique_crashes,coverage_size\n");
        for row in &s.series {
            csv.push_str(&format!(
                "{:.3},{},{},{}\n",
                row.wall_secs, row.executions, row.unique_crashes, row.coverage_size
            ));
        }
        std::fs::write(self.dir.join("stats.csv"), csv).map_err(|e| FuzzError::Io(e.to_string()))?;

        let mut log = s.run_log.join("\n");
        if !log.is_empty() {
            log.push('\n');
        }
        std::fs::write(self.dir.join("run.log"), log).map_err(|e| FuzzError::Io(e.to_string()))?;

        let mut head = Stanza::new("");
        head.push("version", "1");
        head.push("master_seed", format!("{:#x}", self.config.master_seed));
        head.push("jobs", self.config.jobs.to_string());
        head.push("budget_secs", format!("{:.3}", self.config.budget.as_secs_f64()));
        head.push("max_files", self.config.max_files.map_or("-".into(), |v| v.to_string()));
        head.push("warm_coverage", self.config.warm_coverage.to_string());
        head.push("target", self.target.template());
        head.push("target_timeout_ms", self.target.timeout.as_millis().to_string());
        head.push("target_dialect", self.target.dialect.name());
        head.push("input_suffix", &self.target.input_suffix);
        head.push("coverage", self.coverage_spec.name());
        head.push("elapsed_secs", format!("{:.3}", self.elapsed_total()));
        head.push("cursor", s.cursor.to_string());
        head.push("next_id", s.next_id.to_string());
        head.push("step_count", s.step_count.to_string());
        head.push("executions", s.counters.executions.to_string());
        head.push("files_generated", s.counters.files_generated.to_string());
        head.push("crashes_raw", s.counters.crashes_raw.to_string());
        head.push("crashes_unique", s.counters.crashes_unique.to_string());
        head.push("nochange_steps", s.counters.nochange_steps.to_string());
        head.push("infra_errors", s.counters.infra_errors.to_string());
        for name in &self.target.env_allow {
            head.push("env_allow", name);
        }
        for helper in &self.helpers {
            head.push("helper", helper);
        }
        if let Some(ids) = self.registry.successful_only() {
            for id in ids {
                head.push("restrict", id);
            }
        }
        let mut stanzas = vec![head];
        for (worker, rng) in s.worker_rngs.iter().enumerate() {
            let mut stanza = Stanza::new("rng");
            stanza.push("worker", worker.to_string());
            stanza.push("pos", rng.get_word_pos().to_string());
            stanzas.push(stanza);
        }
        let mut cov = Stanza::new("coverage");
        for item in s.coverage.snapshot() {
            cov.push("item", item);
        }
        stanzas.push(cov);
        for key in &s.seen_keys {
            stanzas.push(key_to_stanza(key));
        }
        std::fs::write(self.dir.join("campaign.state"), textfmt::render(&stanzas))
            .map_err(|e| FuzzError::Io(e.to_string()))
    }
}

fn key_to_stanza(key: &DedupKey) -> Stanza {
    let mut stanza = Stanza::new("key");
    match key {
        DedupKey::KindSentinel(kind) => {
            stanza.push("sentinel", kind.name());
        }
        DedupKey::Frames { first, second } => {
            stanza.push("first_fn", &first.function);
            stanza.push("first_loc", &first.location);
            if let Some(second) = second {
                stanza.push("second_fn", &second.function);
                stanza.push("second_loc", &second.location);
            }
        }
    }
    stanza
}

pub(crate) fn key_from_stanza(stanza: &Stanza) -> Result<DedupKey, FuzzError> {
    if let Some(kind) = stanza.get("sentinel") {
        let kind = CrashKind::parse_name(kind)
            .ok_or_else(|| FuzzError::CorruptState(format!("bad sentinel kind {kind:?}")))?;
        return Ok(DedupKey::KindSentinel(kind));
    }
    let first_fn = stanza
        .get("first_fn")
        .ok_or_else(|| FuzzError::CorruptState("key stanza missing first_fn".into()))?;
    let first = crate::triage::key::FrameId {
        function: first_fn.to_string(),
        location: stanza.get("first_loc").unwrap_or("").to_string(),
    };
    let second = stanza.get("second_fn").map(|function| crate::triage::key::FrameId {
        function: function.to_string(),
        location: stanza.get("second_loc").unwrap_or("").to_string(),
    });
    Ok(DedupKey::Frames { first, second })
}

/// Reload the crash store of a campaign directory.
pub fn load_crash_events(dir: &Path) -> Result<Vec<CrashEvent>, FuzzError> {
    let raw = dir.join("crashes/raw");
    let mut stems: Vec<PathBuf> = match std::fs::read_dir(&raw) {
        Err(_) => return Ok(Vec::new()),
        Ok(entries) => entries
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("meta"))
            .collect(),
    };
    stems.sort();
    let mut events = Vec::new();
    for meta_path in stems {
        let text = std::fs::read_to_string(&meta_path).map_err(|e| FuzzError::Io(e.to_string()))?;
        let stanzas = textfmt::parse(&text).map_err(|e| FuzzError::CorruptState(e.to_string()))?;
        let head = stanzas
            .first()
            .filter(|s| s.name.is_empty())
            .ok_or_else(|| FuzzError::CorruptState(format!("{}: missing header", meta_path.display())))?;
        let field = |key: &str| -> Result<&str, FuzzError> {
            head.get(key).ok_or_else(|| {
                FuzzError::CorruptState(format!("{}: missing {key}", meta_path.display()))
            })
        };
        let kind = CrashKind::parse_name(field("kind")?)
            .ok_or_else(|| FuzzError::CorruptState("bad crash kind".into()))?;
        let key_stanza = stanzas
            .iter()
            .find(|s| s.name == "key")
            .ok_or_else(|| FuzzError::CorruptState("crash meta missing key".into()))?;
        let source = std::fs::read_to_string(meta_path.with_extension("c"))
            .map_err(|e| FuzzError::Io(e.to_string()))?;
        let stderr = std::fs::read_to_string(meta_path.with_extension("stderr")).unwrap_or_default();
        events.push(CrashEvent {
            ordinal: field("ordinal")?.parse().map_err(|_| FuzzError::CorruptState("bad ordinal".into()))?,
            entry_id: field("entry_id")?.parse().unwrap_or(0),
            origin_seed: field("origin_seed")?.to_string(),
            chain: chain_from_stanzas(&stanzas)?,
            source,
            kind,
            stderr,
            key: key_from_stanza(key_stanza)?,
            exec_index: field("exec_index")?.parse().unwrap_or(0),
            wall_offset_secs: field("wall_offset_secs")?.parse().unwrap_or(0.0),
        });
    }
    Ok(events)
}

/// Rebuild a campaign from its directory.
pub fn resume(dir: &Path) -> Result<Campaign, FuzzError> {
    let state_path = dir.join("campaign.state");
    let text = std::fs::read_to_string(&state_path)
        .map_err(|e| FuzzError::CorruptState(format!("{}: {e}", state_path.display())))?;
    let stanzas = textfmt::parse(&text).map_err(|e| FuzzError::CorruptState(e.to_string()))?;
    let head = stanzas
        .first()
        .filter(|s| s.name.is_empty())
        .ok_or_else(|| FuzzError::CorruptState("state missing header".into()))?;
    let field = |key: &str| -> Result<&str, FuzzError> {
        head.get(key)
            .ok_or_else(|| FuzzError::CorruptState(format!("state missing `{key}`")))
    };
    if field("version")? != "1" {
        return Err(FuzzError::CorruptState("unsupported state version".into()));
    }

    let mut registry = crate::mutator::load_mutator_pack(&dir.join("pack.snapshot"))?;
    let restrict: BTreeSet<String> = head.get_all("restrict").iter().map(|s| s.to_string()).collect();
    if !restrict.is_empty() {
        registry.restrict(restrict)?;
    }

    let mut target = TargetConfig::from_template(field("target")?)?;
    target.timeout = Duration::from_millis(
        field("target_timeout_ms")?.parse().map_err(|_| FuzzError::CorruptState("bad timeout".into()))?,
    );
    target.dialect = crate::runner::TraceDialect::parse_name(field("target_dialect")?)
        .ok_or_else(|| FuzzError::CorruptState("bad dialect".into()))?;
    target.input_suffix = field("input_suffix")?.to_string();
    target.env_allow = head.get_all("env_allow").iter().map(|s| s.to_string()).collect();

    let config = CampaignConfig {
        jobs: field("jobs")?.parse().map_err(|_| FuzzError::CorruptState("bad jobs".into()))?,
        budget: Duration::from_secs_f64(
            field("budget_secs")?.parse().map_err(|_| FuzzError::CorruptState("bad budget".into()))?,
        ),
        master_seed: parse_u64_hex(field("master_seed")?)?,
        max_files: match field("max_files")? {
            "-" => None,
            v => Some(v.parse().map_err(|_| FuzzError::CorruptState("bad max_files".into()))?),
        },
        warm_coverage: field("warm_coverage")? == "true",
    };

    let parse_u64 = |key: &str| -> Result<u64, FuzzError> {
        field(key)?.parse().map_err(|_| FuzzError::CorruptState(format!("bad {key}")))
    };
    let counters = Counters {
        executions: parse_u64("executions")?,
        files_generated: parse_u64("files_generated")?,
        crashes_raw: parse_u64("crashes_raw")?,
        crashes_unique: parse_u64("crashes_unique")?,
        nochange_steps: parse_u64("nochange_steps")?,
        infra_errors: parse_u64("infra_errors")?,
    };

    // Queue: seeds in name order get their original ids 0..n, then mutants
    // from queue/*.meta in id order.
    let seeds_dir = dir.join("seeds");
    let mut names: Vec<String> = std::fs::read_dir(&seeds_dir)
        .map_err(|e| FuzzError::CorruptState(format!("seeds/: {e}")))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    let mut queue = Vec::new();
    for name in &names {
        let source = std::fs::read_to_string(seeds_dir.join(name))
            .map_err(|e| FuzzError::CorruptState(format!("seeds/{name}: {e}")))?;
        queue.push(Arc::new(QueueEntry {
            id: queue.len() as u64,
            source,
            chain: Vec::new(),
            origin_seed: format!("seeds/{name}"),
            added_at: 0,
        }));
    }
    if queue.is_empty() {
        return Err(FuzzError::CorruptState("campaign has no seeds".into()));
    }
    let mut metas: Vec<PathBuf> = std::fs::read_dir(dir.join("queue"))
        .map_err(|e| FuzzError::CorruptState(format!("queue/: {e}")))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("meta"))
        .collect();
    metas.sort();
    for meta_path in metas {
        let meta = std::fs::read_to_string(&meta_path).map_err(|e| FuzzError::Io(e.to_string()))?;
        let source = std::fs::read_to_string(meta_path.with_extension("c"))
            .map_err(|e| FuzzError::CorruptState(format!("{}: {e}", meta_path.display())))?;
        queue.push(Arc::new(QueueEntry::from_meta(&meta, source)?));
    }

    let coverage_spec = CoverageSpec::parse_name(field("coverage")?)
        .ok_or_else(|| FuzzError::CorruptState("bad coverage spec".into()))?;
    let mut coverage = coverage_spec.build();
    if let Some(cov) = stanzas.iter().find(|s| s.name == "coverage") {
        coverage.restore(cov.get_all("item").iter().map(|s| s.to_string()).collect());
    }

    let mut seen_keys = BTreeSet::new();
    for stanza in stanzas.iter().filter(|s| s.name == "key") {
        seen_keys.insert(key_from_stanza(stanza)?);
    }

    let jobs = config.jobs.max(1);
    let mut rngs = worker_rngs(config.master_seed, jobs);
    for stanza in stanzas.iter().filter(|s| s.name == "rng") {
        let worker: usize = stanza
            .get("worker")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| FuzzError::CorruptState("rng stanza missing worker".into()))?;
        let pos: u128 = stanza
            .get("pos")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| FuzzError::CorruptState("rng stanza missing pos".into()))?;
        if worker < rngs.len() {
            rngs[worker].set_word_pos(pos);
        }
    }

    let run_log = match std::fs::read_to_string(dir.join("run.log")) {
        Ok(text) => text.lines().map(str::to_string).collect(),
        Err(_) => Vec::new(),
    };
    let mut series = Vec::new();
    if let Ok(csv) = std::fs::read_to_string(dir.join("stats.csv")) {
        for line in csv.lines().skip(1) {
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() == 4 {
                series.push(SeriesRow {
                    wall_secs: parts[0].parse().unwrap_or(0.0),
                    executions: parts[1].parse().unwrap_or(0),
                    unique_crashes: parts[2].parse().unwrap_or(0),
                    coverage_size: parts[3].parse().unwrap_or(0),
                });
            }
        }
    }

    Ok(Campaign {
        dir: dir.to_path_buf(),
        target,
        registry,
        helpers: head.get_all("helper").iter().map(|s| s.to_string()).collect(),
        coverage_spec,
        shared: Mutex::new(Shared {
            queue,
            cursor: parse_u64("cursor")?,
            next_id: parse_u64("next_id")?,
            step_count: parse_u64("step_count")?,
            counters,
            coverage,
            seen_keys,
            crashes: Vec::new(),
            series,
            run_log,
            worker_rngs: rngs,
        }),
        started: Instant::now(),
        elapsed_base: field("elapsed_secs")?.parse().unwrap_or(0.0),
        config,
    })
}
