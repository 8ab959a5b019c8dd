//! Data shipped inside the library: the starter mutator pack, prompt
//! templates, classifier tables, and the desk-scale fixture corpus (seeds,
//! issues, replay transcripts).

use std::path::{Path, PathBuf};

use crate::mutator::{self, MutatorRegistry};

pub const STARTER_PACK: &str = include_str!("../data/starter.pack");

pub const PROMPT_DERIVE_NEGATIVE: &str = include_str!("../data/prompts/derive_negative.txt");
pub const PROMPT_GENERALIZE: &str = include_str!("../data/prompts/generalize.txt");
pub const PROMPT_GENERATE_TESTS: &str = include_str!("../data/prompts/generate_tests.txt");
pub const PROMPT_CREATE_SCRIPT: &str = include_str!("../data/prompts/create_script.txt");
pub const PROMPT_REFINE: &str = include_str!("../data/prompts/refine.txt");
pub const EXAMPLE_SCRIPT: &str = include_str!("../data/prompts/example_script.txt");

pub const CLASSIFIER_FIXTURE: &str = include_str!("../data/classifiers/fixture.rules");
pub const CLASSIFIER_GCC: &str = include_str!("../data/classifiers/gcc.rules");
pub const CLASSIFIER_CLANG: &str = include_str!("../data/classifiers/clang.rules");
pub const DEFAULT_HELPERS: &str = include_str!("../data/classifiers/helpers.txt");

pub const FIXTURE_SEEDS: &[(&str, &str)] = &[
    ("01-vfork.c", include_str!("../data/fixtures/seeds/01-vfork.c")),
    ("02-return-sum.c", include_str!("../data/fixtures/seeds/02-return-sum.c")),
    ("03-literals.c", include_str!("../data/fixtures/seeds/03-literals.c")),
    ("04-zero-init.c", include_str!("../data/fixtures/seeds/04-zero-init.c")),
    ("05-casts.c", include_str!("../data/fixtures/seeds/05-casts.c")),
    ("06-externs.c", include_str!("../data/fixtures/seeds/06-externs.c")),
    ("07-branch-tokens.c", include_str!("../data/fixtures/seeds/07-branch-tokens.c")),
    ("08-loop.c", include_str!("../data/fixtures/seeds/08-loop.c")),
    ("09-struct.c", include_str!("../data/fixtures/seeds/09-struct.c")),
    ("10-string.c", include_str!("../data/fixtures/seeds/10-string.c")),
];

pub const FIXTURE_ISSUES: &[(&str, &str)] = &[
    ("gcc-108449.issue", include_str!("../data/fixtures/issues/gcc-108449.issue")),
    ("gcc-108777.issue", include_str!("../data/fixtures/issues/gcc-108777.issue")),
    ("llvm-113692.issue", include_str!("../data/fixtures/issues/llvm-113692.issue")),
];

pub const FIXTURE_TRANSCRIPTS: &[(&str, &str)] = &[
    ("gcc-108449.replay", include_str!("../data/fixtures/transcripts/gcc-108449.replay")),
    ("gcc-108777.replay", include_str!("../data/fixtures/transcripts/gcc-108777.replay")),
    ("llvm-113692.replay", include_str!("../data/fixtures/transcripts/llvm-113692.replay")),
];

/// The bundled starter registry (rules M1, M3, M4, M8, M9, M10).
pub fn starter_pack() -> Result<MutatorRegistry, mutator::MutatorError> {
    mutator::load_pack_str(STARTER_PACK)
}

/// Default helper-frame substrings for crash dedup keys.
pub fn default_helpers() -> Vec<String> {
    DEFAULT_HELPERS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

fn write_all(dir: &Path, files: &[(&str, &str)]) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = dir.join(name);
        std::fs::write(&path, contents)?;
        written.push(path);
    }
    Ok(written)
}

/// Materialize the ten bundled seed files into `dir`.
pub fn write_fixture_seeds(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    write_all(dir, FIXTURE_SEEDS)
}

/// Materialize the fixture issue files into `dir`.
pub fn write_fixture_issues(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    write_all(dir, FIXTURE_ISSUES)
}

/// Materialize the recorded transcripts into `dir`.
pub fn write_fixture_transcripts(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    write_all(dir, FIXTURE_TRANSCRIPTS)
}
