//! fixture-cc: a tiny deterministic stand-in compiler for campaigns and
//! tests.
//!
//! Usage: `fixture-cc [--fixed] [-O*|-c|-W*...] [-o OUT] <input>`
//! (ordinary compiler flags are accepted and ignored; `-o` consumes its
//! operand; the first non-flag argument is the input file).
//!
//! Behavior, in order:
//!
//! 1. Coverage: prints one `[cov] <token>` line per distinct feature seen
//!    in the input — `kw:<keyword>` for every C keyword present,
//!    `feat:<name>` for recognized constructs, and every `BRANCH_*` token
//!    verbatim.
//! 2. Planted bugs (disabled by `--fixed`, which emulates the repaired
//!    compiler revision):
//!    - token `BOOM_HANG`                          -> sleeps forever (hang)
//!    - `__builtin_assoc_barrier` or `BOOM_SEGV`   -> banner + SIGSEGV in
//!      copy_propagate / allocate_registers (be/regalloc.c)
//!    - a `wb`-suffixed literal or `BOOM_ASSERT`   -> assertion failure in
//!      widen_literal / lower_literal (ir/widen.c)
//!    - `static int vfork` or `BOOM_ICE`           -> internal compiler
//!      error in prune_unused_decls / run_pass_pipeline (opt/prune.c)
//!    Crash banners carry three synthetic frames in GCC ICE style
//!    (`0x<pc> <function>` + indented `file:line`), innermost first.
//! 3. Trivial parse: unbalanced `()[]{}` is a plain compile error.
//! 4. Otherwise: success, exit 0.

use std::collections::BTreeSet;
use std::io::Write;

const KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else",
    "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long", "register",
    "return", "short", "signed", "sizeof", "static", "struct", "switch", "typedef", "union",
    "unsigned", "void", "volatile", "while",
];

fn main() {
    let mut fixed = false;
    let mut input: Option<String> = None;
    let mut args = std::env::args().skip(1);
    while let Some(arg) = args.next() {
        if arg == "--fixed" {
            fixed = true;
        } else if arg == "-o" {
            let _ = args.next();
        } else if arg.starts_with('-') {
            // -O2, -c, -W..., etc: accepted and ignored
        } else {
            input = Some(arg);
            break;
        }
    }
    let Some(input) = input else {
        eprintln!("fixture-cc: error: no input file");
        std::process::exit(2);
    };
    let source = match std::fs::read(&input) {
        Ok(bytes) => String::from_utf8_lossy(&bytes).into_owned(),
        Err(e) => {
            eprintln!("fixture-cc: error: {input}: {e}");
            std::process::exit(2);
        }
    };

    emit_coverage(&source);

    if !fixed {
        check_planted_bugs(&input, &source);
    }

    if !balanced_delimiters(&source) {
        eprintln!("{input}:1:1: error: unbalanced delimiters");
        std::process::exit(1);
    }
    std::process::exit(0);
}

fn word_tokens(source: &str) -> Vec<&str> {
    source
        .split(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .filter(|t| !t.is_empty())
        .collect()
}

fn emit_coverage(source: &str) {
    let tokens = word_tokens(source);
    let token_set: BTreeSet<&str> = tokens.iter().copied().collect();
    let mut cov: BTreeSet<String> = BTreeSet::new();

    for kw in KEYWORDS {
        if token_set.contains(kw) {
            cov.insert(format!("kw:{kw}"));
        }
    }
    for token in &tokens {
        if token.starts_with("BRANCH_") {
            cov.insert((*token).to_string());
        }
        if token.len() > 2 && token.starts_with(|c: char| c.is_ascii_digit()) && token.ends_with("wb") {
            cov.insert("feat:wb_literal".to_string());
        }
        if token.starts_with("0b") && token.len() > 2 {
            cov.insert("feat:binary_literal".to_string());
        }
    }
    let features: &[(&str, &str)] = &[
        ("__builtin_assoc_barrier", "feat:assoc_barrier"),
        ("__attribute__", "feat:attribute"),
        ("target_clones", "feat:target_clones"),
        ("__asm__", "feat:asm"),
        ("#include", "feat:include"),
        ("\"", "feat:string_literal"),
        ("'", "feat:char_literal"),
        ("(int)", "feat:cast"),
        ("(char)", "feat:cast"),
        ("(float)", "feat:cast"),
        ("(double)", "feat:cast"),
        ("(long)", "feat:cast"),
        ("(void)", "feat:cast"),
    ];
    for (needle, token) in features {
        if source.contains(needle) {
            cov.insert((*token).to_string());
        }
    }

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for token in cov {
        let _ = writeln!(out, "[cov] {token}");
    }
    let _ = out.flush();
}

fn has_wb_literal(source: &str) -> bool {
    word_tokens(source)
        .iter()
        .any(|t| t.len() > 2 && t.starts_with(|c: char| c.is_ascii_digit()) && t.ends_with("wb"))
}

fn check_planted_bugs(input: &str, source: &str) {
    let tokens: BTreeSet<&str> = word_tokens(source).into_iter().collect();

    if tokens.contains("BOOM_HANG") {
        loop {
            std::thread::sleep(std::time::Duration::from_secs(1000));
        }
    }

    if tokens.contains("BOOM_SEGV") || source.contains("__builtin_assoc_barrier") {
        eprintln!("fixture-cc: fatal signal 11 while compiling {input}");
        eprintln!("0x0000a1 copy_propagate");
        eprintln!("\tbe/regalloc.c:77");
        eprintln!("0x0000a2 allocate_registers");
        eprintln!("\tbe/regalloc.c:210");
        eprintln!("0x0000a3 main");
        eprintln!("\tdriver/main.c:19");
        unsafe {
            libc::raise(libc::SIGSEGV);
        }
        std::process::exit(139);
    }

    if tokens.contains("BOOM_ASSERT") || has_wb_literal(source) {
        eprintln!("fixture-cc: ir/widen.c:142: widen_literal: Assertion `bits <= 64' failed.");
        eprintln!("0x0000b1 widen_literal");
        eprintln!("\tir/widen.c:142");
        eprintln!("0x0000b2 lower_literal");
        eprintln!("\tir/lower.c:88");
        eprintln!("0x0000b3 main");
        eprintln!("\tdriver/main.c:19");
        std::process::abort();
    }

    if tokens.contains("BOOM_ICE") || source.contains("static int vfork") {
        eprintln!("{input}: internal compiler error: in prune_unused_decls, at opt/prune.c:133");
        eprintln!("0x0000c1 prune_unused_decls");
        eprintln!("\topt/prune.c:133");
        eprintln!("0x0000c2 run_pass_pipeline");
        eprintln!("\topt/pass.c:58");
        eprintln!("0x0000c3 main");
        eprintln!("\tdriver/main.c:19");
        eprintln!("Please submit a full bug report with preprocessed source.");
        std::process::exit(1);
    }
}

fn balanced_delimiters(source: &str) -> bool {
    let (mut paren, mut brace, mut bracket) = (0i64, 0i64, 0i64);
    for c in source.chars() {
        match c {
            '(' => paren += 1,
            ')' => paren -= 1,
            '{' => brace += 1,
            '}' => brace -= 1,
            '[' => bracket += 1,
            ']' => bracket -= 1,
            _ => {}
        }
        if paren < 0 || brace < 0 || bracket < 0 {
            return false;
        }
    }
    paren == 0 && brace == 0 && bracket == 0
}
