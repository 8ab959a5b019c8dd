//! Best-effort stack-trace extraction from compiler crash output.

use std::sync::OnceLock;

use regex::Regex;

/// One stack frame; `frames[0]` is the innermost frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub function: String,
    /// `file:line` when the dump carries one, otherwise the raw program
    /// counter (`0x...`), otherwise empty.
    pub location: String,
    pub raw: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StackTrace {
    pub frames: Vec<Frame>,
}

impl StackTrace {
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceDialect {
    /// GCC ICE dumps: `0x<pc> <function>` with an indented `file:line` on the
    /// following line.
    GccIce,
    /// LLVM crash dumps: ` #N 0x<pc> <symbol> <location>`.
    ClangCrash,
    /// Try both line shapes.
    Generic,
}

impl TraceDialect {
    pub fn parse_name(name: &str) -> Option<TraceDialect> {
        match name {
            "gcc" | "gcc-ice" => Some(TraceDialect::GccIce),
            "clang" | "clang-crash" => Some(TraceDialect::ClangCrash),
            "generic" => Some(TraceDialect::Generic),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TraceDialect::GccIce => "gcc-ice",
            TraceDialect::ClangCrash => "clang-crash",
            TraceDialect::Generic => "generic",
        }
    }
}

fn gcc_frame_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^0x([0-9a-fA-F]+)\s+(.+?)\s*$").unwrap())
}

fn gcc_loc_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s+(\S+?:[0-9]+)").unwrap())
}

fn clang_frame_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*#[0-9]+\s+0x([0-9a-fA-F]+)\s+(.+?)\s*$").unwrap())
}

fn source_loc_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\S+:[0-9]+(:[0-9]+)?$").unwrap())
}

/// Parse frames out of crash stderr. Unmatched lines are skipped; an empty
/// trace is a legal result.
pub fn parse_stack_trace(stderr: &str, dialect: TraceDialect) -> StackTrace {
    let lines: Vec<&str> = stderr.lines().collect();
    let mut frames = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let line = lines[i];
        let gcc = matches!(dialect, TraceDialect::GccIce | TraceDialect::Generic);
        let clang = matches!(dialect, TraceDialect::ClangCrash | TraceDialect::Generic);
        if gcc {
            if let Some(caps) = gcc_frame_re().captures(line) {
                let pc = caps.get(1).unwrap().as_str();
                let function = caps.get(2).unwrap().as_str().to_string();
                let mut location = format!("0x{pc}");
                // Location lives on the next (indented) line when present.
                if i + 1 < lines.len() {
                    if let Some(loc) = gcc_loc_re().captures(lines[i + 1]) {
                        location = loc.get(1).unwrap().as_str().to_string();
                        i += 1;
                    }
                }
                frames.push(Frame { function, location, raw: line.to_string() });
                i += 1;
                continue;
            }
        }
        if clang {
            if let Some(caps) = clang_frame_re().captures(line) {
                let pc = caps.get(1).unwrap().as_str();
                let rest = caps.get(2).unwrap().as_str();
                // A trailing `file:line[:col]` token is the location; the rest
                // is the (possibly space-containing) symbol.
                let (function, location) = match rest.rsplit_once(char::is_whitespace) {
                    Some((head, tail)) if source_loc_re().is_match(tail) => {
                        (head.trim().to_string(), tail.to_string())
                    }
                    _ => (rest.to_string(), format!("0x{pc}")),
                };
                frames.push(Frame { function, location, raw: line.to_string() });
                i += 1;
                continue;
            }
        }
        i += 1;
    }
    StackTrace { frames }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GCC_ICE_STDERR: &str = "during GIMPLE pass: cddce\n\
z1.c: In function 'f':\n\
z1.c:2:1: internal compiler error: in eliminate_unnecessary_stmts, at tree-ssa-dce.cc:1512\n\
    2 | void f() { vfork(); }\n\
      | ^~~~\n\
0xe0f0dc eliminate_unnecessary_stmts\n\
\t../../gcc/tree-ssa-dce.cc:1512\n\
0xe11e55 execute\n\
\t../../gcc/tree-ssa-dce.cc:2069\n";

    #[test]
    fn parses_gcc_ice_frames_innermost_first() {
        let trace = parse_stack_trace(GCC_ICE_STDERR, TraceDialect::GccIce);
        assert_eq!(trace.frames.len(), 2);
        assert_eq!(trace.frames[0].function, "eliminate_unnecessary_stmts");
        assert_eq!(trace.frames[0].location, "../../gcc/tree-ssa-dce.cc:1512");
        assert_eq!(trace.frames[1].function, "execute");
        assert_eq!(trace.frames[1].location, "../../gcc/tree-ssa-dce.cc:2069");
    }

    #[test]
    fn gcc_frame_without_location_keeps_pc() {
        let trace = parse_stack_trace("0xdeadbe my_frame\nnot a loc\n", TraceDialect::GccIce);
        assert_eq!(trace.frames.len(), 1);
        assert_eq!(trace.frames[0].location, "0xdeadbe");
    }

    #[test]
    fn parses_clang_crash_frames() {
        let stderr = "Stack dump:\n\
 #0 0x0000000003a1b2c3 llvm::sys::PrintStackTrace(llvm::raw_ostream&, int) Unix/Signals.inc:723:13\n\
 #1 0x00007f0e12345678 clang::Sema::ActOnFunctionDeclarator (/usr/lib/libclang.so+0x345678)\n";
        let trace = parse_stack_trace(stderr, TraceDialect::ClangCrash);
        assert_eq!(trace.frames.len(), 2);
        assert_eq!(trace.frames[0].function, "llvm::sys::PrintStackTrace(llvm::raw_ostream&, int)");
        assert_eq!(trace.frames[0].location, "Unix/Signals.inc:723:13");
        assert_eq!(trace.frames[1].location, "0x00007f0e12345678");
    }

    #[test]
    fn empty_stderr_yields_empty_trace() {
        assert!(parse_stack_trace("", TraceDialect::Generic).is_empty());
        assert!(parse_stack_trace("no frames here\n", TraceDialect::Generic).is_empty());
    }

    #[test]
    fn generic_accepts_both_shapes() {
        let stderr = "0x1 gcc_like\n\tsrc/a.c:1\n #0 0x2 clang_like\n";
        let trace = parse_stack_trace(stderr, TraceDialect::Generic);
        assert_eq!(trace.frames.len(), 2);
        assert_eq!(trace.frames[0].function, "gcc_like");
        assert_eq!(trace.frames[1].function, "clang_like");
    }
}
