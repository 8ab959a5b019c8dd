//! Candidate mutator scripts: parsing model output, lifting the sed
//! substitution template into a native rewrite rule, and running scripts
//! against test inputs.

use std::collections::HashMap;
use std::sync::OnceLock;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use regex::Regex;

use super::issue::GeneratedTest;
use super::MinerError;
use crate::mutator::{Action, Element, Mutator, MutatorError, RewriteRule, Scope};
use crate::runner::exec;

/// What a candidate executes: a lifted substitution or the raw bash script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Script {
    Rewrite { pattern: String, replacement: String, scope: Scope },
    External(String),
}

/// Index of the original negative→positive pair within `tests`.
pub const ORIGINAL_TEST_INDEX: usize = 3;

#[derive(Debug, Clone)]
pub struct CandidateMutator {
    pub generalized_description: String,
    /// Bash text as produced by the model (kept for refinement even when
    /// lifted).
    pub script_text: String,
    pub script: Script,
    /// Exactly four: three generated pairs plus the original pair last.
    pub tests: Vec<GeneratedTest>,
    pub refinement_count: u32,
}

/// Maximum refine iterations per candidate.
pub const MAX_REFINEMENTS: u32 = 5;

fn code_tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)<code>(.*?)</code>").unwrap())
}

fn fence_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)```[a-zA-Z0-9_+-]*\n(.*?)```").unwrap())
}

/// Pull the script body out of a model response: a `<code>` block, or a
/// fenced block as fallback.
pub fn parse_code_block(response: &str) -> Result<String, MinerError> {
    let body = code_tag_re()
        .captures(response)
        .or_else(|| fence_re().captures(response))
        .map(|c| c.get(1).unwrap().as_str().trim().to_string());
    match body {
        Some(code) if !code.is_empty() => Ok(code),
        _ => Err(MinerError::MalformedResponse {
            what: "script".into(),
            detail: "no non-empty <code> or fenced block".into(),
        }),
    }
}

/// First fenced code block in a response, with the prose before it.
pub fn split_description_and_code(response: &str) -> Result<(String, String), MinerError> {
    let caps = fence_re().captures(response).ok_or_else(|| MinerError::MalformedResponse {
        what: "mutation response".into(),
        detail: "no fenced code block".into(),
    })?;
    let whole = caps.get(0).unwrap();
    let description = response[..whole.start()].trim().to_string();
    let code = caps.get(1).unwrap().as_str().trim_matches('\n').to_string();
    if code.trim().is_empty() {
        return Err(MinerError::MalformedResponse {
            what: "mutation response".into(),
            detail: "empty code block".into(),
        });
    }
    Ok((description, code))
}

/// Try to lift a bash script onto the single-substitution template: any
/// number of variable assignments plus exactly one `sed` substitution.
/// Anything else stays an external script.
pub fn lift_script(bash: &str) -> Script {
    match try_lift(bash) {
        Some(script) => script,
        None => Script::External(bash.to_string()),
    }
}

fn try_lift(bash: &str) -> Option<Script> {
    let mut assignments: HashMap<String, String> = HashMap::new();
    let mut sed_line: Option<&str> = None;
    for line in bash.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((name, value)) = parse_assignment(line) {
            assignments.insert(name, value);
            continue;
        }
        if line.starts_with("sed ") || line == "sed" {
            if sed_line.is_some() {
                return None; // more than one substitution
            }
            sed_line = Some(line);
            continue;
        }
        return None; // arbitrary command: not the template
    }
    let sed_line = sed_line?;
    let (script_arg, file_arg) = split_sed_invocation(sed_line)?;
    if !is_input_file_ref(&file_arg, &assignments) {
        return None;
    }
    let (address, substitution) = strip_address(&script_arg);
    let (raw_pattern, raw_replacement, flags) = parse_substitution(substitution)?;
    let pattern = substitute_vars(&raw_pattern, &assignments);
    let replacement = substitute_vars(&raw_replacement, &assignments);
    let scope = match flags.as_str() {
        // A line-addressed substitution targets one site; give the lifted
        // rule the random-site default so it stays applicable anywhere.
        _ if address => Scope::RandomMatchSite,
        "" => Scope::RandomMatchSite,
        "g" => Scope::AllMatches,
        _ => return None,
    };
    // The lifted pattern must compile in our dialect, else keep the script.
    Regex::new(&pattern).ok()?;
    Some(Script::Rewrite { pattern, replacement, scope })
}

fn parse_assignment(line: &str) -> Option<(String, String)> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"^([A-Za-z_][A-Za-z0-9_]*)=(.*)$").unwrap());
    let caps = re.captures(line)?;
    let name = caps.get(1).unwrap().as_str().to_string();
    let mut value = caps.get(2).unwrap().as_str().trim().to_string();
    if value.len() >= 2 {
        let bytes = value.as_bytes();
        if (bytes[0] == b'\'' && bytes[value.len() - 1] == b'\'')
            || (bytes[0] == b'"' && bytes[value.len() - 1] == b'"')
        {
            value = value[1..value.len() - 1].to_string();
        }
    }
    Some((name, value))
}

/// Split `sed [flags] 'SCRIPT' FILE` into the script and file arguments.
fn split_sed_invocation(line: &str) -> Option<(String, String)> {
    static QUOTED: OnceLock<Regex> = OnceLock::new();
    static BARE: OnceLock<Regex> = OnceLock::new();
    let quoted = QUOTED.get_or_init(|| {
        Regex::new(r#"^sed((?:\s+-[A-Za-z-]+)*)\s+(['"])(.+)['"]\s+(\S+)\s*$"#).unwrap()
    });
    let bare = BARE
        .get_or_init(|| Regex::new(r"^sed((?:\s+-[A-Za-z-]+)*)\s+(\S+)\s+(\S+)\s*$").unwrap());
    if let Some(caps) = quoted.captures(line) {
        return Some((caps.get(3).unwrap().as_str().to_string(), caps.get(4).unwrap().as_str().to_string()));
    }
    if let Some(caps) = bare.captures(line) {
        return Some((caps.get(2).unwrap().as_str().to_string(), caps.get(3).unwrap().as_str().to_string()));
    }
    None
}

fn is_input_file_ref(token: &str, assignments: &HashMap<String, String>) -> bool {
    let token = token.trim_matches('"');
    match token {
        "$1" | "${1}" => true,
        _ => token
            .strip_prefix('$')
            .map(|name| name.trim_matches(['{', '}']))
            .and_then(|name| assignments.get(name))
            .map(|value| value == "$1" || value == "${1}")
            .unwrap_or(false),
    }
}

/// Strip a leading line address (`${ln}` / `$ln` / a literal number) from a
/// sed script; returns whether one was present.
fn strip_address(script: &str) -> (bool, &str) {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"^(\$\{?[A-Za-z_][A-Za-z0-9_]*\}?|[0-9]+)s").unwrap());
    match re.find(script) {
        Some(m) => (true, &script[m.end() - 1..]),
        None => (false, script),
    }
}

/// Parse `s/PATTERN/REPLACEMENT/FLAGS` honoring backslash escapes of the
/// delimiter.
fn parse_substitution(script: &str) -> Option<(String, String, String)> {
    let mut chars = script.chars();
    if chars.next()? != 's' {
        return None;
    }
    let delim = chars.next()?;
    if delim.is_alphanumeric() || delim == '\\' {
        return None;
    }
    let rest: String = chars.collect();
    let mut parts: Vec<String> = vec![String::new()];
    let mut escaped = false;
    for c in rest.chars() {
        if escaped {
            // Keep the escape for any char except the delimiter itself.
            if c != delim {
                parts.last_mut().unwrap().push('\\');
            }
            parts.last_mut().unwrap().push(c);
            escaped = false;
            continue;
        }
        if c == '\\' {
            escaped = true;
            continue;
        }
        if c == delim {
            parts.push(String::new());
            continue;
        }
        parts.last_mut().unwrap().push(c);
    }
    if escaped || parts.len() != 3 {
        return None;
    }
    let flags = parts.pop().unwrap();
    let replacement = parts.pop().unwrap();
    let pattern = parts.pop().unwrap();
    if pattern.is_empty() {
        return None;
    }
    Some((pattern, replacement, flags))
}

fn substitute_vars(text: &str, assignments: &HashMap<String, String>) -> String {
    let mut names: Vec<&String> = assignments.keys().collect();
    // Longest first so $REPLACEMENT never partially matches inside a longer
    // name.
    names.sort_by_key(|n| std::cmp::Reverse(n.len()));
    let mut out = text.to_string();
    for name in names {
        let value = &assignments[name];
        out = out.replace(&format!("${{{name}}}"), value);
        out = out.replace(&format!("${name}"), value);
    }
    out
}

/// Apply a candidate script to one input. `Err` means the harness itself
/// failed (uninterpretable script, sandbox failure), not a wrong output.
pub fn apply_script(
    script: &Script,
    input: &str,
    seed: u64,
    timeout: Duration,
) -> Result<String, String> {
    match script {
        Script::Rewrite { pattern, replacement, scope } => {
            let rule = RewriteRule::new(
                "candidate",
                pattern,
                replacement,
                *scope,
                None,
                Action::Modify,
                vec![Element::Expression],
                "candidate",
            )
            .map_err(|e| format!("lifted rule rejected: {e}"))?;
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            Ok(rule.apply(input, &mut rng).output)
        }
        Script::External(bash) => {
            let dir = tempfile::tempdir().map_err(|e| format!("scratch: {e}"))?;
            let input_path = dir.path().join("input.c");
            let script_path = dir.path().join("script.sh");
            std::fs::write(&input_path, input).map_err(|e| format!("write input: {e}"))?;
            std::fs::write(&script_path, bash).map_err(|e| format!("write script: {e}"))?;
            let argv = vec![
                "bash".to_string(),
                script_path.to_string_lossy().into_owned(),
                input_path.to_string_lossy().into_owned(),
            ];
            let result = exec::run(&argv, dir.path(), timeout, &["PATH".to_string()])
                .map_err(|e| format!("spawn bash: {e}"))?;
            if result.timed_out {
                return Err("script timed out".to_string());
            }
            if result.exit_code != Some(0) {
                return Err(format!(
                    "script exited with {:?}: {}",
                    result.exit_code,
                    result.stderr.trim()
                ));
            }
            std::fs::read_to_string(&input_path).map_err(|e| format!("read output: {e}"))
        }
    }
}

/// Heuristic action/element tagging for a mined mutator, from its
/// generalized description and pattern text.
pub fn characterize(description: &str, script: &Script) -> (Action, Vec<Element>) {
    let desc = description.to_lowercase();
    let empty_replacement = matches!(
        script,
        Script::Rewrite { replacement, .. } if replacement.trim().is_empty()
    );
    let action = if desc.contains("swap") || desc.contains("exchange") {
        Action::Swap
    } else if empty_replacement || desc.contains("remove") || desc.contains("delete") || desc.contains("drop ") {
        Action::Remove
    } else if desc.contains("add ") || desc.contains("insert") || desc.contains("wrap") || desc.contains("append") {
        Action::Add
    } else {
        Action::Modify
    };

    let mut elements = Vec::new();
    let mut tag = |cond: bool, e: Element| {
        if cond && !elements.contains(&e) {
            elements.push(e);
        }
    };
    tag(desc.contains("attribute"), Element::Attribute);
    tag(desc.contains("builtin") || desc.contains("built-in") || desc.contains("__builtin"), Element::BuiltinFunction);
    tag(desc.contains("cast") || desc.contains("unary"), Element::UnaryOperator);
    tag(desc.contains("function declaration") || desc.contains("declaration"), Element::FunctionDeclaration);
    tag(desc.contains("literal") || desc.contains("constant"), Element::Literal);
    tag(desc.contains("initializ"), Element::Initialization);
    tag(desc.contains("parameter") || desc.contains("argument"), Element::Parameter);
    tag(desc.contains("storage class") || desc.contains("extern") || desc.contains("static"), Element::StorageClassSpecifier);
    tag(desc.contains("statement"), Element::Statement);
    tag(desc.contains(" type"), Element::Type);
    tag(desc.contains("variable"), Element::VariableDeclaration);
    tag(desc.contains("character"), Element::Character);
    if elements.is_empty() {
        elements.push(Element::Expression);
    }
    (action, elements)
}

impl CandidateMutator {
    /// Build the final registry entry. External scripts are written to
    /// `script_dir` so the pack's command points at a real file.
    pub fn into_mutator(
        &self,
        id: &str,
        provenance: &str,
        script_dir: &std::path::Path,
    ) -> Result<Mutator, MutatorError> {
        let (action, elements) = characterize(&self.generalized_description, &self.script);
        match &self.script {
            Script::Rewrite { pattern, replacement, scope } => Ok(Mutator::Rewrite(RewriteRule::new(
                id,
                pattern,
                replacement,
                *scope,
                None,
                action,
                elements,
                provenance,
            )?)),
            Script::External(bash) => {
                std::fs::create_dir_all(script_dir).map_err(|e| MutatorError::Io(e.to_string()))?;
                let path = script_dir.join(format!("{id}.sh"));
                std::fs::write(&path, bash).map_err(|e| MutatorError::Io(e.to_string()))?;
                let ext = crate::mutator::ExternalMutator::new(
                    id,
                    vec![
                        "bash".to_string(),
                        path.to_string_lossy().into_owned(),
                        crate::mutator::FILE_PLACEHOLDER.to_string(),
                    ],
                    Duration::from_millis(10_000),
                    action,
                    elements,
                    provenance,
                )?;
                Ok(Mutator::External(ext))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifts_the_substitution_template() {
        let bash = "#!/bin/bash\nFILE=$1\nPATTERN='\\bextern\\b'\nREPLACEMENT='static'\nsed -i -E \"s/$PATTERN/$REPLACEMENT/\" $FILE\n";
        match lift_script(bash) {
            Script::Rewrite { pattern, replacement, scope } => {
                assert_eq!(pattern, r"\bextern\b");
                assert_eq!(replacement, "static");
                assert_eq!(scope, Scope::RandomMatchSite);
            }
            other => panic!("expected lift, got {other:?}"),
        }
    }

    #[test]
    fn lifts_the_asm_constraint_script() {
        let bash = "#!/bin/bash\nFILE=$1\nPATTERN='\"\\+x\"(\\s*\\([^)]*\\))'\nREPLACEMENT='\"\\+f\"\\1'\nsed -i -E \"s/$PATTERN/$REPLACEMENT/\" $FILE\n";
        match lift_script(bash) {
            Script::Rewrite { pattern, replacement, .. } => {
                assert_eq!(pattern, r#""\+x"(\s*\([^)]*\))"#);
                assert_eq!(replacement, r#""\+f"\1"#);
            }
            other => panic!("expected lift, got {other:?}"),
        }
    }

    #[test]
    fn global_flag_lifts_to_all_matches() {
        let bash = "sed -i -E 's/\\bextern\\b/static/g' $1\n";
        match lift_script(bash) {
            Script::Rewrite { scope, .. } => assert_eq!(scope, Scope::AllMatches),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn line_addressed_template_lifts_to_random_site() {
        let bash = "FILE=$1\nPATTERN=extern\nREPLACEMENT=static\nsed -i -E \"${ln}s/$PATTERN/$REPLACEMENT/\" $FILE\n";
        match lift_script(bash) {
            Script::Rewrite { scope, pattern, .. } => {
                assert_eq!(scope, Scope::RandomMatchSite);
                assert_eq!(pattern, "extern");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn multi_command_scripts_stay_external() {
        let bash = "grep -n extern $1\nsed -i 's/a/b/' $1\n";
        assert!(matches!(lift_script(bash), Script::External(_)));
        let two_seds = "sed -i 's/a/b/' $1\nsed -i 's/c/d/' $1\n";
        assert!(matches!(lift_script(two_seds), Script::External(_)));
    }

    #[test]
    fn unknown_file_target_stays_external() {
        assert!(matches!(lift_script("sed -i 's/a/b/' /etc/passwd\n"), Script::External(_)));
    }

    #[test]
    fn escaped_delimiters_parse() {
        let bash = "sed -i -E 's/a\\/b/c\\/d/' $1\n";
        match lift_script(bash) {
            Script::Rewrite { pattern, replacement, .. } => {
                assert_eq!(pattern, "a/b");
                assert_eq!(replacement, "c/d");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rewrite_script_applies_in_process() {
        let script = Script::Rewrite {
            pattern: r"\bextern\b".into(),
            replacement: "static".into(),
            scope: Scope::RandomMatchSite,
        };
        let out = apply_script(&script, "extern int x;", 1, Duration::from_secs(2)).unwrap();
        assert_eq!(out, "static int x;");
    }

    #[test]
    fn external_script_round_trips_through_bash() {
        let script = Script::External("#!/bin/bash\nsed -i -E 's/extern/static/' \"$1\"\nsed -i -E 's/int/long/' \"$1\"\n".into());
        let out = apply_script(&script, "extern int x;", 0, Duration::from_secs(5)).unwrap();
        assert_eq!(out, "static long x;");
    }

    #[test]
    fn failing_external_script_is_a_harness_failure() {
        let script = Script::External("exit 7\n".into());
        let err = apply_script(&script, "int x;", 0, Duration::from_secs(5)).unwrap_err();
        assert!(err.contains("exited"), "{err}");
    }

    #[test]
    fn parse_code_block_prefers_code_tags() {
        let response = "Here.\n<code>\nsed -i 's/a/b/' $1\n</code>\n```bash\nother\n```";
        assert_eq!(parse_code_block(response).unwrap(), "sed -i 's/a/b/' $1");
        assert!(parse_code_block("no code here").is_err());
        assert!(parse_code_block("<code>  </code>").is_err());
    }

    #[test]
    fn characterize_picks_reasonable_tags() {
        let script = Script::Rewrite { pattern: "x".into(), replacement: "y".into(), scope: Scope::AllMatches };
        let (action, elements) = characterize(
            "Replace the extern storage class specifier on a declaration with static.",
            &script,
        );
        assert_eq!(action, Action::Modify);
        assert!(elements.contains(&Element::StorageClassSpecifier));
        let (action, _) = characterize("Remove the size expression from an array declaration.", &script);
        assert_eq!(action, Action::Remove);
    }
}
