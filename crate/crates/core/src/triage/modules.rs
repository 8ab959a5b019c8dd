//! Heuristic compiler-module classification for crash traces.
//!
//! The classifier is data: a table of `<Module> <regex>` lines matched
//! against frame function names and source locations, first hit wins.

use regex::Regex;

use crate::runner::StackTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ModuleClass {
    FrontEnd,
    IRGeneration,
    Optimization,
    BackEnd,
    Unknown,
}

impl ModuleClass {
    pub fn name(&self) -> &'static str {
        match self {
            ModuleClass::FrontEnd => "FrontEnd",
            ModuleClass::IRGeneration => "IRGeneration",
            ModuleClass::Optimization => "Optimization",
            ModuleClass::BackEnd => "BackEnd",
            ModuleClass::Unknown => "Unknown",
        }
    }

    pub fn parse_name(s: &str) -> Option<ModuleClass> {
        match s {
            "FrontEnd" => Some(ModuleClass::FrontEnd),
            "IRGeneration" => Some(ModuleClass::IRGeneration),
            "Optimization" => Some(ModuleClass::Optimization),
            "BackEnd" => Some(ModuleClass::BackEnd),
            "Unknown" => Some(ModuleClass::Unknown),
            _ => None,
        }
    }
}

impl std::fmt::Display for ModuleClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct ClassifierTable {
    rules: Vec<(ModuleClass, Regex)>,
}

impl ClassifierTable {
    pub fn parse(text: &str) -> Result<ClassifierTable, String> {
        let mut rules = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((module_name, pattern)) = line.split_once(char::is_whitespace) else {
                return Err(format!("line {}: expected `<Module> <regex>`", idx + 1));
            };
            let module = ModuleClass::parse_name(module_name.trim())
                .ok_or_else(|| format!("line {}: unknown module {module_name:?}", idx + 1))?;
            let regex = Regex::new(pattern.trim())
                .map_err(|e| format!("line {}: bad regex: {e}", idx + 1))?;
            rules.push((module, regex));
        }
        Ok(ClassifierTable { rules })
    }

    pub fn fixture() -> ClassifierTable {
        ClassifierTable::parse(crate::bundled::CLASSIFIER_FIXTURE).expect("bundled table")
    }

    pub fn gcc() -> ClassifierTable {
        ClassifierTable::parse(crate::bundled::CLASSIFIER_GCC).expect("bundled table")
    }

    pub fn clang() -> ClassifierTable {
        ClassifierTable::parse(crate::bundled::CLASSIFIER_CLANG).expect("bundled table")
    }
}

/// First rule whose regex matches any frame name or location wins.
pub fn classify_module(trace: &StackTrace, table: &ClassifierTable) -> ModuleClass {
    for (module, regex) in &table.rules {
        for frame in &trace.frames {
            if regex.is_match(&frame.function) || regex.is_match(&frame.location) {
                return *module;
            }
        }
    }
    ModuleClass::Unknown
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::Frame;

    fn trace(frames: &[(&str, &str)]) -> StackTrace {
        StackTrace {
            frames: frames
                .iter()
                .map(|(f, l)| Frame { function: (*f).into(), location: (*l).into(), raw: String::new() })
                .collect(),
        }
    }

    #[test]
    fn gcc_dce_frame_is_an_optimization_crash() {
        let t = trace(&[
            ("eliminate_unnecessary_stmts", "../../gcc/tree-ssa-dce.cc:1512"),
            ("execute", "../../gcc/tree-ssa-dce.cc:2069"),
        ]);
        assert_eq!(classify_module(&t, &ClassifierTable::gcc()), ModuleClass::Optimization);
    }

    #[test]
    fn empty_trace_is_unknown() {
        assert_eq!(classify_module(&StackTrace::default(), &ClassifierTable::gcc()), ModuleClass::Unknown);
    }

    #[test]
    fn fixture_table_maps_stage_prefixes() {
        let table = ClassifierTable::fixture();
        assert_eq!(classify_module(&trace(&[("lex_token", "fe/lex.c:3")]), &table), ModuleClass::FrontEnd);
        assert_eq!(classify_module(&trace(&[("widen_literal", "ir/widen.c:142")]), &table), ModuleClass::IRGeneration);
        assert_eq!(classify_module(&trace(&[("prune_unused_decls", "opt/prune.c:133")]), &table), ModuleClass::Optimization);
        assert_eq!(classify_module(&trace(&[("copy_propagate", "be/regalloc.c:77")]), &table), ModuleClass::BackEnd);
    }

    #[test]
    fn first_matching_rule_wins() {
        let table = ClassifierTable::parse("FrontEnd\taaa\nBackEnd\taa\n").unwrap();
        assert_eq!(classify_module(&trace(&[("aaa", "")]), &table), ModuleClass::FrontEnd);
    }

    #[test]
    fn clang_table_parses() {
        let t = trace(&[("clang::Sema::ActOnFunctionDeclarator", "SemaDecl.cpp:100")]);
        assert_eq!(classify_module(&t, &ClassifierTable::clang()), ModuleClass::FrontEnd);
    }

    #[test]
    fn bad_tables_are_rejected() {
        assert!(ClassifierTable::parse("NotAModule x").is_err());
        assert!(ClassifierTable::parse("FrontEnd (unclosed").is_err());
    }
}
