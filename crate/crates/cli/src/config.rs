//! Tool configuration: a flat structured-text file with sections mirroring
//! the subsystems. CLI flags override file values; the fully resolved
//! configuration is echoed into every campaign directory.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use relapse_core::textfmt;

/// Raw config file contents: `section -> key -> value`.
#[derive(Debug, Clone, Default)]
pub struct ToolConfig {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ToolConfig {
    pub fn load(path: &Path) -> Result<ToolConfig, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<ToolConfig, String> {
        let stanzas = textfmt::parse(text).map_err(|e| e.to_string())?;
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        for stanza in stanzas {
            let entry = sections.entry(stanza.name.clone()).or_default();
            for field in stanza.fields {
                entry.insert(field.key, field.value);
            }
        }
        Ok(ToolConfig { sections })
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(String::as_str)
    }

    /// Flag value, else config value, else default.
    pub fn resolve<T: Clone>(
        &self,
        flag: Option<T>,
        section: &str,
        key: &str,
        parse: impl Fn(&str) -> Option<T>,
        default: T,
    ) -> T {
        if let Some(v) = flag {
            return v;
        }
        if let Some(raw) = self.get(section, key) {
            if let Some(v) = parse(raw) {
                return v;
            }
        }
        default
    }
}

/// Parse `60s`, `10m`, `24h`, or bare seconds.
pub fn parse_duration(text: &str) -> Option<Duration> {
    let text = text.trim();
    let (digits, scale) = match text.chars().last()? {
        's' => (&text[..text.len() - 1], 1u64),
        'm' => (&text[..text.len() - 1], 60),
        'h' => (&text[..text.len() - 1], 3600),
        _ => (text, 1),
    };
    let value: f64 = digits.parse().ok()?;
    Some(Duration::from_secs_f64(value * scale as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_overrides() {
        let cfg = ToolConfig::parse("[fuzz]\njobs = 4\nbudget = 60s\n[target]\ncommand = cc {input}\n").unwrap();
        assert_eq!(cfg.get("fuzz", "jobs"), Some("4"));
        assert_eq!(cfg.resolve(Some(8usize), "fuzz", "jobs", |s| s.parse().ok(), 1), 8);
        assert_eq!(cfg.resolve(None, "fuzz", "jobs", |s| s.parse().ok(), 1), 4);
        assert_eq!(cfg.resolve::<usize>(None, "fuzz", "missing", |s| s.parse().ok(), 7), 7);
    }

    #[test]
    fn durations() {
        assert_eq!(parse_duration("60s"), Some(Duration::from_secs(60)));
        assert_eq!(parse_duration("10m"), Some(Duration::from_secs(600)));
        assert_eq!(parse_duration("24h"), Some(Duration::from_secs(86400)));
        assert_eq!(parse_duration("90"), Some(Duration::from_secs(90)));
        assert_eq!(parse_duration("1.5s"), Some(Duration::from_millis(1500)));
        assert_eq!(parse_duration("abc"), None);
    }
}
