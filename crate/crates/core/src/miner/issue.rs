//! Bug-report records and code-block extraction.

use std::collections::BTreeMap;

use super::MinerError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Compiler {
    Gcc,
    Llvm,
    Other(String),
}

impl Compiler {
    pub fn name(&self) -> &str {
        match self {
            Compiler::Gcc => "gcc",
            Compiler::Llvm => "llvm",
            Compiler::Other(name) => name,
        }
    }

    pub fn parse_name(s: &str) -> Compiler {
        match s {
            "gcc" => Compiler::Gcc,
            "llvm" | "clang" => Compiler::Llvm,
            other => Compiler::Other(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IssueStatus {
    FixedClosed,
    Other(String),
}

/// One scraped bug report.
#[derive(Debug, Clone)]
pub struct IssueRecord {
    pub id: String,
    pub compiler: Compiler,
    pub status: IssueStatus,
    /// ISO date `YYYY-MM-DD`; lexicographic order is chronological.
    pub created_at: String,
    pub title: String,
    pub discussion: String,
    pub code_blocks: Vec<String>,
    pub metadata: BTreeMap<String, String>,
}

/// Inclusive ISO date window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DateRange {
    pub from: String,
    pub to: String,
}

impl DateRange {
    pub fn new(from: &str, to: &str) -> Self {
        DateRange { from: from.to_string(), to: to.to_string() }
    }

    pub fn contains(&self, date: &str) -> bool {
        let date = &date[..date.len().min(10)];
        self.from.as_str() <= date && date <= self.to.as_str()
    }
}

/// A bug-triggering input and its derived non-triggering twin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestCasePair {
    /// Bug-triggering source.
    pub positive: String,
    /// Non-triggering variant.
    pub negative: String,
    /// How the negative was derived from the positive.
    pub mutation_description: String,
}

impl TestCasePair {
    pub fn validate(&self) -> Result<(), MinerError> {
        if self.positive.trim().is_empty() || self.negative.trim().is_empty() {
            return Err(MinerError::MalformedResponse {
                what: "test case pair".into(),
                detail: "empty positive or negative input".into(),
            });
        }
        if self.positive == self.negative {
            return Err(MinerError::MalformedResponse {
                what: "test case pair".into(),
                detail: "negative equals positive".into(),
            });
        }
        Ok(())
    }
}

/// Generated input/expected-output pair for mutator validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedTest {
    pub input: String,
    pub expected_output: String,
}

const FILE_MARKER: &str = "### FILE ###";

/// Pull code blocks out of a report body. Priority order: attachment bodies,
/// fenced blocks, then `### FILE ###`-marked lines (joined into one block).
pub fn extract_code_blocks(body: &str) -> Vec<String> {
    let mut blocks = Vec::new();

    // [attachment ...] ... [/attachment]
    let mut attachment: Option<Vec<&str>> = None;
    for line in body.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with("[attachment") && trimmed.ends_with(']') {
            attachment = Some(Vec::new());
            continue;
        }
        if trimmed == "[/attachment]" {
            if let Some(lines) = attachment.take() {
                blocks.push(lines.join("\n"));
            }
            continue;
        }
        if let Some(lines) = attachment.as_mut() {
            lines.push(line);
        }
    }

    // ``` fenced blocks
    let mut fence: Option<Vec<&str>> = None;
    for line in body.lines() {
        if line.trim_start().starts_with("```") {
            match fence.take() {
                Some(lines) => blocks.push(lines.join("\n")),
                None => fence = Some(Vec::new()),
            }
            continue;
        }
        if let Some(lines) = fence.as_mut() {
            lines.push(line);
        }
    }

    // ### FILE ### marked lines: one block from all of them, in order.
    let marked: Vec<String> = body
        .lines()
        .filter_map(|line| {
            let trimmed = line.trim_end();
            trimmed
                .strip_suffix(FILE_MARKER)
                .map(|content| content.trim_end().to_string())
        })
        .collect();
    if !marked.is_empty() {
        blocks.push(marked.join("\n"));
    }

    blocks.retain(|b| !b.trim().is_empty());
    blocks
}

/// Parse a fixture issue file: `key = value` header lines up to the first
/// blank line, then the raw report body.
pub fn parse_issue_file(text: &str) -> Result<IssueRecord, MinerError> {
    let mut header = BTreeMap::new();
    let mut body_start = text.len();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let content = line.trim_end_matches(['\n', '\r']);
        if content.trim().is_empty() {
            body_start = offset + line.len();
            break;
        }
        let Some(eq) = content.find('=') else {
            return Err(MinerError::IssueParse(format!("bad header line {content:?}")));
        };
        let key = content[..eq].trim().to_string();
        let value = content[eq + 1..].trim().to_string();
        header.insert(key, value);
        offset += line.len();
    }
    let body = &text[body_start.min(text.len())..];

    let take = |key: &str| -> Result<String, MinerError> {
        header
            .get(key)
            .cloned()
            .ok_or_else(|| MinerError::IssueParse(format!("missing header field `{key}`")))
    };
    let id = take("id")?;
    if id.is_empty() {
        return Err(MinerError::IssueParse("empty issue id".into()));
    }
    let compiler = Compiler::parse_name(&take("compiler")?);
    let status = match take("status")?.as_str() {
        "fixed-closed" => IssueStatus::FixedClosed,
        other => IssueStatus::Other(other.to_string()),
    };
    let created_at = take("created_at")?;
    let title = take("title")?;
    let metadata: BTreeMap<String, String> = header
        .into_iter()
        .filter(|(k, _)| !matches!(k.as_str(), "id" | "compiler" | "status" | "created_at" | "title"))
        .collect();
    Ok(IssueRecord {
        id,
        compiler,
        status,
        created_at,
        title,
        code_blocks: extract_code_blocks(body),
        discussion: body.to_string(),
        metadata,
    })
}
