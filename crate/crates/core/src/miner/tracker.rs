//! Issue-tracker clients: GitHub-style REST, Bugzilla-style REST, and a
//! fixture client reading a directory of issue files.

use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

use super::issue::{extract_code_blocks, parse_issue_file, Compiler, DateRange, IssueRecord, IssueStatus};

#[derive(Debug, Error)]
pub enum TrackerError {
    #[error("tracker unavailable: {0}")]
    Unavailable(String),
    #[error("tracker rate limited: {0}")]
    RateLimited(String),
    #[error("tracker response parse: {0}")]
    Parse(String),
    #[error("tracker io: {0}")]
    Io(String),
}

/// Returns fixed-and-closed issues created inside the window, newest last.
pub trait TrackerClient {
    fn scrape(&self, window: &DateRange) -> Result<Vec<IssueRecord>, TrackerError>;
}

/// Scrape a tracker for candidate issues (fixed-and-closed, in window).
pub fn scrape_issues(
    source: &dyn TrackerClient,
    window: &DateRange,
) -> Result<Vec<IssueRecord>, TrackerError> {
    source.scrape(window)
}

/// Reads `*.issue` files from a directory, sorted by file name.
pub struct FixtureTracker {
    pub dir: PathBuf,
}

impl FixtureTracker {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureTracker { dir: dir.into() }
    }
}

impl TrackerClient for FixtureTracker {
    fn scrape(&self, window: &DateRange) -> Result<Vec<IssueRecord>, TrackerError> {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&self.dir)
            .map_err(|e| TrackerError::Io(format!("{}: {e}", self.dir.display())))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("issue"))
            .collect();
        paths.sort();
        let mut issues = Vec::new();
        for path in paths {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| TrackerError::Io(format!("{}: {e}", path.display())))?;
            let issue = parse_issue_file(&text)
                .map_err(|e| TrackerError::Parse(format!("{}: {e}", path.display())))?;
            if issue.status == IssueStatus::FixedClosed && window.contains(&issue.created_at) {
                issues.push(issue);
            }
        }
        Ok(issues)
    }
}

/// GitHub-style REST issues API (`GET {base}/issues?state=closed&...`).
pub struct GithubTracker {
    /// Repo API root, e.g. `https://api.github.com/repos/llvm/llvm-project`.
    pub base_url: String,
    pub token_env: Option<String>,
    pub compiler: Compiler,
    pub max_pages: usize,
    client: reqwest::blocking::Client,
}

impl GithubTracker {
    pub fn new(base_url: &str, compiler: Compiler) -> Self {
        GithubTracker {
            base_url: base_url.trim_end_matches('/').to_string(),
            token_env: None,
            compiler,
            max_pages: 10,
            client: reqwest::blocking::Client::builder()
                .user_agent("relapse-miner")
                .timeout(Duration::from_secs(60))
                .build()
                .expect("client"),
        }
    }

    fn fetch_page(&self, window: &DateRange, page: usize) -> Result<serde_json::Value, TrackerError> {
        let url = format!(
            "{}/issues?state=closed&sort=created&direction=asc&per_page=100&page={}&since={}T00:00:00Z",
            self.base_url, page, window.from
        );
        let mut backoff = Duration::from_secs(1);
        for attempt in 0..3 {
            let mut request = self.client.get(&url);
            if let Some(env) = &self.token_env {
                if let Ok(token) = std::env::var(env) {
                    request = request.bearer_auth(token);
                }
            }
            let response = request.send().map_err(|e| TrackerError::Unavailable(e.to_string()))?;
            let status = response.status();
            if status.as_u16() == 429 || status.as_u16() == 403 {
                if attempt == 2 {
                    return Err(TrackerError::RateLimited(format!("{url}: {status}")));
                }
                std::thread::sleep(backoff);
                backoff *= 2;
                continue;
            }
            if !status.is_success() {
                return Err(TrackerError::Unavailable(format!("{url}: {status}")));
            }
            return response.json().map_err(|e| TrackerError::Parse(e.to_string()));
        }
        unreachable!()
    }
}

impl TrackerClient for GithubTracker {
    fn scrape(&self, window: &DateRange) -> Result<Vec<IssueRecord>, TrackerError> {
        let mut issues = Vec::new();
        for page in 1..=self.max_pages {
            let json = self.fetch_page(window, page)?;
            let batch = parse_github_issues(&json, &self.compiler)?;
            let empty = batch.is_empty();
            for issue in batch {
                if issue.status == IssueStatus::FixedClosed && window.contains(&issue.created_at) {
                    issues.push(issue);
                }
            }
            if empty {
                break;
            }
        }
        Ok(issues)
    }
}

/// Parse a GitHub issues JSON array into records. Pull requests are skipped;
/// `closed` + `state_reason: completed` maps to fixed-closed.
pub fn parse_github_issues(
    json: &serde_json::Value,
    compiler: &Compiler,
) -> Result<Vec<IssueRecord>, TrackerError> {
    let items = json.as_array().ok_or_else(|| TrackerError::Parse("expected array".into()))?;
    let mut issues = Vec::new();
    for item in items {
        if item.get("pull_request").is_some() {
            continue;
        }
        let number = item["number"]
            .as_u64()
            .ok_or_else(|| TrackerError::Parse("issue without number".into()))?;
        let state = item["state"].as_str().unwrap_or("");
        let reason = item["state_reason"].as_str().unwrap_or("");
        let status = if state == "closed" && reason == "completed" {
            IssueStatus::FixedClosed
        } else {
            IssueStatus::Other(format!("{state}/{reason}"))
        };
        let created = item["created_at"].as_str().unwrap_or("");
        let body = item["body"].as_str().unwrap_or("");
        let title = item["title"].as_str().unwrap_or("");
        let mut metadata = std::collections::BTreeMap::new();
        if let Some(labels) = item["labels"].as_array() {
            let names: Vec<&str> = labels.iter().filter_map(|l| l["name"].as_str()).collect();
            if !names.is_empty() {
                metadata.insert("keywords".to_string(), names.join(","));
            }
        }
        issues.push(IssueRecord {
            id: number.to_string(),
            compiler: compiler.clone(),
            status,
            created_at: created.chars().take(10).collect(),
            title: title.to_string(),
            code_blocks: extract_code_blocks(body),
            discussion: body.to_string(),
            metadata,
        });
    }
    Ok(issues)
}

/// Bugzilla-style REST API (`GET {base}/rest/bug?...` + per-bug comments).
pub struct BugzillaTracker {
    pub base_url: String,
    pub compiler: Compiler,
    pub max_bugs: usize,
    client: reqwest::blocking::Client,
}

impl BugzillaTracker {
    pub fn new(base_url: &str, compiler: Compiler) -> Self {
        BugzillaTracker {
            base_url: base_url.trim_end_matches('/').to_string(),
            compiler,
            max_bugs: 500,
            client: reqwest::blocking::Client::builder()
                .user_agent("relapse-miner")
                .timeout(Duration::from_secs(60))
                .build()
                .expect("client"),
        }
    }

    fn get_json(&self, url: &str) -> Result<serde_json::Value, TrackerError> {
        let response = self
            .client
            .get(url)
            .send()
            .map_err(|e| TrackerError::Unavailable(e.to_string()))?;
        if !response.status().is_success() {
            return Err(TrackerError::Unavailable(format!("{url}: {}", response.status())));
        }
        response.json().map_err(|e| TrackerError::Parse(e.to_string()))
    }
}

impl TrackerClient for BugzillaTracker {
    fn scrape(&self, window: &DateRange) -> Result<Vec<IssueRecord>, TrackerError> {
        let url = format!(
            "{}/rest/bug?bug_status=RESOLVED&resolution=FIXED&creation_time={}&limit={}&include_fields=id,summary,creation_time,component,keywords",
            self.base_url, window.from, self.max_bugs
        );
        let json = self.get_json(&url)?;
        let mut issues = parse_bugzilla_bugs(&json, &self.compiler)?;
        issues.retain(|i| window.contains(&i.created_at));
        for issue in &mut issues {
            let url = format!("{}/rest/bug/{}/comment", self.base_url, issue.id);
            if let Ok(json) = self.get_json(&url) {
                if let Some(text) = parse_bugzilla_comments(&json, &issue.id) {
                    issue.code_blocks = extract_code_blocks(&text);
                    issue.discussion = text;
                }
            }
        }
        Ok(issues)
    }
}

/// Parse the `{"bugs": [...]}` shape of a Bugzilla search response.
pub fn parse_bugzilla_bugs(
    json: &serde_json::Value,
    compiler: &Compiler,
) -> Result<Vec<IssueRecord>, TrackerError> {
    let bugs = json["bugs"].as_array().ok_or_else(|| TrackerError::Parse("missing bugs".into()))?;
    let mut issues = Vec::new();
    for bug in bugs {
        let id = match &bug["id"] {
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::String(s) => s.clone(),
            _ => return Err(TrackerError::Parse("bug without id".into())),
        };
        let mut metadata = std::collections::BTreeMap::new();
        if let Some(component) = bug["component"].as_str() {
            metadata.insert("component".to_string(), component.to_string());
        }
        if let Some(keywords) = bug["keywords"].as_array() {
            let names: Vec<&str> = keywords.iter().filter_map(|k| k.as_str()).collect();
            if !names.is_empty() {
                metadata.insert("keywords".to_string(), names.join(","));
            }
        }
        issues.push(IssueRecord {
            id,
            compiler: compiler.clone(),
            // The query itself filters on RESOLVED/FIXED.
            status: IssueStatus::FixedClosed,
            created_at: bug["creation_time"].as_str().unwrap_or("").chars().take(10).collect(),
            title: bug["summary"].as_str().unwrap_or("").to_string(),
            code_blocks: Vec::new(),
            discussion: String::new(),
            metadata,
        });
    }
    Ok(issues)
}

/// Join the comment texts of one bug (`{"bugs": {"<id>": {"comments": [..]}}}`).
pub fn parse_bugzilla_comments(json: &serde_json::Value, id: &str) -> Option<String> {
    let comments = json["bugs"][id]["comments"].as_array()?;
    let texts: Vec<&str> = comments.iter().filter_map(|c| c["text"].as_str()).collect();
    Some(texts.join("\n\n"))
}
