//! LLM transports: a live chat-completion HTTP client and a deterministic
//! transcript replay used by tests and reproducible mining runs.

use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("llm http: {0}")]
    Http(String),
    #[error("llm auth: environment variable {0} is not set")]
    MissingToken(String),
    #[error("llm response missing expected content: {0}")]
    BadResponse(String),
    #[error("no transcript entry for prompt {prompt_sha256} (prompt starts {excerpt:?})")]
    NoTranscript { prompt_sha256: String, excerpt: String },
    #[error("transcript parse: {0}")]
    TranscriptParse(String),
}

/// Transport-neutral chat client. Implementations must tolerate concurrent
/// callers.
pub trait LlmClient: Send + Sync {
    fn send(&self, prompt: &str, role_context: &str) -> Result<String, LlmError>;
    fn name(&self) -> &str;
}

pub fn prompt_sha256(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// Live chat-completion endpoint (OpenAI-compatible shape): POST
/// `{endpoint}` with `{model, messages}`; bearer token read from
/// `token_env` at call time.
pub struct HttpLlmClient {
    pub endpoint: String,
    pub model: String,
    pub token_env: String,
    pub timeout: Duration,
    client: reqwest::blocking::Client,
}

impl HttpLlmClient {
    pub fn new(endpoint: &str, model: &str, token_env: &str) -> Self {
        HttpLlmClient {
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            token_env: token_env.to_string(),
            timeout: Duration::from_secs(120),
            client: reqwest::blocking::Client::new(),
        }
    }
}

impl LlmClient for HttpLlmClient {
    fn send(&self, prompt: &str, role_context: &str) -> Result<String, LlmError> {
        let token = std::env::var(&self.token_env)
            .map_err(|_| LlmError::MissingToken(self.token_env.clone()))?;
        let body = serde_json::json!({
            "model": self.model,
            "messages": [
                {"role": "system", "content": role_context},
                {"role": "user", "content": prompt},
            ],
        });
        let response = self
            .client
            .post(&self.endpoint)
            .bearer_auth(token)
            .timeout(self.timeout)
            .json(&body)
            .send()
            .map_err(|e| LlmError::Http(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(LlmError::Http(format!("{status}")));
        }
        let json: serde_json::Value =
            response.json().map_err(|e| LlmError::Http(e.to_string()))?;
        json["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| LlmError::BadResponse("choices[0].message.content".into()))
    }

    fn name(&self) -> &str {
        &self.model
    }
}

/// Deterministic replay of recorded responses.
///
/// Transcript format: blocks of
///
/// ```text
/// %%response <sha256-hex or *>
/// ...response body...
/// %%end
/// ```
///
/// A hashed block only matches its exact prompt; `*` blocks are consumed in
/// file order by any prompt without a hashed match. `#` comments are allowed
/// between blocks.
pub struct ReplayTranscript {
    by_hash: Mutex<HashMap<String, VecDeque<String>>>,
    wildcard: Mutex<VecDeque<String>>,
    calls: AtomicUsize,
    label: String,
}

impl ReplayTranscript {
    pub fn from_str(text: &str, label: &str) -> Result<Self, LlmError> {
        let mut by_hash: HashMap<String, VecDeque<String>> = HashMap::new();
        let mut wildcard = VecDeque::new();
        let mut current: Option<(String, Vec<&str>)> = None;
        for (idx, line) in text.lines().enumerate() {
            if let Some(rest) = line.strip_prefix("%%response") {
                if current.is_some() {
                    return Err(LlmError::TranscriptParse(format!(
                        "line {}: nested %%response",
                        idx + 1
                    )));
                }
                current = Some((rest.trim().to_string(), Vec::new()));
                continue;
            }
            if line.trim_end() == "%%end" {
                let Some((key, body)) = current.take() else {
                    return Err(LlmError::TranscriptParse(format!(
                        "line {}: %%end without %%response",
                        idx + 1
                    )));
                };
                let body = body.join("\n");
                if key == "*" || key.is_empty() {
                    wildcard.push_back(body);
                } else {
                    by_hash.entry(key).or_default().push_back(body);
                }
                continue;
            }
            match current.as_mut() {
                Some((_, body)) => body.push(line),
                None => {
                    let trimmed = line.trim();
                    if !trimmed.is_empty() && !trimmed.starts_with('#') {
                        return Err(LlmError::TranscriptParse(format!(
                            "line {}: text outside %%response block",
                            idx + 1
                        )));
                    }
                }
            }
        }
        if current.is_some() {
            return Err(LlmError::TranscriptParse("unterminated %%response block".into()));
        }
        Ok(ReplayTranscript {
            by_hash: Mutex::new(by_hash),
            wildcard: Mutex::new(wildcard),
            calls: AtomicUsize::new(0),
            label: label.to_string(),
        })
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::TranscriptParse(format!("{}: {e}", path.display())))?;
        Self::from_str(&text, &path.display().to_string())
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// Unconsumed responses left in the transcript.
    pub fn remaining(&self) -> usize {
        let hashed: usize = self.by_hash.lock().unwrap().values().map(VecDeque::len).sum();
        hashed + self.wildcard.lock().unwrap().len()
    }
}

impl LlmClient for ReplayTranscript {
    fn send(&self, prompt: &str, _role_context: &str) -> Result<String, LlmError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let hash = prompt_sha256(prompt);
        if let Some(queue) = self.by_hash.lock().unwrap().get_mut(&hash) {
            if let Some(body) = queue.pop_front() {
                return Ok(body);
            }
        }
        if let Some(body) = self.wildcard.lock().unwrap().pop_front() {
            return Ok(body);
        }
        Err(LlmError::NoTranscript {
            prompt_sha256: hash,
            excerpt: prompt.chars().take(60).collect(),
        })
    }

    fn name(&self) -> &str {
        &self.label
    }
}
