//! Batch client that sends class-0 excerpts to an OpenAI-compatible
//! chat-completion endpoint and collects the rewritten class-1 samples.
//!
//! Submission order is a seeded shuffle of the input order. Every
//! completion is checkpointed as it arrives, so an interrupted run resumes
//! without re-requesting finished ids. Transport failures retry with
//! exponential backoff, then are recorded and skipped.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{count_words, Sample, REWRITTEN_PREFIX};
use crate::error::{Error, Result};

/// The rewriting instruction sent ahead of every excerpt.
pub const REWRITE_PROMPT: &str = "You will take the role of an author of crime novels. \
A text excerpt will be provided, you have to review it for the number of space characters \
and key details. Create a new text excerpt which contains the same key details but appears \
structurally different to the original. The new text must have approximately the same \
number of spaces as the original. Only return the new text passage. Do not include place \
holders, line breaks or any other text except the new passage. Text excerpt:''";

/// The full prompt for one excerpt: the fixed instruction block with the
/// untouched excerpt appended. Byte-stable across calls.
pub fn build_prompt(excerpt: &str) -> Result<String> {
    if excerpt.trim().is_empty() {
        return Err(Error::EmptyExcerpt);
    }
    Ok(format!("{REWRITE_PROMPT} {excerpt}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteConfig {
    pub endpoint_url: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_retries: u32,
    pub concurrency_limit: usize,
    /// Seed for the submission-order shuffle.
    pub seed: u64,
    /// Base delay of the exponential backoff between retries.
    #[serde(default = "default_backoff_ms")]
    pub retry_backoff_ms: u64,
    /// Environment variable holding the API key. When the variable is
    /// unset, requests go out without an Authorization header (local stubs).
    #[serde(default = "default_api_key_env")]
    pub api_key_env: String,
}

fn default_backoff_ms() -> u64 {
    500
}

fn default_api_key_env() -> String {
    "OPENAI_API_KEY".to_string()
}

impl Default for RewriteConfig {
    fn default() -> Self {
        Self {
            endpoint_url: "https://api.openai.com/v1/chat/completions".into(),
            model_name: "gpt-4.1".into(),
            temperature: 0.7,
            max_retries: 3,
            concurrency_limit: 4,
            seed: 0,
            retry_backoff_ms: default_backoff_ms(),
            api_key_env: default_api_key_env(),
        }
    }
}

impl RewriteConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(Error::Config(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.concurrency_limit < 1 {
            return Err(Error::Config("concurrency_limit must be >= 1".into()));
        }
        Ok(())
    }
}

/// Log entry for one completed request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteRecord {
    pub source_id: String,
    pub request_prompt: String,
    pub response_text: String,
    pub latency_ms: u64,
    /// 1-based attempt on which the request succeeded.
    pub attempt: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CheckpointEntry {
    record: RewriteRecord,
    sample: Sample,
}

/// Result of a rewrite run: the class-1 samples, the request log, and any
/// ids that failed after all retries.
#[derive(Debug, Clone)]
pub struct RewriteOutcome {
    pub samples: Vec<Sample>,
    pub records: Vec<RewriteRecord>,
    /// `(source_id, error)` for inputs that exhausted their retries.
    pub failures: Vec<(String, String)>,
    /// How many requests were actually issued (resumed ids are skipped).
    pub requests_issued: usize,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    temperature: f64,
    messages: [ChatMessage<'a>; 1],
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatChoiceMessage,
}

#[derive(Deserialize)]
struct ChatChoiceMessage {
    content: String,
}

/// Rewrite every class-0 sample through the configured endpoint.
///
/// With a checkpoint path, completed ids from a previous run are loaded and
/// skipped, and each new completion is appended (writes are serialised, so
/// concurrent workers cannot interleave lines).
pub fn rewrite_corpus(
    class0: &[Sample],
    config: &RewriteConfig,
    checkpoint_path: Option<&Path>,
) -> Result<RewriteOutcome> {
    config.validate()?;

    let mut done: Vec<CheckpointEntry> = Vec::new();
    if let Some(path) = checkpoint_path {
        if path.exists() {
            for line in fs::read_to_string(path)?.lines() {
                if line.trim().is_empty() {
                    continue;
                }
                done.push(serde_json::from_str(line)?);
            }
        }
    }
    let done_ids: Vec<&str> = done.iter().map(|e| e.record.source_id.as_str()).collect();

    let mut order: Vec<&Sample> = class0.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    order.shuffle(&mut rng);
    let pending: Vec<&Sample> = order
        .into_iter()
        .filter(|s| !done_ids.contains(&s.id.as_str()))
        .collect();

    let api_key = std::env::var(&config.api_key_env).ok();
    let checkpoint_file = match checkpoint_path {
        Some(path) => Some(Mutex::new(
            fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)?,
        )),
        None => None,
    };

    let cursor = AtomicUsize::new(0);
    let completed: Mutex<Vec<CheckpointEntry>> = Mutex::new(Vec::new());
    let failures: Mutex<Vec<(String, String)>> = Mutex::new(Vec::new());
    let requests_issued = AtomicUsize::new(0);

    std::thread::scope(|scope| {
        for _ in 0..config.concurrency_limit.min(pending.len().max(1)) {
            scope.spawn(|| {
                let client = reqwest::blocking::Client::builder()
                    .timeout(Duration::from_secs(120))
                    .build()
                    .expect("client builds");
                loop {
                    let i = cursor.fetch_add(1, Ordering::SeqCst);
                    let Some(sample) = pending.get(i) else { break };
                    requests_issued.fetch_add(1, Ordering::SeqCst);
                    match rewrite_one(&client, config, api_key.as_deref(), sample) {
                        Ok(entry) => {
                            if let Some(file) = &checkpoint_file {
                                let mut file = file.lock().unwrap();
                                let line = serde_json::to_string(&entry).expect("entry serialises");
                                let _ = writeln!(file, "{line}");
                                let _ = file.flush();
                            }
                            completed.lock().unwrap().push(entry);
                        }
                        Err(e) => {
                            failures
                                .lock()
                                .unwrap()
                                .push((sample.id.clone(), e.to_string()));
                        }
                    }
                }
            });
        }
    });

    done.extend(completed.into_inner().unwrap());
    // Results are keyed by id; order them by the input order for stable output.
    let position = |id: &str| class0.iter().position(|s| s.id == id).unwrap_or(usize::MAX);
    done.sort_by_key(|e| position(&e.record.source_id));

    Ok(RewriteOutcome {
        samples: done.iter().map(|e| e.sample.clone()).collect(),
        records: done.into_iter().map(|e| e.record).collect(),
        failures: failures.into_inner().unwrap(),
        requests_issued: requests_issued.into_inner(),
    })
}

fn rewrite_one(
    client: &reqwest::blocking::Client,
    config: &RewriteConfig,
    api_key: Option<&str>,
    sample: &Sample,
) -> Result<CheckpointEntry> {
    let prompt = build_prompt(&sample.text)?;
    let started = Instant::now();
    let mut last_error = String::new();
    let attempts = config.max_retries + 1;
    for attempt in 1..=attempts {
        if attempt > 1 {
            let delay = config
                .retry_backoff_ms
                .saturating_mul(1 << (attempt - 2).min(16));
            std::thread::sleep(Duration::from_millis(delay));
        }
        match send_request(client, config, api_key, &prompt) {
            Ok(text) if !text.trim().is_empty() => {
                let text = text.trim().to_string();
                let sample = Sample {
                    id: format!("rw-{}", sample.id),
                    word_count: count_words(&text),
                    text: text.clone(),
                    label: 1,
                    source: format!("{REWRITTEN_PREFIX}{}", sample.id),
                    token_count: None,
                };
                return Ok(CheckpointEntry {
                    record: RewriteRecord {
                        source_id: sample.rewrite_source_id().unwrap().to_string(),
                        request_prompt: prompt,
                        response_text: text,
                        latency_ms: started.elapsed().as_millis() as u64,
                        attempt,
                    },
                    sample,
                });
            }
            Ok(_) => last_error = "empty or whitespace-only completion".into(),
            Err(e) => last_error = e.to_string(),
        }
    }
    Err(Error::RewriteFailed {
        source_id: sample.id.clone(),
        attempts,
        detail: last_error,
    })
}

fn send_request(
    client: &reqwest::blocking::Client,
    config: &RewriteConfig,
    api_key: Option<&str>,
    prompt: &str,
) -> Result<String> {
    let body = ChatRequest {
        model: &config.model_name,
        temperature: config.temperature,
        messages: [ChatMessage {
            role: "user",
            content: prompt,
        }],
    };
    let mut request = client.post(&config.endpoint_url).json(&body);
    if let Some(key) = api_key {
        request = request.bearer_auth(key);
    }
    let response: ChatResponse = request.send()?.error_for_status()?.json()?;
    Ok(response
        .choices
        .into_iter()
        .next()
        .map(|c| c.message.content)
        .unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prompt_ends_with_the_untouched_excerpt() {
        let prompt = build_prompt("She left.").unwrap();
        assert!(prompt.ends_with("Text excerpt:'' She left."));
        assert!(prompt.starts_with("You will take the role of an author of crime novels."));
    }

    #[test]
    fn prompt_carries_the_space_counting_instruction() {
        let prompt = build_prompt("Anything at all.").unwrap();
        assert!(prompt.contains("approximately the same number of spaces"));
    }

    #[test]
    fn prompt_is_byte_stable() {
        assert_eq!(
            build_prompt("The same text.").unwrap(),
            build_prompt("The same text.").unwrap()
        );
    }

    #[test]
    fn empty_excerpt_is_rejected() {
        assert!(matches!(build_prompt(""), Err(Error::EmptyExcerpt)));
        assert!(matches!(build_prompt("   "), Err(Error::EmptyExcerpt)));
    }

    #[test]
    fn config_validation() {
        let mut config = RewriteConfig::default();
        assert!(config.validate().is_ok());
        config.temperature = 2.5;
        assert!(config.validate().is_err());
        config.temperature = 0.7;
        config.concurrency_limit = 0;
        assert!(config.validate().is_err());
    }
}
