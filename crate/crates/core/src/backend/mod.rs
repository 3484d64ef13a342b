//! Scoring-backend contract: tokenize a text and return per-token
//! conditional log-probabilities.
//!
//! Three backends are provided: an HTTP client for completions-style
//! endpoints that echo prompt logprobs ([`HttpBackend`]), and two
//! deterministic backends for fixtures and tests ([`TableBackend`],
//! [`UniformBackend`]). All algorithms downstream only see the
//! [`ScoringBackend`] trait, so they never own a tokenizer.

mod http;
mod table;
mod uniform;

pub use http::HttpBackend;
pub use table::TableBackend;
pub use uniform::UniformBackend;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Separator between context prefix and token in table-backend files (U+241E).
pub const TABLE_KEY_SEPARATOR: char = '\u{241E}';

/// Env var holding a bearer token injected into HTTP backend requests.
pub const BACKEND_TOKEN_ENV: &str = "TAXO_BACKEND_TOKEN";

#[derive(Debug, Error)]
pub enum BackendError {
    /// Network or server failure that survived the retry policy.
    #[error("transport failure talking to {endpoint}: {reason}")]
    Transport { endpoint: String, reason: String },
    /// The endpoint answered, but not with the expected shape.
    #[error("protocol error from {endpoint}: {reason}")]
    Protocol { endpoint: String, reason: String },
    /// Table backend had no entry for a token in its context.
    #[error("no table entry for token {token:?} after context {context:?}")]
    MissingEntry { context: String, token: String },
    #[error("invalid backend descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("backend input must be non-empty")]
    EmptyText,
    #[error("failed to read backend data from {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One token of a scored text.
///
/// `start`/`end` are byte offsets into the source string. `logprob` is the
/// natural-log probability of the token given everything before it; `None`
/// marks a token the backend cannot score (typically the first token of an
/// autoregressive model without a BOS convention).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
    pub logprob: Option<f64>,
}

/// A tokenized text with per-token conditional log-probabilities.
///
/// Token spans are non-overlapping, ordered, and concatenate to `text`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSequence {
    pub text: String,
    pub tokens: Vec<Token>,
}

impl ScoredSequence {
    /// Checks the span invariant: tokens tile the whole text in order.
    pub fn spans_are_consistent(&self) -> bool {
        let mut cursor = 0;
        for token in &self.tokens {
            if token.start != cursor || token.end < token.start {
                return false;
            }
            if self.text.get(token.start..token.end) != Some(token.text.as_str()) {
                return false;
            }
            cursor = token.end;
        }
        cursor == self.text.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    Table,
    Uniform,
}

impl std::fmt::Display for BackendKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BackendKind::Http => "http",
            BackendKind::Table => "table",
            BackendKind::Uniform => "uniform",
        })
    }
}

impl std::str::FromStr for BackendKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "http" => Ok(BackendKind::Http),
            "table" => Ok(BackendKind::Table),
            "uniform" => Ok(BackendKind::Uniform),
            other => Err(format!("unknown backend kind {other:?}")),
        }
    }
}

/// Declarative description of a backend, as configured from the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub kind: BackendKind,
    pub endpoint: Option<String>,
    pub model_name: String,
    /// Backend-specific parameters (table: `file`; uniform: `vocab_size`,
    /// `first_token_scored`; http: `first_token_scored`).
    pub params: BTreeMap<String, String>,
}

impl BackendDescriptor {
    pub fn new(kind: BackendKind, model_name: impl Into<String>) -> Self {
        BackendDescriptor {
            kind,
            endpoint: None,
            model_name: model_name.into(),
            params: BTreeMap::new(),
        }
    }

    /// Stable identifier used for cache keying.
    pub fn id(&self) -> String {
        let mut id = format!("{}:{}", self.kind, self.model_name);
        if let Some(endpoint) = &self.endpoint {
            id.push(':');
            id.push_str(endpoint);
        }
        for (k, v) in &self.params {
            id.push_str(&format!(":{k}={v}"));
        }
        id
    }
}

/// The scoring contract. Implementations must be safe for concurrent
/// `score_text` calls.
pub trait ScoringBackend: Send + Sync {
    /// Stable identifier of this backend configuration (cache keying).
    fn id(&self) -> &str;

    /// Tokenizes `text` and returns per-token conditional log-probs.
    ///
    /// Deterministic for a fixed backend: the same text always yields the
    /// same tokenization and scores.
    fn score_text(&self, text: &str) -> Result<ScoredSequence, BackendError>;
}

impl<T: ScoringBackend + ?Sized> ScoringBackend for Box<T> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn score_text(&self, text: &str) -> Result<ScoredSequence, BackendError> {
        (**self).score_text(text)
    }
}

/// Instantiates the backend described by `desc`.
pub fn open_backend(desc: &BackendDescriptor) -> Result<Box<dyn ScoringBackend>, BackendError> {
    match desc.kind {
        BackendKind::Uniform => Ok(Box::new(UniformBackend::from_descriptor(desc)?)),
        BackendKind::Table => Ok(Box::new(TableBackend::from_descriptor(desc)?)),
        BackendKind::Http => Ok(Box::new(HttpBackend::from_descriptor(desc)?)),
    }
}

/// Scores many texts with up to `parallelism` worker threads.
///
/// Output order matches input order regardless of completion order, and each
/// item carries its own success or failure.
pub fn score_batch(
    backend: &dyn ScoringBackend,
    texts: &[String],
    parallelism: usize,
) -> Vec<Result<ScoredSequence, BackendError>> {
    parallel_map(texts, parallelism, |text| backend.score_text(text))
}

/// Index-ordered parallel map over a slice with a bounded worker count.
///
/// Results land at the index of their input item, so the output is
/// deterministic for pure `f` regardless of scheduling.
pub fn parallel_map<T: Sync, R: Send>(
    items: &[T],
    parallelism: usize,
    f: impl Fn(&T) -> R + Sync,
) -> Vec<R> {
    let workers = parallelism.max(1).min(items.len().max(1));
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicU64::new(0);
    let mut slots: Vec<Option<R>> = Vec::with_capacity(items.len());
    slots.resize_with(items.len(), || None);
    let slots_mutex = Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed) as usize;
                if i >= items.len() {
                    break;
                }
                let result = f(&items[i]);
                slots_mutex.lock().expect("worker panicked")[i] = Some(result);
            });
        }
    });
    slots.into_iter().map(|slot| slot.expect("slot filled")).collect()
}

/// Wraps a backend and counts how many `score_text` calls reach it.
///
/// Used to verify cache behavior: a warm cache must produce zero calls.
pub struct CountingBackend<B> {
    inner: B,
    calls: AtomicU64,
}

impl<B: ScoringBackend> CountingBackend<B> {
    pub fn new(inner: B) -> Self {
        CountingBackend {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn into_inner(self) -> B {
        self.inner
    }
}

impl<B: ScoringBackend> ScoringBackend for CountingBackend<B> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn score_text(&self, text: &str) -> Result<ScoredSequence, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.score_text(text)
    }
}

/// Splits `text` into whitespace-word chunks whose concatenation is exactly
/// `text`: each chunk is a run of whitespace glued to the word that follows
/// it, and trailing whitespace sticks to the last chunk.
pub(crate) fn whitespace_chunks(text: &str) -> Vec<(usize, usize)> {
    let bytes = text.as_bytes();
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        spans.push((start, pos));
    }
    // a pure-whitespace tail cannot start a new word chunk; merge it back
    if let (Some(&(start, end)), true) = (spans.last(), spans.len() >= 2) {
        if text[start..end].chars().all(char::is_whitespace) {
            spans.pop();
            spans.last_mut().expect("len checked").1 = end;
        }
    }
    spans
}
