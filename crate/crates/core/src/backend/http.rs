use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{
    BackendDescriptor, BackendError, ScoredSequence, ScoringBackend, Token, BACKEND_TOKEN_ENV,
};

const RETRIES: u32 = 3;
const BACKOFF_START: Duration = Duration::from_millis(250);
const DEFAULT_TIMEOUT_MS: u64 = 60_000;

/// Client for completions-style endpoints that echo the prompt with
/// per-token logprobs.
///
/// Request: `POST {endpoint}/completions` with
/// `{"model", "prompt", "max_tokens": 0, "echo": true, "logprobs": 1}`.
/// The response must carry, per choice, `logprobs.tokens`,
/// `logprobs.token_logprobs` (nullable numbers) and `logprobs.text_offset`
/// (byte offsets into the prompt). `TAXO_BACKEND_TOKEN` is sent as a bearer
/// token when set. Transport failures are retried 3 times with exponential
/// backoff starting at 250 ms.
pub struct HttpBackend {
    id: String,
    endpoint: String,
    model: String,
    bearer: Option<String>,
    agent: ureq::Agent,
}

#[derive(Serialize)]
struct CompletionsRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    max_tokens: u32,
    echo: bool,
    logprobs: u32,
}

#[derive(Deserialize)]
struct CompletionsResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    logprobs: Option<LogprobBlock>,
}

#[derive(Deserialize)]
struct LogprobBlock {
    tokens: Vec<String>,
    token_logprobs: Vec<Option<f64>>,
    text_offset: Vec<usize>,
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Result<Self, BackendError> {
        Self::with_timeout(endpoint, model, Duration::from_millis(DEFAULT_TIMEOUT_MS))
    }

    pub fn with_timeout(
        endpoint: impl Into<String>,
        model: impl Into<String>,
        timeout: Duration,
    ) -> Result<Self, BackendError> {
        let endpoint = endpoint.into().trim_end_matches('/').to_string();
        if endpoint.is_empty() {
            return Err(BackendError::InvalidDescriptor(
                "http backend needs an endpoint".into(),
            ));
        }
        let model = model.into();
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        Ok(HttpBackend {
            id: format!("http:{model}:{endpoint}"),
            endpoint,
            model,
            bearer: std::env::var(BACKEND_TOKEN_ENV).ok().filter(|t| !t.is_empty()),
            agent,
        })
    }

    pub fn from_descriptor(desc: &BackendDescriptor) -> Result<Self, BackendError> {
        let Some(endpoint) = &desc.endpoint else {
            return Err(BackendError::InvalidDescriptor(
                "http backend needs an endpoint".into(),
            ));
        };
        let timeout_ms = match desc.params.get("timeout_ms") {
            Some(raw) => raw.parse::<u64>().map_err(|_| {
                BackendError::InvalidDescriptor(format!("bad timeout_ms {raw:?}"))
            })?,
            None => DEFAULT_TIMEOUT_MS,
        };
        let mut backend = HttpBackend::with_timeout(
            endpoint.clone(),
            desc.model_name.clone(),
            Duration::from_millis(timeout_ms),
        )?;
        backend.id = desc.id();
        Ok(backend)
    }

    fn url(&self) -> String {
        format!("{}/completions", self.endpoint)
    }

    fn request_once(&self, text: &str) -> Result<CompletionsResponse, AttemptError> {
        let body = CompletionsRequest {
            model: &self.model,
            prompt: text,
            max_tokens: 0,
            echo: true,
            logprobs: 1,
        };
        let mut request = self.agent.post(self.url());
        if let Some(token) = &self.bearer {
            request = request.header("Authorization", &format!("Bearer {token}"));
        }
        let mut response = request.send_json(&body).map_err(|e| match e {
            // 429 and 5xx are worth retrying; other statuses are contract errors
            ureq::Error::StatusCode(code) if code == 429 || code >= 500 => {
                AttemptError::Retriable(format!("status {code}"))
            }
            ureq::Error::StatusCode(code) => {
                AttemptError::Fatal(format!("unexpected status {code}"))
            }
            other => AttemptError::Retriable(other.to_string()),
        })?;
        response
            .body_mut()
            .read_json::<CompletionsResponse>()
            .map_err(|e| AttemptError::Fatal(format!("malformed response body: {e}")))
    }

    fn tokens_from_choice(&self, text: &str, block: LogprobBlock) -> Result<Vec<Token>, BackendError> {
        let LogprobBlock {
            tokens,
            token_logprobs,
            text_offset,
        } = block;
        if tokens.len() != token_logprobs.len() || tokens.len() != text_offset.len() {
            return self.protocol_err(format!(
                "logprob arrays disagree in length: {} tokens, {} logprobs, {} offsets",
                tokens.len(),
                token_logprobs.len(),
                text_offset.len()
            ));
        }
        let mut out = Vec::with_capacity(tokens.len());
        for (i, ((token_text, logprob), &start)) in tokens
            .into_iter()
            .zip(token_logprobs)
            .zip(&text_offset)
            .enumerate()
        {
            let end = text_offset.get(i + 1).copied().unwrap_or(text.len());
            if text.get(start..end) != Some(token_text.as_str()) {
                return self.protocol_err(format!(
                    "token {i} {token_text:?} does not match prompt span {start}..{end}"
                ));
            }
            if let Some(lp) = logprob {
                if !(lp.is_finite() && lp <= 0.0) {
                    return self.protocol_err(format!(
                        "token {i} {token_text:?} has invalid logprob {lp}"
                    ));
                }
            }
            out.push(Token {
                text: token_text,
                start,
                end,
                logprob,
            });
        }
        Ok(out)
    }

    fn protocol_err<T>(&self, reason: String) -> Result<T, BackendError> {
        Err(BackendError::Protocol {
            endpoint: self.endpoint.clone(),
            reason,
        })
    }
}

enum AttemptError {
    Retriable(String),
    Fatal(String),
}

impl ScoringBackend for HttpBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn score_text(&self, text: &str) -> Result<ScoredSequence, BackendError> {
        if text.is_empty() {
            return Err(BackendError::EmptyText);
        }
        let mut backoff = BACKOFF_START;
        let mut attempt = 0;
        let response = loop {
            match self.request_once(text) {
                Ok(response) => break response,
                Err(AttemptError::Fatal(reason)) => {
                    return self.protocol_err(reason);
                }
                Err(AttemptError::Retriable(reason)) => {
                    if attempt >= RETRIES {
                        return Err(BackendError::Transport {
                            endpoint: self.endpoint.clone(),
                            reason: format!("{reason} (after {RETRIES} retries)"),
                        });
                    }
                    log::warn!("backend attempt {attempt} failed ({reason}), retrying");
                    std::thread::sleep(backoff);
                    backoff *= 2;
                    attempt += 1;
                }
            }
        };
        let Some(choice) = response.choices.into_iter().next() else {
            return self.protocol_err("response has no choices".into());
        };
        let Some(block) = choice.logprobs else {
            return self.protocol_err("choice lacks a logprobs block".into());
        };
        let tokens = self.tokens_from_choice(text, block)?;
        let seq = ScoredSequence {
            text: text.to_string(),
            tokens,
        };
        if !seq.spans_are_consistent() {
            return self.protocol_err("token spans do not reassemble the prompt".into());
        }
        Ok(seq)
    }
}
