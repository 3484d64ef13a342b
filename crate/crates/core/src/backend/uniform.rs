use super::{whitespace_chunks, BackendDescriptor, BackendError, ScoredSequence, ScoringBackend, Token};

/// Deterministic test backend: whitespace tokenization, every scored token
/// gets logprob `-ln(vocab_size)`.
///
/// `first_token_scored` mimics autoregressive scorers that cannot assign a
/// conditional probability to position 1: when false, the first token's
/// logprob is reported as absent.
pub struct UniformBackend {
    id: String,
    vocab_size: u64,
    first_token_scored: bool,
}

impl UniformBackend {
    pub fn new(vocab_size: u64, first_token_scored: bool) -> Result<Self, BackendError> {
        if vocab_size == 0 {
            return Err(BackendError::InvalidDescriptor(
                "uniform backend needs vocab_size >= 1".into(),
            ));
        }
        let id = format!("uniform:v{vocab_size}:first={first_token_scored}");
        Ok(UniformBackend {
            id,
            vocab_size,
            first_token_scored,
        })
    }

    pub fn from_descriptor(desc: &BackendDescriptor) -> Result<Self, BackendError> {
        let vocab_size = match desc.params.get("vocab_size") {
            Some(raw) => raw.parse::<u64>().map_err(|_| {
                BackendError::InvalidDescriptor(format!("bad vocab_size {raw:?}"))
            })?,
            None => {
                return Err(BackendError::InvalidDescriptor(
                    "uniform backend needs a vocab_size parameter".into(),
                ))
            }
        };
        let first_token_scored = match desc.params.get("first_token_scored") {
            Some(raw) => raw.parse::<bool>().map_err(|_| {
                BackendError::InvalidDescriptor(format!("bad first_token_scored {raw:?}"))
            })?,
            None => true,
        };
        UniformBackend::new(vocab_size, first_token_scored)
    }
}

impl ScoringBackend for UniformBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn score_text(&self, text: &str) -> Result<ScoredSequence, BackendError> {
        if text.is_empty() {
            return Err(BackendError::EmptyText);
        }
        let logprob = -(self.vocab_size as f64).ln();
        let tokens = whitespace_chunks(text)
            .into_iter()
            .enumerate()
            .map(|(i, (start, end))| Token {
                text: text[start..end].to_string(),
                start,
                end,
                logprob: if i == 0 && !self.first_token_scored {
                    None
                } else {
                    Some(logprob)
                },
            })
            .collect();
        Ok(ScoredSequence {
            text: text.to_string(),
            tokens,
        })
    }
}
