use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::{
    whitespace_chunks, BackendDescriptor, BackendError, ScoredSequence, ScoringBackend, Token,
    TABLE_KEY_SEPARATOR,
};

/// Deterministic fixture backend: logprobs come from a (context, token)
/// lookup table.
///
/// Tokenization is longest-match against the token surface forms appearing
/// in the table keys, with whitespace-chunk fallback for unmatched spans.
/// Scoring then requires an exact (context, token) entry, where the context
/// is the full text preceding the token; a missing entry is an error naming
/// both. A `null` logprob in the table marks a token the backend cannot
/// score (mirrors the first-token convention of echo-logprob APIs).
pub struct TableBackend {
    id: String,
    entries: BTreeMap<(String, String), Option<f64>>,
    /// Token surface forms, longest first for the longest-match scan.
    vocabulary: Vec<String>,
}

impl TableBackend {
    pub fn new(
        id: impl Into<String>,
        entries: impl IntoIterator<Item = ((String, String), Option<f64>)>,
    ) -> Result<Self, BackendError> {
        let entries: BTreeMap<(String, String), Option<f64>> = entries.into_iter().collect();
        for ((context, token), logprob) in &entries {
            if token.is_empty() {
                return Err(BackendError::InvalidDescriptor(format!(
                    "table entry with empty token after context {context:?}"
                )));
            }
            if let Some(lp) = logprob {
                if !(lp.is_finite() && *lp <= 0.0) {
                    return Err(BackendError::InvalidDescriptor(format!(
                        "table logprob for {token:?} must be finite and <= 0, got {lp}"
                    )));
                }
            }
        }
        let mut vocabulary: Vec<String> = entries
            .keys()
            .map(|(_, token)| token.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        vocabulary.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        Ok(TableBackend {
            id: id.into(),
            entries,
            vocabulary,
        })
    }

    /// Builds a backend from convenient (context, token, logprob) triples.
    pub fn from_triples<'a>(
        id: impl Into<String>,
        triples: impl IntoIterator<Item = (&'a str, &'a str, f64)>,
    ) -> Result<Self, BackendError> {
        TableBackend::new(
            id,
            triples
                .into_iter()
                .map(|(c, t, lp)| ((c.to_string(), t.to_string()), Some(lp))),
        )
    }

    /// Loads a JSON map `{"context\u{241E}token": logprob}` file.
    pub fn from_file(path: &Path) -> Result<Self, BackendError> {
        let raw = std::fs::read_to_string(path).map_err(|source| BackendError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let map: BTreeMap<String, Option<f64>> =
            serde_json::from_str(&raw).map_err(|e| BackendError::InvalidDescriptor(format!(
                "table file {} is not a JSON map of key to nullable number: {e}",
                path.display()
            )))?;
        let mut entries = Vec::with_capacity(map.len());
        for (key, logprob) in map {
            let Some((context, token)) = key.split_once(TABLE_KEY_SEPARATOR) else {
                return Err(BackendError::InvalidDescriptor(format!(
                    "table key {key:?} lacks the U+241E context separator"
                )));
            };
            entries.push(((context.to_string(), token.to_string()), logprob));
        }
        TableBackend::new(format!("table:{}", path.display()), entries)
    }

    pub fn from_descriptor(desc: &BackendDescriptor) -> Result<Self, BackendError> {
        let Some(file) = desc.params.get("file") else {
            return Err(BackendError::InvalidDescriptor(
                "table backend needs a file parameter".into(),
            ));
        };
        let mut backend = TableBackend::from_file(Path::new(file))?;
        backend.id = desc.id();
        Ok(backend)
    }

    /// Serializes the table in the file format accepted by
    /// [`TableBackend::from_file`].
    pub fn to_json(&self) -> String {
        let map: BTreeMap<String, Option<f64>> = self
            .entries
            .iter()
            .map(|((c, t), lp)| (format!("{c}{TABLE_KEY_SEPARATOR}{t}"), *lp))
            .collect();
        serde_json::to_string_pretty(&map).expect("table serializes")
    }

    fn next_token(&self, text: &str, pos: usize) -> (usize, usize) {
        let rest = &text[pos..];
        for candidate in &self.vocabulary {
            if rest.starts_with(candidate.as_str()) {
                return (pos, pos + candidate.len());
            }
        }
        // fallback: the next whitespace-glued word chunk
        let (start, end) = whitespace_chunks(rest)[0];
        (pos + start, pos + end)
    }
}

impl ScoringBackend for TableBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn score_text(&self, text: &str) -> Result<ScoredSequence, BackendError> {
        if text.is_empty() {
            return Err(BackendError::EmptyText);
        }
        let mut tokens = Vec::new();
        let mut pos = 0;
        while pos < text.len() {
            let (start, end) = self.next_token(text, pos);
            let context = &text[..start];
            let token_text = &text[start..end];
            let Some(logprob) = self
                .entries
                .get(&(context.to_string(), token_text.to_string()))
            else {
                return Err(BackendError::MissingEntry {
                    context: context.to_string(),
                    token: token_text.to_string(),
                });
            };
            tokens.push(Token {
                text: token_text.to_string(),
                start,
                end,
                logprob: *logprob,
            });
            pos = end;
        }
        Ok(ScoredSequence {
            text: text.to_string(),
            tokens,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn looks_up_context_token_pairs() {
        let backend =
            TableBackend::from_triples("t", [("", "cat", -2.0), ("cat", " sat", -0.5)]).unwrap();
        let seq = backend.score_text("cat sat").unwrap();
        let logprobs: Vec<f64> = seq.tokens.iter().map(|t| t.logprob.unwrap()).collect();
        assert_eq!(logprobs, vec![-2.0, -0.5]);
        assert!(seq.spans_are_consistent());
    }

    #[test]
    fn missing_entry_names_token_and_context() {
        let backend = TableBackend::from_triples("t", [("", "cat", -2.0)]).unwrap();
        match backend.score_text("cat sat") {
            Err(BackendError::MissingEntry { context, token }) => {
                assert_eq!(context, "cat");
                assert_eq!(token, " sat");
            }
            other => panic!("expected missing entry, got {other:?}"),
        }
    }

    #[test]
    fn longest_match_wins() {
        let backend = TableBackend::from_triples(
            "t",
            [("", "cat sat", -1.0), ("", "cat", -2.0), ("cat", " sat", -0.5)],
        )
        .unwrap();
        let seq = backend.score_text("cat sat").unwrap();
        assert_eq!(seq.tokens.len(), 1);
        assert_eq!(seq.tokens[0].logprob, Some(-1.0));
    }

    #[test]
    fn positive_logprob_rejected() {
        assert!(TableBackend::from_triples("t", [("", "cat", 0.1)]).is_err());
    }

    #[test]
    fn file_round_trip() {
        let backend =
            TableBackend::from_triples("t", [("", "cat", -2.0), ("cat", " sat", -0.5)]).unwrap();
        let json = backend.to_json();
        let dir = std::env::temp_dir().join(format!("taxo-table-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("table.json");
        std::fs::write(&path, json).unwrap();
        let loaded = TableBackend::from_file(&path).unwrap();
        assert_eq!(
            loaded.score_text("cat sat").unwrap().tokens,
            backend.score_text("cat sat").unwrap().tokens
        );
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
