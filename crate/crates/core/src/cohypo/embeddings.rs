//! Text-format word-vector store with brute-force cosine neighbors.

use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::CohypoError;

/// Immutable word-embedding store.
///
/// File format is the textual word-vector layout: a `count dim` header
/// line, then one `word v1 .. v_dim` line per word. Duplicate words keep
/// their first vector.
pub struct EmbeddingStore {
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f32>,
    dim: usize,
}

impl EmbeddingStore {
    pub fn new(entries: impl IntoIterator<Item = (String, Vec<f32>)>) -> Result<Self, CohypoError> {
        let mut store = EmbeddingStore {
            words: Vec::new(),
            index: HashMap::new(),
            vectors: Vec::new(),
            dim: 0,
        };
        for (word, vector) in entries {
            store.push(word, &vector)?;
        }
        if store.words.is_empty() {
            return Err(CohypoError::EmptyEmbeddings);
        }
        Ok(store)
    }

    fn push(&mut self, word: String, vector: &[f32]) -> Result<(), CohypoError> {
        if self.words.is_empty() {
            self.dim = vector.len();
        } else if vector.len() != self.dim {
            return Err(CohypoError::DimensionMismatch {
                word,
                expected: self.dim,
                found: vector.len(),
            });
        }
        if self.index.contains_key(&word) {
            log::warn!("duplicate embedding for {word:?}; keeping the first");
            return Ok(());
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.vectors.extend_from_slice(vector);
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CohypoError> {
        let file = std::fs::File::open(path).map_err(|source| CohypoError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut lines = BufReader::new(file).lines();
        let header = lines
            .next()
            .transpose()
            .map_err(|source| CohypoError::Io {
                path: path.display().to_string(),
                source,
            })?
            .unwrap_or_default();
        let mut header_fields = header.split_whitespace();
        let (count, dim) = match (
            header_fields.next().and_then(|c| c.parse::<usize>().ok()),
            header_fields.next().and_then(|d| d.parse::<usize>().ok()),
        ) {
            (Some(count), Some(dim)) if header_fields.next().is_none() => (count, dim),
            _ => {
                return Err(CohypoError::BadEmbeddingFile {
                    line: 1,
                    reason: format!("expected 'count dim' header, got {header:?}"),
                })
            }
        };
        let mut store = EmbeddingStore {
            words: Vec::with_capacity(count),
            index: HashMap::with_capacity(count),
            vectors: Vec::with_capacity(count * dim),
            dim,
        };
        for (line_idx, line) in lines.enumerate() {
            let line_no = line_idx + 2;
            let line = line.map_err(|source| CohypoError::Io {
                path: path.display().to_string(),
                source,
            })?;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let vector: Vec<f32> = fields
                .map(|raw| {
                    raw.parse::<f32>().map_err(|_| CohypoError::BadEmbeddingFile {
                        line: line_no,
                        reason: format!("bad float {raw:?}"),
                    })
                })
                .collect::<Result<_, _>>()?;
            if vector.len() != dim {
                return Err(CohypoError::BadEmbeddingFile {
                    line: line_no,
                    reason: format!("expected {dim} values, found {}", vector.len()),
                });
            }
            store.push(word.to_string(), &vector)?;
        }
        if store.words.is_empty() {
            return Err(CohypoError::EmptyEmbeddings);
        }
        Ok(store)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn vector(&self, word: &str) -> Option<&[f32]> {
        self.index
            .get(word)
            .map(|&i| &self.vectors[i * self.dim..(i + 1) * self.dim])
    }

    /// Top-n words by cosine similarity to `target`, excluding the target
    /// itself. Ties order by word ascending. Lookup is case-sensitive.
    pub fn nearest_neighbors(&self, target: &str, n: usize) -> Result<Vec<String>, CohypoError> {
        if n == 0 {
            return Err(CohypoError::InvalidConfig("neighbor count must be >= 1".into()));
        }
        let target_vec = self
            .vector(target)
            .ok_or_else(|| CohypoError::OutOfVocabulary(target.to_string()))?;
        let mut scored: Vec<(f64, &str)> = self
            .words
            .iter()
            .filter(|word| word.as_str() != target)
            .map(|word| {
                let sim = cosine(target_vec, self.vector(word).expect("indexed word"));
                (sim, word.as_str())
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        Ok(scored
            .into_iter()
            .take(n)
            .map(|(_, word)| word.to_string())
            .collect())
    }
}

/// Cosine similarity with f64 accumulation; zero-norm vectors sink to -inf
/// so they never win a neighbor slot.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let mut dot = 0.0f64;
    let mut norm_a = 0.0f64;
    let mut norm_b = 0.0f64;
    for (&x, &y) in a.iter().zip(b) {
        dot += x as f64 * y as f64;
        norm_a += x as f64 * x as f64;
        norm_b += y as f64 * y as f64;
    }
    if norm_a == 0.0 || norm_b == 0.0 {
        return f64::NEG_INFINITY;
    }
    dot / (norm_a.sqrt() * norm_b.sqrt())
}
