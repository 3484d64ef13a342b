use std::collections::HashSet;
use std::path::Path;

use super::CohypoError;

/// Case-insensitive membership set of lemmas, loaded from a plain word-list
/// file (one lemma per line, `#` comments). Point it at a WordNet-derived
/// lemma list for the reference filtering behavior.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    words: HashSet<String>,
}

impl Lexicon {
    pub fn from_words<S: AsRef<str>>(words: impl IntoIterator<Item = S>) -> Self {
        Lexicon {
            words: words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CohypoError> {
        let source = std::fs::read_to_string(path).map_err(|source| CohypoError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Lexicon::from_words(
            source.lines().filter(|l| !l.trim_start().starts_with('#')),
        ))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(&word.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}
