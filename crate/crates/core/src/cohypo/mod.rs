//! Co-hyponym discovery and co-hyponym-augmented prompt construction.
//!
//! The search pipeline has four stages: embedding nearest neighbors,
//! edit-distance filtering of spelling variants, lexicon membership
//! filtering, and a prompt-based rerank with an enumeration prompt. The
//! top reranked word then augments hypernym prompts as extra context, with
//! the hypernym slot pluralized.

mod embeddings;
mod levenshtein;
mod lexicon;

pub use embeddings::{cosine, EmbeddingStore};
pub use levenshtein::levenshtein;
pub use lexicon::Lexicon;

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompts::{instantiate, PromptError, PromptFamily, PromptInstance, TemplateGroup};
use crate::scoring::{CohypoProvider, ScoreMode, Scorer, ScoringError};

#[derive(Debug, Error)]
pub enum CohypoError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("embedding file line {line}: {reason}")]
    BadEmbeddingFile { line: usize, reason: String },
    #[error("embedding store has no vectors")]
    EmptyEmbeddings,
    #[error("embedding for {0:?} not found and no fallback is configured")]
    OutOfVocabulary(String),
    #[error("vector for {word:?} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        word: String,
        expected: usize,
        found: usize,
    },
    #[error("lexicon is empty; filtering needs a word list")]
    EmptyLexicon,
    #[error("invalid pipeline configuration: {0}")]
    InvalidConfig(String),
    #[error("rerank template {0:?} is not a co-hyponym prompt")]
    BadRerankTemplate(String),
    #[error("template {0:?} is not a co-hyponym-augmented prompt")]
    NotAugmentedTemplate(String),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

/// Tunables of the four-stage search.
#[derive(Debug, Clone)]
pub struct CohypoPipelineConfig {
    /// Stage-1 neighbor count.
    pub top_n_neighbors: usize,
    /// Candidates with edit distance below this (case-folded) are spelling
    /// variants and get dropped.
    pub levenshtein_min: usize,
    /// Stage-3 membership list.
    pub lexicon: Lexicon,
    /// Enumeration prompt used for the rerank.
    pub rerank_template: TemplateGroup,
    pub rerank_mode: ScoreMode,
    /// Final list length after rerank.
    pub keep_k: usize,
}

impl CohypoPipelineConfig {
    /// Defaults: 100 neighbors, distance threshold 3, keep 10, full-mode
    /// rerank with the bundled best enumeration prompt.
    pub fn new(lexicon: Lexicon) -> Self {
        let rerank_template = crate::prompts::builtin::cohyponym()
            .into_iter()
            .find(|g| g.id == crate::prompts::builtin::DEFAULT_RERANK_PROMPT)
            .expect("bundled catalog has the default rerank prompt");
        CohypoPipelineConfig {
            top_n_neighbors: 100,
            levenshtein_min: 3,
            lexicon,
            rerank_template,
            rerank_mode: ScoreMode::Full,
            keep_k: 10,
        }
    }

    pub fn validate(&self) -> Result<(), CohypoError> {
        if self.keep_k == 0 {
            return Err(CohypoError::InvalidConfig("keep_k must be >= 1".into()));
        }
        if self.top_n_neighbors < self.keep_k {
            return Err(CohypoError::InvalidConfig(format!(
                "top_n_neighbors ({}) must be >= keep_k ({})",
                self.top_n_neighbors, self.keep_k
            )));
        }
        if self.rerank_template.family() != PromptFamily::Cohyponym {
            return Err(CohypoError::BadRerankTemplate(self.rerank_template.id.clone()));
        }
        Ok(())
    }
}

/// Per-stage candidate lists of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohypoResult {
    pub target: String,
    pub neighbors: Vec<String>,
    pub after_filter: Vec<String>,
    pub reranked: Vec<String>,
}

/// Drops spelling variants (edit distance below the threshold, case-folded)
/// and words absent from the lexicon; input order is preserved.
pub fn filter_candidates(
    target: &str,
    candidates: &[String],
    levenshtein_min: usize,
    lexicon: &Lexicon,
) -> Result<Vec<String>, CohypoError> {
    if lexicon.is_empty() {
        return Err(CohypoError::EmptyLexicon);
    }
    let target_folded = target.to_lowercase();
    Ok(candidates
        .iter()
        .filter(|candidate| {
            levenshtein(&target_folded, &candidate.to_lowercase()) >= levenshtein_min
                && lexicon.contains(candidate)
        })
        .cloned()
        .collect())
}

/// Reranks filtered candidates by enumeration-prompt score with the target
/// as hyponym, keeping the top `keep_k`. Ties order lexicographically.
pub fn rerank_cohyponyms(
    scorer: &Scorer<'_>,
    config: &CohypoPipelineConfig,
    target: &str,
    candidates: &[String],
) -> Result<Vec<String>, CohypoError> {
    config.validate()?;
    let mut scored = Vec::with_capacity(candidates.len());
    for candidate in candidates {
        let score = scorer.score_group(
            &config.rerank_template,
            config.rerank_mode,
            target,
            None,
            Some(candidate),
        )?;
        scored.push((score.log_score, candidate.clone()));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    Ok(scored
        .into_iter()
        .take(config.keep_k)
        .map(|(_, candidate)| candidate)
        .collect())
}

/// Instantiates a co-hyponym-augmented prompt for evaluation with a
/// discovered co-hyponym.
pub fn augment_pair(
    template: &crate::prompts::PromptTemplate,
    hypo: &str,
    hyper: &str,
    cohypo: &str,
) -> Result<PromptInstance, CohypoError> {
    if template.family != PromptFamily::CohypoAugmented {
        return Err(CohypoError::NotAugmentedTemplate(template.id.clone()));
    }
    Ok(instantiate(template, hypo, Some(hyper), Some(cohypo))?)
}

/// Runs all four stages for one target word.
pub fn run_pipeline(
    store: &EmbeddingStore,
    scorer: &Scorer<'_>,
    config: &CohypoPipelineConfig,
    target: &str,
) -> Result<CohypoResult, CohypoError> {
    config.validate()?;
    let neighbors = store.nearest_neighbors(target, config.top_n_neighbors)?;
    let after_filter =
        filter_candidates(target, &neighbors, config.levenshtein_min, &config.lexicon)?;
    let reranked = if after_filter.is_empty() {
        Vec::new()
    } else {
        rerank_cohyponyms(scorer, config, target, &after_filter)?
    };
    Ok(CohypoResult {
        target: target.to_string(),
        neighbors,
        after_filter,
        reranked,
    })
}

/// [`CohypoProvider`] backed by the search pipeline, memoizing one
/// discovery per word. Pipeline failures (out-of-vocabulary targets, empty
/// filter output) yield `None` and a warning.
pub struct PipelineCohypoProvider<'a> {
    store: &'a EmbeddingStore,
    scorer: &'a Scorer<'a>,
    config: &'a CohypoPipelineConfig,
    memo: Mutex<HashMap<String, Option<String>>>,
}

impl<'a> PipelineCohypoProvider<'a> {
    pub fn new(
        store: &'a EmbeddingStore,
        scorer: &'a Scorer<'a>,
        config: &'a CohypoPipelineConfig,
    ) -> Self {
        PipelineCohypoProvider {
            store,
            scorer,
            config,
            memo: Mutex::new(HashMap::new()),
        }
    }
}

impl CohypoProvider for PipelineCohypoProvider<'_> {
    fn cohypo_for(&self, word: &str) -> Option<String> {
        if let Some(memoized) = self.memo.lock().expect("memo lock").get(word) {
            return memoized.clone();
        }
        let discovered = match run_pipeline(self.store, self.scorer, self.config, word) {
            Ok(result) => result.reranked.first().cloned(),
            Err(e) => {
                log::warn!("co-hyponym discovery failed for {word:?}: {e}");
                None
            }
        };
        self.memo
            .lock()
            .expect("memo lock")
            .insert(word.to_string(), discovered.clone());
        discovered
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::TableBackend;
    use crate::prompts::{group_catalog, parse_catalog, PromptTemplate};

    fn words(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn filter_drops_spelling_variants_and_non_lexicon_words() {
        let lexicon = Lexicon::from_words(["goldsmith"]);
        let kept = filter_candidates(
            "jeweller",
            &words(&["jeweler", "goldsmith", "Jeweller", "jewler"]),
            3,
            &lexicon,
        )
        .unwrap();
        assert_eq!(kept, ["goldsmith"]);
    }

    #[test]
    fn filter_empty_inputs() {
        let lexicon = Lexicon::from_words(["goldsmith"]);
        assert_eq!(filter_candidates("jeweller", &[], 3, &lexicon).unwrap(), Vec::<String>::new());
        assert!(matches!(
            filter_candidates("jeweller", &words(&["goldsmith"]), 3, &Lexicon::from_words::<&str>([])),
            Err(CohypoError::EmptyLexicon)
        ));
    }

    #[test]
    fn filter_removes_the_target_itself() {
        let lexicon = Lexicon::from_words(["jeweller", "goldsmith"]);
        let kept =
            filter_candidates("jeweller", &words(&["jeweller", "goldsmith"]), 3, &lexicon).unwrap();
        assert_eq!(kept, ["goldsmith"]);
    }

    #[test]
    fn filter_is_idempotent() {
        let lexicon = Lexicon::from_words(["goldsmith", "watchmaker", "silversmith"]);
        let input = words(&["jeweler", "goldsmith", "watchmaker", "silversmith", "goldsmyth"]);
        let once = filter_candidates("jeweller", &input, 3, &lexicon).unwrap();
        let twice = filter_candidates("jeweller", &once, 3, &lexicon).unwrap();
        assert_eq!(once, twice);
    }

    fn rerank_fixture() -> (TableBackend, CohypoPipelineConfig) {
        // single-token sentences for the default rerank prompt, full mode
        let sent = |cohypo: &str| {
            format!("such as jeweller, {cohypo} and other of the same type")
        };
        let backend = TableBackend::new(
            "rerank-fixture",
            [
                ((String::new(), sent("watchmaker")), Some(-11.0)),
                ((String::new(), sent("goldsmith")), Some(-14.0)),
                ((String::new(), sent("silversmith")), Some(-17.0)),
            ],
        )
        .unwrap();
        let mut config =
            CohypoPipelineConfig::new(Lexicon::from_words(["goldsmith", "watchmaker", "silversmith"]));
        config.keep_k = 3;
        config.top_n_neighbors = 10;
        (backend, config)
    }

    #[test]
    fn rerank_orders_by_prompt_score() {
        let (backend, config) = rerank_fixture();
        let scorer = Scorer::new(&backend);
        let reranked = rerank_cohyponyms(
            &scorer,
            &config,
            "jeweller",
            &words(&["goldsmith", "silversmith", "watchmaker"]),
        )
        .unwrap();
        assert_eq!(reranked, ["watchmaker", "goldsmith", "silversmith"]);
    }

    #[test]
    fn rerank_keep_k_one_is_singleton() {
        let (backend, mut config) = rerank_fixture();
        config.keep_k = 1;
        let scorer = Scorer::new(&backend);
        let reranked =
            rerank_cohyponyms(&scorer, &config, "jeweller", &words(&["goldsmith", "watchmaker"]))
                .unwrap();
        assert_eq!(reranked, ["watchmaker"]);
    }

    #[test]
    fn rerank_equal_scores_tie_lexicographically() {
        let sent = |c: &str| format!("such as jeweller, {c} and other of the same type");
        let backend = TableBackend::new(
            "tie",
            [
                ((String::new(), sent("zephyr")), Some(-5.0)),
                ((String::new(), sent("aardvark")), Some(-5.0)),
            ],
        )
        .unwrap();
        let (_, config) = rerank_fixture();
        let scorer = Scorer::new(&backend);
        let reranked =
            rerank_cohyponyms(&scorer, &config, "jeweller", &words(&["zephyr", "aardvark"]))
                .unwrap();
        assert_eq!(reranked, ["aardvark", "zephyr"]);
    }

    #[test]
    fn rerank_rejects_non_cohyponym_template() {
        let (backend, mut config) = rerank_fixture();
        config.rerank_template =
            group_catalog(&parse_catalog("h\t{hypo} is a {hyper}\n").unwrap())[0].clone();
        let scorer = Scorer::new(&backend);
        assert!(matches!(
            rerank_cohyponyms(&scorer, &config, "jeweller", &words(&["goldsmith"])),
            Err(CohypoError::BadRerankTemplate(_))
        ));
    }

    #[test]
    fn augment_pair_builds_plural_instance() {
        let template =
            PromptTemplate::new("a", "{hypo}, {cohypo} are an {hyper} that", true).unwrap();
        let instance = augment_pair(&template, "hornet", "insect", "wasp").unwrap();
        assert_eq!(instance.text, "hornet, wasp are an insects that");
        let template2 =
            PromptTemplate::new("b", "{hypo}, {cohypo} or any other {hyper}", true).unwrap();
        let instance2 = augment_pair(&template2, "dagger", "weapon", "sword").unwrap();
        assert_eq!(instance2.text, "dagger, sword or any other weapons");
    }

    #[test]
    fn augment_pair_rejects_wrong_family_and_missing_cohypo() {
        let plain = PromptTemplate::new("p", "{hypo} is a {hyper}", false).unwrap();
        assert!(matches!(
            augment_pair(&plain, "hornet", "insect", "wasp"),
            Err(CohypoError::NotAugmentedTemplate(_))
        ));
        let augmented =
            PromptTemplate::new("a", "{hypo}, {cohypo} are an {hyper} that", true).unwrap();
        assert!(matches!(
            instantiate(&augmented, "hornet", Some("insect"), None),
            Err(PromptError::MissingArgument("cohypo"))
        ));
    }

    #[test]
    fn pipeline_stage_containment() {
        let store = EmbeddingStore::new([
            ("jeweller".to_string(), vec![1.0, 0.0]),
            ("jeweler".to_string(), vec![0.99, 0.01]),
            ("goldsmith".to_string(), vec![0.9, 0.1]),
            ("watchmaker".to_string(), vec![0.8, 0.2]),
            ("silversmith".to_string(), vec![0.7, 0.3]),
            ("banana".to_string(), vec![0.0, 1.0]),
        ])
        .unwrap();
        let (backend, mut config) = rerank_fixture();
        config.top_n_neighbors = 5;
        let scorer = Scorer::new(&backend);
        let result = run_pipeline(&store, &scorer, &config, "jeweller").unwrap();
        assert_eq!(result.neighbors.len(), 5);
        for word in &result.after_filter {
            assert!(result.neighbors.contains(word));
        }
        for word in &result.reranked {
            assert!(result.after_filter.contains(word));
        }
        // "jeweler" survives stage 1 but not the distance filter
        assert!(result.neighbors.contains(&"jeweler".to_string()));
        assert!(!result.after_filter.contains(&"jeweler".to_string()));
        assert_eq!(result.reranked.first().map(String::as_str), Some("watchmaker"));
    }

    #[test]
    fn provider_memoizes_and_survives_oov() {
        let store = EmbeddingStore::new([
            ("jeweller".to_string(), vec![1.0, 0.0]),
            ("goldsmith".to_string(), vec![0.9, 0.1]),
            ("watchmaker".to_string(), vec![0.8, 0.2]),
        ])
        .unwrap();
        let (backend, mut config) = rerank_fixture();
        config.top_n_neighbors = 2;
        config.keep_k = 2;
        let scorer = Scorer::new(&backend);
        let provider = PipelineCohypoProvider::new(&store, &scorer, &config);
        assert_eq!(provider.cohypo_for("jeweller").as_deref(), Some("watchmaker"));
        assert_eq!(provider.cohypo_for("jeweller").as_deref(), Some("watchmaker"));
        assert_eq!(provider.cohypo_for("missing-word"), None);
    }
}
