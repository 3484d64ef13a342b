//! Full and selective sequence scores, prompt combination, and candidate
//! ranking.
//!
//! All scores are log-space sums of token log-probabilities. The
//! probability form is `exp` of the log score; since `exp` is monotone,
//! rankings computed in log space are identical, and log space does not
//! underflow at realistic sequence lengths.

mod cache;

pub use cache::{CachedScore, ScoreCache, ScoreCacheKey};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{parallel_map, BackendError, ScoredSequence, ScoringBackend};
use crate::metrics::RankedList;
use crate::prompts::{instantiate, PromptError, PromptTemplate, TemplateGroup};

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("no scored tokens in {text:?}")]
    NoScoredTokens { text: String },
    #[error("slot offset {start} is outside the text (length {len})")]
    SlotBeyondText { start: usize, len: usize },
    #[error("selective scoring requires a template with a {{hyper}} slot, got {template_id:?}")]
    IncompatibleMode { template_id: String },
    #[error("cannot combine an empty score list")]
    EmptyCombination,
    #[error("cannot combine scores of different pairs or modes")]
    MixedCombination,
    #[error("cannot combine scores with duplicate template id {0:?}")]
    DuplicateTemplate(String),
    #[error("candidate list must be non-empty and deduplicated: {0}")]
    InvalidCandidates(String),
    #[error("failed to persist cache record: {0}")]
    CacheIo(#[from] std::io::Error),
}

/// Which part of the instantiated prompt is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMode {
    /// Sum over the whole sentence.
    Full,
    /// Sum over the suffix starting at the hypernym slot.
    Selective,
}

impl ScoreMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScoreMode::Full => "full",
            ScoreMode::Selective => "selective",
        }
    }
}

impl std::fmt::Display for ScoreMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ScoreMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(ScoreMode::Full),
            "selective" => Ok(ScoreMode::Selective),
            other => Err(format!("unknown score mode {other:?}")),
        }
    }
}

/// Space in which multi-prompt scores are averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombineSpace {
    /// Arithmetic mean of log scores (geometric mean of probabilities).
    Log,
    /// Mean of probabilities, reported back in log space.
    Prob,
}

impl std::str::FromStr for CombineSpace {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "log" => Ok(CombineSpace::Log),
            "prob" => Ok(CombineSpace::Prob),
            other => Err(format!("unknown combine space {other:?}")),
        }
    }
}

/// Score of one (hyponym, candidate) pair under one prompt or combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub hypo: String,
    /// Absent for co-hyponym prompts, which have no hypernym slot.
    pub hyper: Option<String>,
    pub template_id: String,
    pub mode: ScoreMode,
    /// Log-space score; `exp(log_score)` is the probability-form score.
    pub log_score: f64,
}

/// Sum of token log-probs over all scored tokens of the sequence.
///
/// Tokens the backend could not score (first-token convention) are skipped;
/// a sequence with no scored token at all is an error.
pub fn full_score(seq: &ScoredSequence) -> Result<f64, ScoringError> {
    sum_logprobs(seq, 0)
}

/// Sum of token log-probs from the token containing `hyper_start` to the
/// end of the sequence.
///
/// When the slot starts mid-token (a leading space glued onto the
/// hypernym's first token, say), the whole containing token is included and
/// a warning is logged.
pub fn selective_score(seq: &ScoredSequence, hyper_start: usize) -> Result<f64, ScoringError> {
    if hyper_start >= seq.text.len() {
        return Err(ScoringError::SlotBeyondText {
            start: hyper_start,
            len: seq.text.len(),
        });
    }
    let k = seq
        .tokens
        .iter()
        .position(|t| t.start <= hyper_start && hyper_start < t.end)
        .ok_or(ScoringError::SlotBeyondText {
            start: hyper_start,
            len: seq.text.len(),
        })?;
    if seq.tokens[k].start != hyper_start {
        let prefix = &seq.text[seq.tokens[k].start..hyper_start];
        if prefix.chars().all(char::is_whitespace) {
            // the usual leading-space token convention of subword vocabularies
            log::debug!(
                "slot at {hyper_start} absorbs the leading whitespace of token {:?}",
                seq.tokens[k].text
            );
        } else {
            log::warn!(
                "slot offset {hyper_start} starts mid-token {:?} in {:?}; scoring the whole token",
                seq.tokens[k].text,
                seq.text
            );
        }
    }
    sum_logprobs(seq, k)
}

fn sum_logprobs(seq: &ScoredSequence, from: usize) -> Result<f64, ScoringError> {
    let mut sum = 0.0;
    let mut scored = 0usize;
    for token in &seq.tokens[from..] {
        if let Some(lp) = token.logprob {
            sum += lp;
            scored += 1;
        }
    }
    if scored == 0 {
        return Err(ScoringError::NoScoredTokens {
            text: seq.text.clone(),
        });
    }
    Ok(sum)
}

/// Averages raw log scores in the requested space.
///
/// Log space: arithmetic mean. Prob space: log of the mean probability,
/// computed with log-sum-exp for stability.
pub fn combine_values(space: CombineSpace, values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    match space {
        CombineSpace::Log => values.iter().sum::<f64>() / values.len() as f64,
        CombineSpace::Prob => {
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
            max + sum.ln() - (values.len() as f64).ln()
        }
    }
}

/// Mean of log scores for the same pair under distinct prompts (log space).
pub fn combine_scores(scores: &[PairScore]) -> Result<f64, ScoringError> {
    combine_scores_in(CombineSpace::Log, scores)
}

/// As [`combine_scores`], in an explicit combination space.
pub fn combine_scores_in(space: CombineSpace, scores: &[PairScore]) -> Result<f64, ScoringError> {
    let Some(first) = scores.first() else {
        return Err(ScoringError::EmptyCombination);
    };
    let mut seen = std::collections::HashSet::new();
    for score in scores {
        if score.hypo != first.hypo || score.hyper != first.hyper || score.mode != first.mode {
            return Err(ScoringError::MixedCombination);
        }
        if !seen.insert(score.template_id.as_str()) {
            return Err(ScoringError::DuplicateTemplate(score.template_id.clone()));
        }
    }
    let values: Vec<f64> = scores.iter().map(|s| s.log_score).collect();
    Ok(combine_values(space, &values))
}

/// One prompt row or a combination of rows to score together.
///
/// Each group averages over its surface variants; a combination then
/// averages over its groups. The label mirrors table row captions:
/// `"p1 + p2"` for combinations.
#[derive(Debug, Clone)]
pub struct PromptSelection {
    pub label: String,
    pub groups: Vec<TemplateGroup>,
}

impl PromptSelection {
    pub fn single(group: TemplateGroup) -> Self {
        PromptSelection {
            label: group.id.clone(),
            groups: vec![group],
        }
    }

    pub fn combination(groups: Vec<TemplateGroup>) -> Self {
        let label = groups
            .iter()
            .map(|g| g.id.as_str())
            .collect::<Vec<_>>()
            .join(" + ");
        PromptSelection { label, groups }
    }
}

/// Provides the co-hyponym to augment prompts with, per hyponym word.
pub trait CohypoProvider: Sync {
    fn cohypo_for(&self, word: &str) -> Option<String>;
}

/// Fixed word-to-co-hyponym mapping; handy for tests and precomputed lists.
impl CohypoProvider for std::collections::HashMap<String, String> {
    fn cohypo_for(&self, word: &str) -> Option<String> {
        self.get(word).cloned()
    }
}

/// Ranking plus the candidates that failed to score.
#[derive(Debug)]
pub struct RankedOutcome {
    pub ranking: RankedList,
    pub failures: Vec<(String, ScoringError)>,
}

/// Cache-aware scoring front end over a backend.
pub struct Scorer<'a> {
    backend: &'a dyn ScoringBackend,
    cache: Option<&'a ScoreCache>,
    parallelism: usize,
    lowercase: bool,
    combine_space: CombineSpace,
}

impl<'a> Scorer<'a> {
    pub fn new(backend: &'a dyn ScoringBackend) -> Self {
        Scorer {
            backend,
            cache: None,
            parallelism: 1,
            lowercase: true,
            combine_space: CombineSpace::Log,
        }
    }

    pub fn with_cache(mut self, cache: &'a ScoreCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_parallelism(mut self, parallelism: usize) -> Self {
        self.parallelism = parallelism.max(1);
        self
    }

    /// Lowercase terms before instantiation (reported ids keep their case).
    pub fn with_lowercase(mut self, lowercase: bool) -> Self {
        self.lowercase = lowercase;
        self
    }

    pub fn with_combine_space(mut self, space: CombineSpace) -> Self {
        self.combine_space = space;
        self
    }

    pub fn backend_id(&self) -> &str {
        self.backend.id()
    }

    pub fn combine_space(&self) -> CombineSpace {
        self.combine_space
    }

    fn term(&self, term: &str) -> String {
        if self.lowercase {
            term.to_lowercase()
        } else {
            term.to_string()
        }
    }

    /// Scores one concrete template (cache-aware).
    fn score_template(
        &self,
        template: &PromptTemplate,
        mode: ScoreMode,
        hypo: &str,
        hyper: Option<&str>,
        cohypo: Option<&str>,
    ) -> Result<f64, ScoringError> {
        if mode == ScoreMode::Selective && !template.has_hyper() {
            return Err(ScoringError::IncompatibleMode {
                template_id: template.id.clone(),
            });
        }
        let hypo = self.term(hypo);
        let hyper = hyper.map(|h| self.term(h));
        let cohypo = cohypo.map(|c| self.term(c));
        let instance = instantiate(template, &hypo, hyper.as_deref(), cohypo.as_deref())?;
        let k_char = match mode {
            ScoreMode::Full => None,
            ScoreMode::Selective => instance.hyper_start,
        };
        let key = ScoreCacheKey {
            backend: self.backend.id().to_string(),
            text: instance.text,
            mode,
            k_char,
        };
        if let Some(cache) = self.cache {
            if let Some(hit) = cache.get(&key) {
                return Ok(hit.log_score);
            }
        }
        let seq = self.backend.score_text(&key.text)?;
        let log_score = match mode {
            ScoreMode::Full => full_score(&seq)?,
            ScoreMode::Selective => {
                selective_score(&seq, k_char.expect("selective template has hyper slot"))?
            }
        };
        if let Some(cache) = self.cache {
            cache.put(
                key,
                CachedScore {
                    log_score,
                    token_count: seq.tokens.len(),
                },
            )?;
        }
        Ok(log_score)
    }

    /// Scores one pair under one concrete template (cache-aware).
    pub fn score_pair(
        &self,
        template: &PromptTemplate,
        mode: ScoreMode,
        hypo: &str,
        hyper: Option<&str>,
        cohypo: Option<&str>,
    ) -> Result<PairScore, ScoringError> {
        let log_score = self.score_template(template, mode, hypo, hyper, cohypo)?;
        Ok(PairScore {
            hypo: hypo.to_string(),
            hyper: hyper.map(str::to_string),
            template_id: template.id.clone(),
            mode,
            log_score,
        })
    }

    /// Scores one catalog row: the mean over its surface variants.
    pub fn score_group(
        &self,
        group: &TemplateGroup,
        mode: ScoreMode,
        hypo: &str,
        hyper: Option<&str>,
        cohypo: Option<&str>,
    ) -> Result<PairScore, ScoringError> {
        let mut values = Vec::with_capacity(group.variants.len());
        for template in &group.variants {
            values.push(self.score_template(template, mode, hypo, hyper, cohypo)?);
        }
        Ok(PairScore {
            hypo: hypo.to_string(),
            hyper: hyper.map(str::to_string),
            template_id: group.id.clone(),
            mode,
            log_score: combine_values(self.combine_space, &values),
        })
    }

    /// Scores a prompt selection: the mean over its groups' scores.
    pub fn score_selection(
        &self,
        selection: &PromptSelection,
        mode: ScoreMode,
        hypo: &str,
        hyper: Option<&str>,
        cohypo: Option<&str>,
    ) -> Result<PairScore, ScoringError> {
        let mut values = Vec::with_capacity(selection.groups.len());
        for group in &selection.groups {
            values.push(self.score_group(group, mode, hypo, hyper, cohypo)?.log_score);
        }
        Ok(PairScore {
            hypo: hypo.to_string(),
            hyper: hyper.map(str::to_string),
            template_id: selection.label.clone(),
            mode,
            log_score: combine_values(self.combine_space, &values),
        })
    }

    /// Ranks candidate hypernyms for `hypo`, descending by score with ties
    /// broken by candidate ascending. Failed candidates are reported
    /// alongside the partial ranking.
    pub fn rank_candidates(
        &self,
        selection: &PromptSelection,
        mode: ScoreMode,
        hypo: &str,
        cohypo: Option<&str>,
        candidates: &[String],
    ) -> Result<RankedOutcome, ScoringError> {
        validate_candidates(candidates)?;
        let scored = parallel_map(candidates, self.parallelism, |candidate| {
            self.score_selection(selection, mode, hypo, Some(candidate), cohypo)
        });
        let mut ok = Vec::with_capacity(candidates.len());
        let mut failures = Vec::new();
        for (candidate, result) in candidates.iter().zip(scored) {
            match result {
                Ok(score) => ok.push((candidate.clone(), score.log_score, false)),
                Err(e) => failures.push((candidate.clone(), e)),
            }
        }
        Ok(RankedOutcome {
            ranking: RankedList::from_scored(ok),
            failures,
        })
    }
}

pub(crate) fn validate_candidates(candidates: &[String]) -> Result<(), ScoringError> {
    if candidates.is_empty() {
        return Err(ScoringError::InvalidCandidates("empty list".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for candidate in candidates {
        if !seen.insert(candidate.as_str()) {
            return Err(ScoringError::InvalidCandidates(format!(
                "duplicate candidate {candidate:?}"
            )));
        }
    }
    Ok(())
}
