//! Iterative hypernym-chain ranking.
//!
//! Starting from the target word, the algorithm repeatedly promotes the
//! best-ranked unused candidate to be the next scoring pivot, climbing the
//! taxonomy one level per step. Words already selected receive a score of
//! 0.0 (the log-space maximum) in later steps. A step is kept only while
//! the maximum score over non-selected candidates strictly improves on the
//! previous accepted step's maximum; the first failing step is discarded
//! and iteration stops.
//!
//! Two final orderings come out of the accepted steps: by the last accepted
//! step's scores (step last) and by the per-candidate mean over all
//! accepted steps (step mean). Selected words carry 0.0 in both, so they
//! rank above every candidate with negative scores.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::parallel_map;
use crate::datasets::TargetPool;
use crate::metrics::{average_precision, MetricError, RankedList};
use crate::scoring::{CohypoProvider, PromptSelection, ScoreMode, Scorer, ScoringError};

pub const DEFAULT_MAX_STEPS: usize = 10;

#[derive(Debug, Error)]
pub enum IterativeError {
    #[error("invalid iterative input: {0}")]
    InvalidInput(String),
    /// A scoring failure aborts the run; the trace holds everything scored
    /// before the failure, with final rankings over the accepted steps.
    #[error("scoring {candidate:?} with pivot {pivot:?} for target {target:?} failed: {source}")]
    Aborted {
        target: String,
        pivot: String,
        candidate: String,
        #[source]
        source: Box<ScoringError>,
        partial: Box<IterationTrace>,
    },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// One scoring pass with a fixed pivot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationStep {
    /// The word used as hyponym this step (the target at step 0).
    pub pivot: String,
    /// Candidate scores; words selected before this step hold exactly 0.0.
    pub scores: BTreeMap<String, f64>,
    /// Maximum over candidates that are not selected (including this
    /// step's pivot); drives the stopping criterion.
    pub max_score_excl_selected: f64,
    pub accepted: bool,
}

/// Full record of one iterative run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub target: String,
    pub candidates: Vec<String>,
    /// Step 0 first; at most the last step is rejected.
    pub steps: Vec<IterationStep>,
    /// Pivots in selection order (w1, w2, ...); a pivot whose step was
    /// rejected still appears here.
    pub selected: Vec<String>,
    pub final_ranking_last: RankedList,
    pub final_ranking_mean: RankedList,
}

impl IterationTrace {
    /// Ranking by step-0 scores alone (what a plain prompt run produces).
    pub fn step0_ranking(&self) -> RankedList {
        match self.steps.first() {
            Some(step) => RankedList::from_scored(
                step.scores.iter().map(|(c, &s)| (c.clone(), s, false)),
            ),
            None => RankedList::from_scored(std::iter::empty()),
        }
    }
}

struct StepScorer<'a> {
    scorer: &'a Scorer<'a>,
    selection: &'a PromptSelection,
    mode: ScoreMode,
    cohypos: Option<&'a dyn CohypoProvider>,
}

impl StepScorer<'_> {
    /// Scores every candidate outside `skip` with `pivot` as hyponym;
    /// skipped words get 0.0 without a backend call.
    fn score_step(
        &self,
        pivot: &str,
        candidates: &[String],
        skip: &BTreeSet<String>,
    ) -> Result<BTreeMap<String, f64>, (String, ScoringError)> {
        let cohypo = self.cohypos.and_then(|p| p.cohypo_for(pivot));
        let to_score: Vec<&String> = candidates.iter().filter(|c| !skip.contains(*c)).collect();
        let results = parallel_map(&to_score, self.scorer_parallelism(), |candidate| {
            self.scorer
                .score_selection(
                    self.selection,
                    self.mode,
                    pivot,
                    Some(candidate),
                    cohypo.as_deref(),
                )
                .map(|s| s.log_score)
        });
        let mut scores: BTreeMap<String, f64> =
            skip.iter().map(|w| (w.clone(), 0.0)).collect();
        for (candidate, result) in to_score.into_iter().zip(results) {
            match result {
                Ok(score) => {
                    scores.insert(candidate.clone(), score);
                }
                Err(e) => return Err((candidate.clone(), e)),
            }
        }
        Ok(scores)
    }

    fn scorer_parallelism(&self) -> usize {
        // candidate scoring within a step can parallelize; steps cannot
        8
    }
}

/// Runs the iterative algorithm for one target.
///
/// `max_steps` bounds the total number of scoring passes including step 0;
/// `max_steps = 1` degenerates to a plain ranking. `cohypos` supplies the
/// co-hyponym for augmented prompt selections, queried once per pivot.
pub fn run_iterative(
    scorer: &Scorer<'_>,
    selection: &PromptSelection,
    mode: ScoreMode,
    target: &str,
    candidates: &[String],
    max_steps: usize,
    cohypos: Option<&dyn CohypoProvider>,
) -> Result<IterationTrace, IterativeError> {
    if max_steps == 0 {
        return Err(IterativeError::InvalidInput("max_steps must be >= 1".into()));
    }
    if candidates.is_empty() {
        return Err(IterativeError::InvalidInput("empty candidate list".into()));
    }
    {
        let mut seen = BTreeSet::new();
        for candidate in candidates {
            if candidate == target {
                return Err(IterativeError::InvalidInput(format!(
                    "candidate list contains the target {target:?}"
                )));
            }
            if !seen.insert(candidate) {
                return Err(IterativeError::InvalidInput(format!(
                    "duplicate candidate {candidate:?}"
                )));
            }
        }
    }

    let step_scorer = StepScorer {
        scorer,
        selection,
        mode,
        cohypos,
    };
    let mut steps: Vec<IterationStep> = Vec::new();
    let mut selected: Vec<String> = Vec::new();

    let abort = |steps: Vec<IterationStep>,
                 selected: Vec<String>,
                 pivot: String,
                 candidate: String,
                 source: ScoringError| {
        let partial = finish_trace(target, candidates, steps, selected);
        IterativeError::Aborted {
            target: target.to_string(),
            pivot,
            candidate,
            source: Box::new(source),
            partial: Box::new(partial),
        }
    };

    // step 0: plain scoring with the target as hyponym, always accepted
    let step0_scores = match step_scorer.score_step(target, candidates, &BTreeSet::new()) {
        Ok(scores) => scores,
        Err((candidate, source)) => {
            return Err(abort(steps, selected, target.to_string(), candidate, source))
        }
    };
    let mut prev_max = max_excluding(&step0_scores, &BTreeSet::new());
    steps.push(IterationStep {
        pivot: target.to_string(),
        scores: step0_scores,
        max_score_excl_selected: prev_max,
        accepted: true,
    });

    while steps.len() < max_steps {
        // 2a: rank by mean of accepted-step scores (all steps so far)
        let Some(pivot) = pick_pivot(&steps, candidates, &selected) else {
            break;
        };
        selected.push(pivot.clone());
        // 2c: previously selected words (the new pivot excluded) take 0.0
        let previously_selected: BTreeSet<String> =
            selected[..selected.len() - 1].iter().cloned().collect();
        let scores = match step_scorer.score_step(&pivot, candidates, &previously_selected) {
            Ok(scores) => scores,
            Err((candidate, source)) => {
                return Err(abort(steps, selected, pivot, candidate, source))
            }
        };
        // 2d: the new maximum (ignoring every selected word, pivot included)
        // must strictly exceed the previous accepted step's maximum
        let selected_set: BTreeSet<String> = selected.iter().cloned().collect();
        let max_excl = max_excluding(&scores, &selected_set);
        let accepted = max_excl > prev_max;
        steps.push(IterationStep {
            pivot,
            scores,
            max_score_excl_selected: max_excl,
            accepted,
        });
        if !accepted {
            break;
        }
        prev_max = max_excl;
    }

    Ok(finish_trace(target, candidates, steps, selected))
}

fn max_excluding(scores: &BTreeMap<String, f64>, excluded: &BTreeSet<String>) -> f64 {
    scores
        .iter()
        .filter(|(word, _)| !excluded.contains(*word))
        .map(|(_, &score)| score)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn pick_pivot(
    steps: &[IterationStep],
    candidates: &[String],
    selected: &[String],
) -> Option<String> {
    let mut best: Option<(f64, &String)> = None;
    for candidate in candidates {
        if selected.contains(candidate) {
            continue;
        }
        let mean = mean_over_steps(steps, candidate, |_| true);
        let better = match best {
            None => true,
            Some((best_mean, best_word)) => {
                mean > best_mean || (mean == best_mean && candidate < best_word)
            }
        };
        if better {
            best = Some((mean, candidate));
        }
    }
    best.map(|(_, word)| word.clone())
}

fn mean_over_steps(
    steps: &[IterationStep],
    candidate: &str,
    keep: impl Fn(&IterationStep) -> bool,
) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for step in steps.iter().filter(|s| keep(s)) {
        sum += step.scores.get(candidate).copied().unwrap_or(0.0);
        n += 1;
    }
    if n == 0 {
        f64::NEG_INFINITY
    } else {
        sum / n as f64
    }
}

/// Builds the final rankings over the accepted steps. Selected words carry
/// 0.0, the log-space maximum, in both rankings.
fn finish_trace(
    target: &str,
    candidates: &[String],
    steps: Vec<IterationStep>,
    selected: Vec<String>,
) -> IterationTrace {
    let accepted: Vec<&IterationStep> = steps.iter().filter(|s| s.accepted).collect();
    let selected_set: BTreeSet<&String> = selected.iter().collect();
    let score_of = |candidate: &String, last_only: bool| -> f64 {
        if selected_set.contains(candidate) {
            return 0.0;
        }
        if last_only {
            accepted
                .last()
                .and_then(|s| s.scores.get(candidate).copied())
                .unwrap_or(f64::NEG_INFINITY)
        } else {
            mean_over_steps(&steps, candidate, |s| s.accepted)
        }
    };
    let ranking = |last_only: bool| {
        RankedList::from_scored(
            candidates
                .iter()
                .map(|c| (c.clone(), score_of(c, last_only), false)),
        )
    };
    let (final_ranking_last, final_ranking_mean) = if accepted.is_empty() {
        let empty = RankedList::from_scored(std::iter::empty());
        (empty.clone(), empty)
    } else {
        (ranking(true), ranking(false))
    };
    IterationTrace {
        target: target.to_string(),
        candidates: candidates.to_vec(),
        steps,
        selected,
        final_ranking_last,
        final_ranking_mean,
    }
}

/// Per-target APs of the three rankings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterativeTargetEval {
    pub target: String,
    pub ap_step0: f64,
    pub ap_last: f64,
    pub ap_mean: f64,
}

/// MAP columns of an iterative run, side by side: plain step-0 ranking,
/// step-last, and step-mean.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterativeEval {
    pub map_step0: f64,
    pub map_last: f64,
    pub map_mean: f64,
    pub n_targets: usize,
    pub per_target: Vec<IterativeTargetEval>,
    #[serde(skip)]
    pub traces: Vec<IterationTrace>,
}

/// Runs the iterative algorithm for every pool and aggregates MAP per
/// ranking flavor. Only MAP applies: the re-ranking is per target word.
pub fn evaluate_iterative(
    scorer: &Scorer<'_>,
    selection: &PromptSelection,
    mode: ScoreMode,
    pools: &[TargetPool],
    max_steps: usize,
    cohypos: Option<&dyn CohypoProvider>,
) -> Result<IterativeEval, IterativeError> {
    if pools.is_empty() {
        return Err(IterativeError::InvalidInput("no target pools".into()));
    }
    let mut per_target = Vec::with_capacity(pools.len());
    let mut traces = Vec::with_capacity(pools.len());
    for pool in pools {
        let trace = run_iterative(
            scorer,
            selection,
            mode,
            &pool.target,
            &pool.candidates,
            max_steps,
            cohypos,
        )?;
        let gold = pool.gold.iter().map(String::as_str);
        let ap = |list: &RankedList| -> Result<f64, MetricError> {
            average_precision(&list.with_labels(gold.clone()))
        };
        per_target.push(IterativeTargetEval {
            target: pool.target.clone(),
            ap_step0: ap(&trace.step0_ranking())?,
            ap_last: ap(&trace.final_ranking_last)?,
            ap_mean: ap(&trace.final_ranking_mean)?,
        });
        traces.push(trace);
    }
    let n = per_target.len() as f64;
    Ok(IterativeEval {
        map_step0: per_target.iter().map(|t| t.ap_step0).sum::<f64>() / n,
        map_last: per_target.iter().map(|t| t.ap_last).sum::<f64>() / n,
        map_mean: per_target.iter().map(|t| t.ap_mean).sum::<f64>() / n,
        n_targets: per_target.len(),
        per_target,
        traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::TableBackend;
    use crate::prompts::{group_catalog, parse_catalog};

    const TEMPLATE: &str = "p\t{hypo} or some other {hyper}\n";

    fn selection() -> PromptSelection {
        PromptSelection::single(group_catalog(&parse_catalog(TEMPLATE).unwrap())[0].clone())
    }

    fn sentence(pivot: &str, candidate: &str) -> String {
        format!("{pivot} or some other {candidate}")
    }

    /// Single-token sentence scores reproducing the published walk-through:
    /// step-0 max -34.64 (insect), step-1 max -29.78 (accepted), step-2
    /// accepted, step-3 rejected.
    pub(crate) fn hornet_entries() -> Vec<(String, f64)> {
        let mut entries = Vec::new();
        let mut add = |pivot: &str, candidate: &str, score: f64| {
            entries.push((sentence(pivot, candidate), score));
        };
        add("hornet", "insect", -34.64);
        add("hornet", "object", -35.0);
        add("hornet", "arthropod", -35.5);
        add("hornet", "animal", -36.0);
        add("hornet", "creature", -36.5);
        add("hornet", "furniture", -38.0);

        add("insect", "insect", -33.0);
        add("insect", "animal", -29.78);
        add("insect", "creature", -30.5);
        add("insect", "arthropod", -31.0);
        add("insect", "object", -36.5);
        add("insect", "furniture", -37.0);

        add("animal", "insect", -40.0);
        add("animal", "animal", -30.0);
        add("animal", "creature", -28.4);
        add("animal", "arthropod", -29.0);
        add("animal", "object", -35.5);
        add("animal", "furniture", -36.0);

        add("creature", "insect", -40.0);
        add("creature", "animal", -40.0);
        add("creature", "creature", -29.5);
        add("creature", "arthropod", -29.2);
        add("creature", "object", -34.0);
        add("creature", "furniture", -35.5);
        entries
    }

    fn hornet_backend() -> TableBackend {
        TableBackend::from_triples(
            "hornet-fixture",
            hornet_entries()
                .iter()
                .map(|(s, lp)| ("", s.as_str(), *lp))
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    fn hornet_candidates() -> Vec<String> {
        ["insect", "animal", "creature", "arthropod", "object", "furniture"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    #[test]
    fn hornet_walkthrough() {
        let backend = hornet_backend();
        let scorer = Scorer::new(&backend);
        let trace = run_iterative(
            &scorer,
            &selection(),
            ScoreMode::Full,
            "hornet",
            &hornet_candidates(),
            DEFAULT_MAX_STEPS,
            None,
        )
        .unwrap();

        assert_eq!(trace.selected, ["insect", "animal", "creature"]);
        assert_eq!(trace.steps.len(), 4);
        assert!((trace.steps[0].max_score_excl_selected - -34.64).abs() < 1e-12);
        assert!((trace.steps[1].max_score_excl_selected - -29.78).abs() < 1e-12);
        assert!(trace.steps[0].accepted && trace.steps[1].accepted && trace.steps[2].accepted);
        assert!(!trace.steps[3].accepted, "step 3 must fail the criterion");

        // previously selected words carry exactly 0.0 in later step maps
        assert_eq!(trace.steps[2].scores["insect"], 0.0);
        assert_eq!(trace.steps[3].scores["insect"], 0.0);
        assert_eq!(trace.steps[3].scores["animal"], 0.0);

        // selected words outrank everything in both final rankings
        for ranking in [&trace.final_ranking_last, &trace.final_ranking_mean] {
            let ids: Vec<&str> = ranking.items().iter().map(|i| i.id.as_str()).collect();
            assert_eq!(&ids[..3], &["animal", "creature", "insect"], "{ids:?}");
        }
        let mean_ids: Vec<&str> = trace
            .final_ranking_mean
            .items()
            .iter()
            .map(|i| i.id.as_str())
            .collect();
        assert_eq!(
            mean_ids,
            ["animal", "creature", "insect", "arthropod", "object", "furniture"]
        );
    }

    #[test]
    fn max_steps_one_equals_plain_ranking() {
        let backend = hornet_backend();
        let scorer = Scorer::new(&backend);
        let candidates = hornet_candidates();
        let trace = run_iterative(
            &scorer,
            &selection(),
            ScoreMode::Full,
            "hornet",
            &candidates,
            1,
            None,
        )
        .unwrap();
        assert_eq!(trace.steps.len(), 1);
        assert!(trace.selected.is_empty());
        let plain = scorer
            .rank_candidates(&selection(), ScoreMode::Full, "hornet", None, &candidates)
            .unwrap()
            .ranking;
        // bitwise score equality with the plain ranking
        assert_eq!(trace.final_ranking_last, plain);
        assert_eq!(trace.final_ranking_mean, plain);
        assert_eq!(trace.step0_ranking(), plain);
    }

    #[test]
    fn immediate_rejection_keeps_step0_ranking() {
        // step 1's best is worse than step 0's: loop stops at once
        let sentences = [
            (sentence("t", "a"), -1.0),
            (sentence("t", "b"), -2.0),
            (sentence("a", "a"), -9.0),
            (sentence("a", "b"), -9.0),
        ];
        let backend = TableBackend::from_triples(
            "flat",
            sentences.iter().map(|(s, lp)| ("", s.as_str(), *lp)),
        )
        .unwrap();
        let scorer = Scorer::new(&backend);
        let candidates = vec!["a".to_string(), "b".to_string()];
        let trace = run_iterative(
            &scorer,
            &selection(),
            ScoreMode::Full,
            "t",
            &candidates,
            DEFAULT_MAX_STEPS,
            None,
        )
        .unwrap();
        assert_eq!(trace.steps.len(), 2);
        assert!(!trace.steps[1].accepted);
        assert_eq!(trace.selected, ["a"]);
        // only the selected pivot is lifted; ranking otherwise matches step 0
        let ids: Vec<&str> = trace
            .final_ranking_mean
            .items()
            .iter()
            .map(|i| i.id.as_str())
            .collect();
        assert_eq!(ids, ["a", "b"]);
    }

    #[test]
    fn accepted_maxima_strictly_increase() {
        let backend = hornet_backend();
        let scorer = Scorer::new(&backend);
        let trace = run_iterative(
            &scorer,
            &selection(),
            ScoreMode::Full,
            "hornet",
            &hornet_candidates(),
            DEFAULT_MAX_STEPS,
            None,
        )
        .unwrap();
        let maxima: Vec<f64> = trace
            .steps
            .iter()
            .filter(|s| s.accepted)
            .map(|s| s.max_score_excl_selected)
            .collect();
        assert!(maxima.windows(2).all(|w| w[0] < w[1]), "{maxima:?}");
    }

    #[test]
    fn determinism() {
        let backend = hornet_backend();
        let scorer = Scorer::new(&backend).with_parallelism(4);
        let run = || {
            run_iterative(
                &scorer,
                &selection(),
                ScoreMode::Full,
                "hornet",
                &hornet_candidates(),
                DEFAULT_MAX_STEPS,
                None,
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn input_validation() {
        let backend = hornet_backend();
        let scorer = Scorer::new(&backend);
        let err = run_iterative(
            &scorer,
            &selection(),
            ScoreMode::Full,
            "hornet",
            &[],
            1,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, IterativeError::InvalidInput(_)));
        let with_target = vec!["hornet".to_string()];
        assert!(matches!(
            run_iterative(&scorer, &selection(), ScoreMode::Full, "hornet", &with_target, 1, None),
            Err(IterativeError::InvalidInput(_))
        ));
    }

    #[test]
    fn scoring_failure_aborts_with_partial_trace() {
        // table lacks all pivot=insect entries: step 1 must abort
        let backend = TableBackend::from_triples(
            "partial",
            [
                ("", sentence("hornet", "insect").as_str(), -3.0),
                ("", sentence("hornet", "animal").as_str(), -4.0),
            ],
        )
        .unwrap();
        let scorer = Scorer::new(&backend);
        let candidates = vec!["insect".to_string(), "animal".to_string()];
        let err = run_iterative(
            &scorer,
            &selection(),
            ScoreMode::Full,
            "hornet",
            &candidates,
            DEFAULT_MAX_STEPS,
            None,
        )
        .unwrap_err();
        match err {
            IterativeError::Aborted { pivot, partial, .. } => {
                assert_eq!(pivot, "insect");
                assert_eq!(partial.steps.len(), 1);
                assert_eq!(partial.step0_ranking().items()[0].id, "insect");
            }
            other => panic!("expected abort, got {other}"),
        }
    }

    #[test]
    fn selected_word_dominance_on_random_fixtures() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(99);
        for round in 0..25 {
            let n = rng.random_range(2..=6usize);
            let candidates: Vec<String> = (0..n).map(|i| format!("word{i}")).collect();
            // complete cross product of strictly negative scores, so every
            // pivot choice has a scorable step
            let mut entries = Vec::new();
            for pivot in std::iter::once("target").chain(candidates.iter().map(String::as_str)) {
                for candidate in &candidates {
                    entries.push((sentence(pivot, candidate), -rng.random_range(0.5..60.0)));
                }
            }
            let backend = TableBackend::from_triples(
                "random",
                entries.iter().map(|(s, lp)| ("", s.as_str(), *lp)),
            )
            .unwrap();
            let scorer = Scorer::new(&backend);
            let trace = run_iterative(
                &scorer,
                &selection(),
                ScoreMode::Full,
                "target",
                &candidates,
                rng.random_range(1..=6usize),
                None,
            )
            .unwrap();

            // accepted maxima strictly increase
            let maxima: Vec<f64> = trace
                .steps
                .iter()
                .filter(|s| s.accepted)
                .map(|s| s.max_score_excl_selected)
                .collect();
            assert!(maxima.windows(2).all(|w| w[0] < w[1]), "round {round}");

            // every selected word outranks every never-selected candidate,
            // whose accepted-step scores are all negative by construction
            for ranking in [&trace.final_ranking_last, &trace.final_ranking_mean] {
                let position = |word: &str| {
                    ranking
                        .items()
                        .iter()
                        .position(|item| item.id == word)
                        .expect("ranked")
                };
                for selected in &trace.selected {
                    for candidate in &candidates {
                        if !trace.selected.contains(candidate) {
                            assert!(
                                position(selected) < position(candidate),
                                "round {round}: {selected} must outrank {candidate}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn evaluate_iterative_reports_three_map_columns() {
        let backend = hornet_backend();
        let scorer = Scorer::new(&backend);
        let pools = vec![TargetPool {
            target: "hornet".into(),
            candidates: hornet_candidates(),
            gold: ["insect", "animal", "creature", "arthropod"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }];
        let eval = evaluate_iterative(
            &scorer,
            &selection(),
            ScoreMode::Full,
            &pools,
            DEFAULT_MAX_STEPS,
            None,
        )
        .unwrap();
        assert_eq!(eval.n_targets, 1);
        assert!((eval.map_step0 - (1.0 + 2.0 / 3.0 + 3.0 / 4.0 + 4.0 / 5.0) / 4.0).abs() < 1e-12);
        assert_eq!(eval.map_last, 1.0);
        assert_eq!(eval.map_mean, 1.0);
        assert!(eval.map_mean > eval.map_step0);

        // with max_steps = 1 all three columns agree
        let degenerate = evaluate_iterative(
            &scorer,
            &selection(),
            ScoreMode::Full,
            &pools,
            1,
            None,
        )
        .unwrap();
        assert_eq!(degenerate.map_step0, degenerate.map_last);
        assert_eq!(degenerate.map_step0, degenerate.map_mean);
    }
}
