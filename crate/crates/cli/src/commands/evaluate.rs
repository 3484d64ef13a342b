//! `evaluate`: detection AP and MAP for every (prompt, dataset) pair.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;

use taxoprompt::backend::parallel_map;
use taxoprompt::cohypo::{CohypoPipelineConfig, EmbeddingStore, Lexicon, PipelineCohypoProvider};
use taxoprompt::datasets::{
    build_detection_list, build_target_pools, load_dataset_with_schema, Dataset, FoldSelect,
    TsvSchema,
};
use taxoprompt::metrics::{
    average_precision, DatasetEval, EvalReport, RankedList, REPORT_SCHEMA_VERSION,
};
use taxoprompt::scoring::{CohypoProvider, PromptSelection, ScoreMode, Scorer};

use crate::error::CliError;
use crate::output::{metric, opt_metric, write_atomic};
use crate::EvaluateArgs;

use super::{build_selections, load_groups, parse_dataset_arg, parse_folds, Runtime};

/// Word-to-co-hyponym assignments discovered up front for a fixed word set.
pub struct Augmentation {
    map: BTreeMap<String, String>,
    pub skipped: BTreeSet<String>,
}

impl Augmentation {
    pub fn cohypo_of(&self, word: &str) -> Option<&str> {
        self.map.get(word).map(String::as_str)
    }

    /// Discovers one co-hyponym per word. Without `oov_skip`, any failed
    /// discovery aborts the run.
    pub fn discover(
        words: impl IntoIterator<Item = String>,
        scorer: &Scorer<'_>,
        embeddings: &Path,
        lexicon: &Path,
        oov_skip: bool,
    ) -> Result<Augmentation, CliError> {
        let store = EmbeddingStore::load(embeddings)?;
        let lexicon = Lexicon::load(lexicon)?;
        let config = CohypoPipelineConfig::new(lexicon);
        config.validate()?;
        let provider = PipelineCohypoProvider::new(&store, scorer, &config);
        let mut map = BTreeMap::new();
        let mut skipped = BTreeSet::new();
        for word in words {
            match provider.cohypo_for(&word) {
                Some(cohypo) => {
                    map.insert(word, cohypo);
                }
                None if oov_skip => {
                    log::warn!("no co-hyponym discovered for {word:?}; skipping");
                    skipped.insert(word);
                }
                None => {
                    return Err(CliError::config(format!(
                        "co-hyponym discovery failed for {word:?} (pass --oov-skip to drop such words)"
                    )))
                }
            }
        }
        Ok(Augmentation { map, skipped })
    }
}

/// One skipped-target report row.
pub struct SkippedRow {
    pub dataset: String,
    pub target: String,
    pub reason: String,
}

pub fn evaluate_dataset(
    scorer: &Scorer<'_>,
    selection: &PromptSelection,
    mode: ScoreMode,
    ds: &Dataset,
    folds: &FoldSelect,
    augmentation: Option<&Augmentation>,
) -> Result<(DatasetEval, Vec<SkippedRow>), CliError> {
    // detection AP over the global pair list (all folds)
    let pairs: Vec<_> = build_detection_list(ds)
        .into_iter()
        .filter(|pair| match augmentation {
            Some(aug) => aug.cohypo_of(&pair.hypo).is_some(),
            None => true,
        })
        .collect();
    if !pairs.iter().any(|p| p.label) {
        return Err(CliError::config(format!(
            "dataset {:?} has no positive pairs left to score",
            ds.name
        )));
    }
    let scored = parallel_map(&pairs, scorer_parallelism(), |pair| {
        let cohypo = augmentation.and_then(|aug| aug.cohypo_of(&pair.hypo));
        scorer.score_selection(selection, mode, &pair.hypo, Some(&pair.candidate), cohypo)
    });
    let mut detection_items = Vec::with_capacity(pairs.len());
    for (pair, result) in pairs.iter().zip(scored) {
        let score = result?;
        let id = format!("{}\u{1f}{}", pair.hypo, pair.candidate);
        detection_items.push((id, score.log_score, pair.label));
    }
    let detection_ap = average_precision(&RankedList::from_scored(detection_items))?;

    // MAP over per-target pools in the selected folds
    let pools = build_target_pools(ds, folds);
    let mut skipped: Vec<SkippedRow> = pools
        .skipped
        .iter()
        .map(|s| SkippedRow {
            dataset: ds.name.clone(),
            target: s.target.clone(),
            reason: s.reason.clone(),
        })
        .collect();
    let mut aps = Vec::new();
    let mut n_targets = 0usize;
    for pool in &pools.pools {
        let cohypo = match augmentation {
            Some(aug) => match aug.cohypo_of(&pool.target) {
                Some(cohypo) => Some(cohypo),
                None => {
                    skipped.push(SkippedRow {
                        dataset: ds.name.clone(),
                        target: pool.target.clone(),
                        reason: "no co-hyponym discovered".into(),
                    });
                    continue;
                }
            },
            None => None,
        };
        let outcome =
            scorer.rank_candidates(selection, mode, &pool.target, cohypo, &pool.candidates)?;
        if let Some((candidate, error)) = outcome.failures.into_iter().next() {
            return Err(CliError::config(format!(
                "scoring candidate {candidate:?} for target {:?} failed: {error}",
                pool.target
            )));
        }
        let labeled = outcome.ranking.with_labels(pool.gold.iter().map(String::as_str));
        aps.push(average_precision(&labeled)?);
        n_targets += 1;
    }
    let map = if aps.is_empty() {
        None
    } else {
        Some(aps.iter().sum::<f64>() / aps.len() as f64)
    };

    let eval = DatasetEval {
        dataset: ds.name.clone(),
        detection_ap,
        map,
        n_targets,
        skipped_targets: skipped.len(),
    };
    Ok((eval, skipped))
}

fn scorer_parallelism() -> usize {
    // detection pairs parallelize across the scorer's own parallel ranking;
    // a fixed small pool keeps batch scoring snappy without oversubscribing
    8
}

#[derive(Serialize)]
struct ReportFile<'a> {
    schema_version: u32,
    reports: &'a [EvalReport],
}

pub fn run(args: EvaluateArgs) -> Result<String, CliError> {
    let runtime = Runtime::new(&args.common)?;
    let scorer = runtime.scorer();
    let folds = parse_folds(&args.folds)?;
    let schema: TsvSchema = match &args.schema {
        Some(raw) => raw.parse()?,
        None => TsvSchema::default(),
    };

    let mut datasets = Vec::new();
    for raw in &args.datasets {
        let (name, path) = parse_dataset_arg(raw)?;
        datasets.push(load_dataset_with_schema(&path, &name, &schema)?);
    }

    let bundled = if args.augment {
        taxoprompt::prompts::builtin::cohypo_augmented
    } else {
        taxoprompt::prompts::builtin::hypernym
    };
    let groups = load_groups(&args.catalog, bundled)?;
    let selections = build_selections(&groups, &args.prompts, &args.combine)?;

    let augmentation = if args.augment {
        let (Some(embeddings), Some(lexicon)) = (&args.embeddings, &args.lexicon) else {
            return Err(CliError::config(
                "--augment needs --embeddings and --lexicon",
            ));
        };
        let words: BTreeSet<String> = datasets
            .iter()
            .flat_map(|ds| ds.pairs.iter().map(|p| p.hypo.clone()))
            .collect();
        Some(Augmentation::discover(
            words,
            &scorer,
            embeddings,
            lexicon,
            args.oov_skip,
        )?)
    } else {
        None
    };

    let mode = runtime.config.mode;
    let mut reports = Vec::new();
    let mut skipped_rows: Vec<SkippedRow> = Vec::new();
    for (selection_idx, selection) in selections.iter().enumerate() {
        let mut per_dataset = Vec::new();
        for ds in &datasets {
            let (eval, skipped) = evaluate_dataset(
                &scorer,
                selection,
                mode,
                ds,
                &folds,
                augmentation.as_ref(),
            )?;
            per_dataset.push(eval);
            // the skipped set is prompt-independent; record it once
            if selection_idx == 0 {
                skipped_rows.extend(skipped);
            }
        }
        reports.push(EvalReport::new(
            runtime.config.descriptor.id(),
            selection.label.clone(),
            mode.to_string(),
            per_dataset,
        ));
    }

    let out = &runtime.config.output_dir;
    write_results_tsv(&out.join("results.tsv"), &reports)?;
    write_skipped_targets(&out.join("skipped_targets.tsv"), &skipped_rows)?;
    write_prompt_summary(&out.join("prompt_summary.tsv"), &reports)?;
    write_best_prompts(&out.join("best_prompts.tsv"), &reports)?;
    let report_json = serde_json::to_vec_pretty(&ReportFile {
        schema_version: REPORT_SCHEMA_VERSION,
        reports: &reports,
    })
    .expect("reports serialize");
    write_atomic(&out.join("report.json"), &report_json)?;

    let aug_note = match &augmentation {
        Some(aug) if !aug.skipped.is_empty() => format!(" aug_skipped={}", aug.skipped.len()),
        _ => String::new(),
    };
    Ok(format!(
        "evaluate ok prompts={} datasets={} backend_calls={}{} outputs={}",
        selections.len(),
        datasets.len(),
        runtime.backend_calls(),
        aug_note,
        out.display()
    ))
}

fn write_results_tsv(path: &Path, reports: &[EvalReport]) -> Result<(), CliError> {
    let mut tsv = String::from("# schema_version 1\n");
    tsv.push_str("backend\tprompt\tmode\tdataset\tdetection_ap\tmap\tn_targets\tskipped_targets\n");
    for report in reports {
        for ds in &report.per_dataset {
            tsv.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                report.backend,
                report.prompt,
                report.mode,
                ds.dataset,
                metric(ds.detection_ap),
                opt_metric(ds.map),
                ds.n_targets,
                ds.skipped_targets
            ));
        }
    }
    Ok(write_atomic(path, tsv.as_bytes())?)
}

fn write_skipped_targets(path: &Path, rows: &[SkippedRow]) -> Result<(), CliError> {
    let mut tsv = String::from("# schema_version 1\n");
    tsv.push_str("dataset\ttarget\treason\n");
    for row in rows {
        tsv.push_str(&format!("{}\t{}\t{}\n", row.dataset, row.target, row.reason));
    }
    Ok(write_atomic(path, tsv.as_bytes())?)
}

fn write_prompt_summary(path: &Path, reports: &[EvalReport]) -> Result<(), CliError> {
    let mut tsv = String::from("# schema_version 1\n");
    tsv.push_str("prompt\tmean_ap\tmap\n");
    for report in reports {
        let maps: Vec<f64> = report.per_dataset.iter().filter_map(|d| d.map).collect();
        let mean_map = if maps.is_empty() {
            None
        } else {
            Some(maps.iter().sum::<f64>() / maps.len() as f64)
        };
        tsv.push_str(&format!(
            "{}\t{}\t{}\n",
            report.prompt,
            metric(report.mean_detection_ap),
            opt_metric(mean_map)
        ));
    }
    Ok(write_atomic(path, tsv.as_bytes())?)
}

fn write_best_prompts(path: &Path, reports: &[EvalReport]) -> Result<(), CliError> {
    let mut datasets: Vec<&str> = Vec::new();
    for report in reports {
        for ds in &report.per_dataset {
            if !datasets.contains(&ds.dataset.as_str()) {
                datasets.push(&ds.dataset);
            }
        }
    }
    let mut tsv = String::from("# schema_version 1\n");
    tsv.push_str("dataset\tbest_prompt_by_ap\tdetection_ap\tbest_prompt_by_map\tmap\n");
    for dataset in datasets {
        let mut best_ap: Option<(&str, f64)> = None;
        let mut best_map: Option<(&str, f64)> = None;
        for report in reports {
            for ds in report.per_dataset.iter().filter(|d| d.dataset == dataset) {
                if best_ap.is_none() || ds.detection_ap > best_ap.unwrap().1 {
                    best_ap = Some((&report.prompt, ds.detection_ap));
                }
                if let Some(map) = ds.map {
                    if best_map.is_none() || map > best_map.unwrap().1 {
                        best_map = Some((&report.prompt, map));
                    }
                }
            }
        }
        let (ap_prompt, ap) = best_ap.expect("dataset has rows");
        tsv.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            dataset,
            ap_prompt,
            metric(ap),
            best_map.map(|(p, _)| p).unwrap_or("-"),
            opt_metric(best_map.map(|(_, m)| m))
        ));
    }
    Ok(write_atomic(path, tsv.as_bytes())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use taxoprompt::backend::TableBackend;
    use taxoprompt::datasets::parse_dataset;
    use taxoprompt::prompts::{group_catalog, parse_catalog};

    #[test]
    fn evaluate_dataset_computes_ap_and_map() {
        let data = "\
hornet\tinsect\tTrue\thyper\tval
hornet\tfurniture\tFalse\trandom\tval
dagger\tweapon\tTrue\thyper\ttest
dagger\tinsect\tFalse\trandom\ttest
";
        let ds = parse_dataset(data, "synthetic", &TsvSchema::default()).unwrap();
        let sentences = [
            ("hornet is a insect", -1.0),
            ("hornet is a furniture", -9.0),
            ("dagger is a weapon", -2.0),
            ("dagger is a insect", -8.0),
        ];
        let backend = TableBackend::from_triples(
            "t",
            sentences.iter().map(|(s, lp)| ("", *s, *lp)),
        )
        .unwrap();
        let scorer = Scorer::new(&backend);
        let selection = PromptSelection::single(
            group_catalog(&parse_catalog("is_a\t{hypo} is a {hyper}\n").unwrap())[0].clone(),
        );
        let (eval, skipped) = evaluate_dataset(
            &scorer,
            &selection,
            ScoreMode::Full,
            &ds,
            &FoldSelect::All,
            None,
        )
        .unwrap();
        // global ranking: insect(-1) weapon(-2) insect(-8) furniture(-9),
        // labels T T F F
        assert_eq!(eval.detection_ap, 1.0);
        assert_eq!(eval.map, Some(1.0));
        assert_eq!(eval.n_targets, 2);
        assert_eq!(eval.skipped_targets, 0);
        assert!(skipped.is_empty());
    }
}
