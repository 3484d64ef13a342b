//! `iterate`: iterative chain ranking, MAP columns step 0 / last / mean.

use std::path::Path;

use serde::Serialize;

use taxoprompt::cohypo::{CohypoPipelineConfig, EmbeddingStore, Lexicon, PipelineCohypoProvider};
use taxoprompt::datasets::{build_target_pools, load_dataset_with_schema, TargetPool, TsvSchema};
use taxoprompt::iterative::evaluate_iterative;
use taxoprompt::scoring::CohypoProvider;

use crate::error::CliError;
use crate::output::{metric, sanitize_filename, write_atomic};
use crate::IterateArgs;

use super::{build_selections, load_groups, parse_dataset_arg, parse_folds, Runtime};

#[derive(Serialize)]
struct IterateRow {
    prompt: String,
    mode: String,
    map_step0: f64,
    map_step_last: f64,
    marker_last: String,
    map_step_mean: f64,
    marker_mean: String,
    n_targets: usize,
}

#[derive(Serialize)]
struct IterateFile {
    schema_version: u32,
    max_steps: usize,
    rows: Vec<IterateRow>,
}

fn marker(value: f64, baseline: f64) -> String {
    if value > baseline {
        "+".to_string()
    } else if value < baseline {
        "-".to_string()
    } else {
        String::new()
    }
}

pub fn run(args: IterateArgs) -> Result<String, CliError> {
    let runtime = Runtime::new(&args.common)?;
    let scorer = runtime.scorer();
    let folds = parse_folds(&args.folds)?;
    let schema: TsvSchema = match &args.schema {
        Some(raw) => raw.parse()?,
        None => TsvSchema::default(),
    };
    let (name, path) = parse_dataset_arg(&args.dataset)?;
    let ds = load_dataset_with_schema(&path, &name, &schema)?;
    let pools = build_target_pools(&ds, &folds);
    if pools.pools.is_empty() {
        return Err(CliError::config(format!(
            "dataset {name:?} has no target with positives in the selected folds"
        )));
    }

    let bundled = if args.augment {
        taxoprompt::prompts::builtin::cohypo_augmented
    } else {
        taxoprompt::prompts::builtin::hypernym
    };
    let groups = load_groups(&args.catalog, bundled)?;
    let selections = build_selections(&groups, &args.prompts, &args.combine)?;

    // keep the provider parts alive for the whole run
    let augment_parts = if args.augment {
        let (Some(embeddings), Some(lexicon)) = (&args.embeddings, &args.lexicon) else {
            return Err(CliError::config(
                "--augment needs --embeddings and --lexicon",
            ));
        };
        let store = EmbeddingStore::load(embeddings)?;
        let config = CohypoPipelineConfig::new(Lexicon::load(lexicon)?);
        config.validate()?;
        Some((store, config))
    } else {
        None
    };
    let provider = augment_parts
        .as_ref()
        .map(|(store, config)| PipelineCohypoProvider::new(store, &scorer, config));

    // augmented runs need a co-hyponym for every target up front
    let pools: Vec<TargetPool> = match &provider {
        Some(provider) => {
            let mut kept = Vec::new();
            for pool in pools.pools {
                if provider.cohypo_for(&pool.target).is_some() {
                    kept.push(pool);
                } else if args.oov_skip {
                    log::warn!("no co-hyponym for target {:?}; skipping", pool.target);
                } else {
                    return Err(CliError::config(format!(
                        "co-hyponym discovery failed for target {:?} (pass --oov-skip to drop it)",
                        pool.target
                    )));
                }
            }
            if kept.is_empty() {
                return Err(CliError::config("no targets left after --oov-skip"));
            }
            kept
        }
        None => pools.pools,
    };

    let provider_dyn: Option<&dyn CohypoProvider> =
        provider.as_ref().map(|p| p as &dyn CohypoProvider);
    let mode = runtime.config.mode;
    let mut rows = Vec::new();
    for selection in &selections {
        let eval = evaluate_iterative(
            &scorer,
            selection,
            mode,
            &pools,
            args.max_steps,
            provider_dyn,
        )?;
        if args.dump_traces {
            dump_traces(
                &runtime.config.output_dir.join("traces"),
                &selection.label,
                &eval.traces,
            )?;
        }
        rows.push(IterateRow {
            prompt: selection.label.clone(),
            mode: mode.to_string(),
            map_step0: eval.map_step0,
            map_step_last: eval.map_last,
            marker_last: marker(eval.map_last, eval.map_step0),
            map_step_mean: eval.map_mean,
            marker_mean: marker(eval.map_mean, eval.map_step0),
            n_targets: eval.n_targets,
        });
    }

    let out = &runtime.config.output_dir;
    let mut tsv = String::from("# schema_version 1\n");
    tsv.push_str(
        "prompt\tmode\tmap_step0\tmap_step_last\tmarker_last\tmap_step_mean\tmarker_mean\tn_targets\n",
    );
    for row in &rows {
        tsv.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            row.prompt,
            row.mode,
            metric(row.map_step0),
            metric(row.map_step_last),
            row.marker_last,
            metric(row.map_step_mean),
            row.marker_mean,
            row.n_targets
        ));
    }
    write_atomic(&out.join("iterate.tsv"), tsv.as_bytes())?;
    let json = serde_json::to_vec_pretty(&IterateFile {
        schema_version: 1,
        max_steps: args.max_steps,
        rows,
    })
    .expect("rows serialize");
    write_atomic(&out.join("iterate.json"), &json)?;

    Ok(format!(
        "iterate ok prompts={} targets={} max_steps={} backend_calls={} outputs={}",
        selections.len(),
        pools.len(),
        args.max_steps,
        runtime.backend_calls(),
        out.display()
    ))
}

fn dump_traces(
    dir: &Path,
    selection_label: &str,
    traces: &[taxoprompt::iterative::IterationTrace],
) -> Result<(), CliError> {
    let subdir = dir.join(sanitize_filename(selection_label));
    for trace in traces {
        let path = subdir.join(format!("{}.json", sanitize_filename(&trace.target)));
        let json = serde_json::to_vec_pretty(trace).expect("trace serializes");
        write_atomic(&path, &json)?;
    }
    Ok(())
}
