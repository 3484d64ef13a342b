//! `cohypo`: the four-stage co-hyponym search for a list of target words.

use serde::Serialize;

use taxoprompt::cohypo::{
    run_pipeline, CohypoError, CohypoPipelineConfig, CohypoResult, EmbeddingStore, Lexicon,
};

use crate::error::CliError;
use crate::output::{sanitize_filename, write_atomic};
use crate::CohypoArgs;

use super::{load_groups, read_words_file, split_list, Runtime};

#[derive(Serialize)]
struct CohypoFile<'a> {
    schema_version: u32,
    #[serde(flatten)]
    result: &'a CohypoResult,
}

pub fn run(args: CohypoArgs) -> Result<String, CliError> {
    let runtime = Runtime::new(&args.common)?;
    let scorer = runtime.scorer();

    let mut targets: Vec<String> = Vec::new();
    if let Some(raw) = &args.targets {
        targets.extend(split_list(raw));
    }
    if let Some(path) = &args.targets_file {
        targets.extend(read_words_file(path)?);
    }
    targets.dedup();
    if targets.is_empty() {
        return Err(CliError::config(
            "no targets given: pass --targets or --targets-file",
        ));
    }

    let store = EmbeddingStore::load(&args.embeddings)?;
    let lexicon = Lexicon::load(&args.lexicon)?;
    let mut config = CohypoPipelineConfig::new(lexicon);
    config.top_n_neighbors = args.top_n;
    config.levenshtein_min = args.levenshtein_min;
    config.keep_k = args.keep_k;
    config.rerank_mode = runtime.config.mode;
    if let Some(id) = &args.rerank_prompt {
        let groups = load_groups(&args.catalog, taxoprompt::prompts::builtin::cohyponym)?;
        config.rerank_template = groups
            .iter()
            .find(|g| g.id == *id)
            .cloned()
            .ok_or_else(|| CliError::config(format!("rerank prompt {id:?} not in the catalog")))?;
    } else if let Some(path) = &args.catalog {
        return Err(CliError::config(format!(
            "--catalog {} given without --rerank-prompt",
            path.display()
        )));
    }
    config.validate()?;

    let out = &runtime.config.output_dir;
    let mut written = 0usize;
    let mut skipped = 0usize;
    for target in &targets {
        let result = match run_pipeline(&store, &scorer, &config, target) {
            Ok(result) => result,
            Err(CohypoError::OutOfVocabulary(word)) if args.oov_skip => {
                log::warn!("target {word:?} not in the embedding vocabulary; skipping");
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let path = out.join(format!("cohypo_{}.json", sanitize_filename(target)));
        let json = serde_json::to_vec_pretty(&CohypoFile {
            schema_version: 1,
            result: &result,
        })
        .expect("result serializes");
        write_atomic(&path, &json)?;
        written += 1;
    }

    Ok(format!(
        "cohypo ok targets={} written={} skipped={} backend_calls={} outputs={}",
        targets.len(),
        written,
        skipped,
        runtime.backend_calls(),
        out.display()
    ))
}
