pub mod cohypo;
pub mod correlate;
pub mod evaluate;
pub mod iterate;
pub mod score;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use taxoprompt::backend::{open_backend, CountingBackend, ScoringBackend};
use taxoprompt::datasets::{Fold, FoldSelect};
use taxoprompt::prompts::{group_catalog, load_catalog, TemplateGroup};
use taxoprompt::scoring::{PromptSelection, ScoreCache, Scorer};

use crate::config::{resolve, CommonArgs, RunConfig};
use crate::error::CliError;

/// Backend, cache, and settings shared by one command invocation.
pub struct Runtime {
    pub config: RunConfig,
    backend: CountingBackend<Box<dyn ScoringBackend>>,
    cache: Option<ScoreCache>,
}

impl Runtime {
    pub fn new(common: &CommonArgs) -> Result<Self, CliError> {
        let config = resolve(common)?;
        let backend = CountingBackend::new(open_backend(&config.descriptor)?);
        let cache = match &config.cache_path {
            Some(path) => Some(ScoreCache::open(path).map_err(|e| {
                CliError::config(format!("cannot open cache {}: {e}", path.display()))
            })?),
            None => None,
        };
        Ok(Runtime {
            config,
            backend,
            cache,
        })
    }

    pub fn scorer(&self) -> Scorer<'_> {
        let mut scorer = Scorer::new(&self.backend)
            .with_parallelism(self.config.parallelism)
            .with_lowercase(self.config.lowercase)
            .with_combine_space(self.config.combine_space);
        if let Some(cache) = &self.cache {
            scorer = scorer.with_cache(cache);
        }
        scorer
    }

    /// Backend requests that were not served by the cache.
    pub fn backend_calls(&self) -> u64 {
        self.backend.calls()
    }
}

/// Loads a catalog file, or falls back to a bundled one.
pub fn load_groups(
    catalog: &Option<PathBuf>,
    bundled: fn() -> Vec<TemplateGroup>,
) -> Result<Vec<TemplateGroup>, CliError> {
    match catalog {
        Some(path) => Ok(group_catalog(&load_catalog(path)?)),
        None => Ok(bundled()),
    }
}

/// Builds the list of scoring runs: one per selected catalog row, plus one
/// per requested combination.
pub fn build_selections(
    groups: &[TemplateGroup],
    prompts: &Option<String>,
    combine: &[String],
) -> Result<Vec<PromptSelection>, CliError> {
    let find = |id: &str| -> Result<TemplateGroup, CliError> {
        groups
            .iter()
            .find(|g| g.id == id)
            .cloned()
            .ok_or_else(|| CliError::config(format!("prompt id {id:?} not in the catalog")))
    };
    let mut selections = Vec::new();
    match prompts {
        Some(list) => {
            for id in split_list(list) {
                selections.push(PromptSelection::single(find(&id)?));
            }
            if selections.is_empty() {
                return Err(CliError::config("--prompts selected nothing"));
            }
        }
        None => {
            for group in groups {
                selections.push(PromptSelection::single(group.clone()));
            }
            if selections.is_empty() {
                return Err(CliError::config("the catalog has no prompts"));
            }
        }
    }
    for combo in combine {
        let ids = split_list(combo);
        if ids.len() < 2 {
            return Err(CliError::config(format!(
                "--combine needs at least two prompt ids, got {combo:?}"
            )));
        }
        if ids.iter().collect::<BTreeSet<_>>().len() != ids.len() {
            return Err(CliError::config(format!(
                "--combine has duplicate prompt ids: {combo:?}"
            )));
        }
        let groups: Result<Vec<TemplateGroup>, CliError> =
            ids.iter().map(|id| find(id)).collect();
        selections.push(PromptSelection::combination(groups?));
    }
    Ok(selections)
}

pub fn split_list(raw: &str) -> Vec<String> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Parses a `name=path` dataset argument.
pub fn parse_dataset_arg(raw: &str) -> Result<(String, PathBuf), CliError> {
    let (name, path) = raw
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("expected NAME=PATH, got {raw:?}")))?;
    if name.trim().is_empty() || path.trim().is_empty() {
        return Err(CliError::config(format!("expected NAME=PATH, got {raw:?}")));
    }
    Ok((name.trim().to_string(), PathBuf::from(path.trim())))
}

/// Parses the `--folds` flag: "all" or a comma list of val/test/all.
pub fn parse_folds(raw: &str) -> Result<FoldSelect, CliError> {
    if raw.trim() == "all" {
        return Ok(FoldSelect::All);
    }
    let mut set = BTreeSet::new();
    for token in split_list(raw) {
        set.insert(match token.as_str() {
            "val" => Fold::Val,
            "test" => Fold::Test,
            "all" => Fold::All,
            other => {
                return Err(CliError::config(format!(
                    "unknown fold {other:?}; expected val, test, or all"
                )))
            }
        });
    }
    if set.is_empty() {
        return Err(CliError::config("--folds selected nothing"));
    }
    Ok(FoldSelect::Subset(set))
}

pub fn read_words_file(path: &Path) -> Result<Vec<String>, CliError> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    Ok(source
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}
