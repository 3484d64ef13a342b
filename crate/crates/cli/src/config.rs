//! Run configuration: CLI flags > config file > environment > defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;

use taxoprompt::backend::{BackendDescriptor, BackendKind};
use taxoprompt::scoring::{CombineSpace, ScoreMode};

use crate::error::CliError;

pub const CACHE_ENV: &str = "TAXO_CACHE";

/// Flags shared by every subcommand.
#[derive(Args)]
pub struct CommonArgs {
    /// Config file with `[backend]` and `[run]` key=value sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Backend kind: http, table, or uniform.
    #[arg(long)]
    pub backend: Option<String>,
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    /// Backend parameter as key=value (table: file=...; uniform:
    /// vocab_size=...); repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Score cache file (env TAXO_CACHE).
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// Scoring mode: full or selective.
    #[arg(long)]
    pub mode: Option<String>,
    /// Lowercase terms at prompt time (default true).
    #[arg(long)]
    pub lowercase: Option<bool>,
    /// Space for averaging multi-prompt scores: log or prob.
    #[arg(long = "combine-space")]
    pub combine_space: Option<String>,
    #[arg(long = "output-dir")]
    pub output_dir: Option<PathBuf>,
    /// Report probability-form scores (exp of log scores) where a score
    /// column is printed.
    #[arg(long = "prob-scores")]
    pub prob_scores: bool,
}

/// Fully resolved run settings.
pub struct RunConfig {
    pub descriptor: BackendDescriptor,
    pub cache_path: Option<PathBuf>,
    pub parallelism: usize,
    pub mode: ScoreMode,
    pub lowercase: bool,
    pub combine_space: CombineSpace,
    pub output_dir: PathBuf,
    pub prob_scores: bool,
}

/// Minimal sectioned key=value file, TOML-style surface.
#[derive(Default)]
pub struct ConfigFile {
    entries: BTreeMap<(String, String), Vec<String>>,
}

impl ConfigFile {
    pub fn parse(source: &str) -> Result<Self, CliError> {
        let mut file = ConfigFile::default();
        let mut section = String::new();
        for (idx, raw) in source.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(format!(
                    "config line {}: expected key = value, got {line:?}",
                    idx + 1
                )));
            };
            file.entries
                .entry((section.clone(), key.trim().to_string()))
                .or_default()
                .push(value.trim().to_string());
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let source = std::fs::read_to_string(path).map_err(|e| {
            CliError::config(format!("cannot read config {}: {e}", path.display()))
        })?;
        ConfigFile::parse(&source)
    }

    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .and_then(|v| v.last())
            .map(String::as_str)
    }

    fn get_all(&self, section: &str, key: &str) -> Vec<&str> {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .map(|v| v.iter().map(String::as_str).collect())
            .unwrap_or_default()
    }
}

fn parse_kv(raw: &str) -> Result<(String, String), CliError> {
    raw.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| CliError::config(format!("expected key=value, got {raw:?}")))
}

pub fn resolve(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };

    let kind_raw = args
        .backend
        .as_deref()
        .or_else(|| file.get("backend", "kind"))
        .ok_or_else(|| {
            CliError::config("no backend configured: pass --backend http|table|uniform")
        })?;
    let kind: BackendKind = kind_raw.parse().map_err(CliError::Config)?;

    let mut descriptor = BackendDescriptor::new(
        kind,
        args.model
            .as_deref()
            .or_else(|| file.get("backend", "model"))
            .unwrap_or("default"),
    );
    descriptor.endpoint = args
        .endpoint
        .clone()
        .or_else(|| file.get("backend", "endpoint").map(str::to_string));
    for raw in file.get_all("backend", "param") {
        let (k, v) = parse_kv(raw)?;
        descriptor.params.insert(k, v);
    }
    for raw in &args.params {
        let (k, v) = parse_kv(raw)?;
        descriptor.params.insert(k, v);
    }
    if kind == BackendKind::Http && descriptor.endpoint.is_none() {
        return Err(CliError::config("http backend needs --endpoint"));
    }

    let cache_path = args
        .cache
        .clone()
        .or_else(|| file.get("run", "cache").map(PathBuf::from))
        .or_else(|| std::env::var(CACHE_ENV).ok().map(PathBuf::from));

    let parallelism = match args.parallelism {
        Some(n) => n,
        None => match file.get("run", "parallelism") {
            Some(raw) => raw
                .parse()
                .map_err(|_| CliError::config(format!("bad parallelism {raw:?}")))?,
            None => 1,
        },
    };
    if parallelism == 0 {
        return Err(CliError::config("parallelism must be >= 1"));
    }

    let mode: ScoreMode = args
        .mode
        .as_deref()
        .or_else(|| file.get("run", "mode"))
        .unwrap_or("full")
        .parse()
        .map_err(CliError::Config)?;

    let lowercase = match args.lowercase {
        Some(v) => v,
        None => match file.get("run", "lowercase") {
            Some(raw) => raw
                .parse()
                .map_err(|_| CliError::config(format!("bad lowercase value {raw:?}")))?,
            None => true,
        },
    };

    let combine_space: CombineSpace = args
        .combine_space
        .as_deref()
        .or_else(|| file.get("run", "combine-space"))
        .unwrap_or("log")
        .parse()
        .map_err(CliError::Config)?;

    let output_dir = args
        .output_dir
        .clone()
        .or_else(|| file.get("run", "output-dir").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    Ok(RunConfig {
        descriptor,
        cache_path,
        parallelism,
        mode,
        lowercase,
        combine_space,
        output_dir,
        prob_scores: args.prob_scores,
    })
}
