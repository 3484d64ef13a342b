//! Loaders for hypernymysuite-format benchmark files and the two task
//! shapes built from them: per-target candidate pools (MAP) and the global
//! pair list (detection AP).

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("failed to read dataset {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("dataset line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("dataset line {line}: duplicate pair ({hypo:?}, {candidate:?})")]
    DuplicatePair {
        line: usize,
        hypo: String,
        candidate: String,
    },
    #[error("dataset {0:?} is empty")]
    Empty(String),
    #[error("dataset {0:?} has no positive pairs")]
    NoPositives(String),
    #[error("invalid schema {0:?}: {1}")]
    BadSchema(String, String),
}

/// Benchmark fold tag. Labels other than val/test (or a missing column)
/// collapse into `All`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fold {
    Val,
    Test,
    All,
}

impl Fold {
    fn parse(raw: &str) -> Fold {
        match raw.trim().to_lowercase().as_str() {
            "val" | "valid" | "validation" => Fold::Val,
            "test" => Fold::Test,
            _ => Fold::All,
        }
    }
}

/// Which folds a computation draws rows from.
#[derive(Debug, Clone, PartialEq)]
pub enum FoldSelect {
    /// Every row regardless of fold tag.
    All,
    Subset(BTreeSet<Fold>),
}

impl FoldSelect {
    pub fn val_and_test() -> Self {
        FoldSelect::Subset([Fold::Val, Fold::Test].into())
    }

    fn includes(&self, fold: Fold) -> bool {
        match self {
            FoldSelect::All => true,
            FoldSelect::Subset(set) => set.contains(&fold),
        }
    }
}

/// One dataset row: a (target, candidate) pair with its gold label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub hypo: String,
    pub candidate: String,
    pub label: bool,
    pub relation: String,
    pub fold: Fold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub pairs: Vec<LabeledPair>,
}

impl Dataset {
    pub fn positives(&self) -> usize {
        self.pairs.iter().filter(|p| p.label).count()
    }
}

/// Column positions in the input TSV. The default matches the public
/// hypernymysuite layout: word1, word2, label, relation, fold.
#[derive(Debug, Clone, PartialEq)]
pub struct TsvSchema {
    pub hypo: usize,
    pub candidate: usize,
    pub label: usize,
    pub relation: Option<usize>,
    pub fold: Option<usize>,
}

impl Default for TsvSchema {
    fn default() -> Self {
        TsvSchema {
            hypo: 0,
            candidate: 1,
            label: 2,
            relation: Some(3),
            fold: Some(4),
        }
    }
}

impl std::str::FromStr for TsvSchema {
    type Err = DatasetError;

    /// Parses `"hypo=0,candidate=1,label=2,relation=3,fold=4"`; relation and
    /// fold may be omitted.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |reason: &str| DatasetError::BadSchema(s.to_string(), reason.to_string());
        let mut hypo = None;
        let mut candidate = None;
        let mut label = None;
        let mut relation = None;
        let mut fold = None;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, idx) = part
                .split_once('=')
                .ok_or_else(|| bad("expected name=column entries"))?;
            let idx: usize = idx
                .trim()
                .parse()
                .map_err(|_| bad("column indices must be non-negative integers"))?;
            match name.trim() {
                "hypo" => hypo = Some(idx),
                "candidate" => candidate = Some(idx),
                "label" => label = Some(idx),
                "relation" => relation = Some(idx),
                "fold" => fold = Some(idx),
                other => return Err(bad(&format!("unknown field {other:?}"))),
            }
        }
        Ok(TsvSchema {
            hypo: hypo.ok_or_else(|| bad("missing hypo column"))?,
            candidate: candidate.ok_or_else(|| bad("missing candidate column"))?,
            label: label.ok_or_else(|| bad("missing label column"))?,
            relation,
            fold,
        })
    }
}

impl TsvSchema {
    fn max_index(&self) -> usize {
        [
            Some(self.hypo),
            Some(self.candidate),
            Some(self.label),
            self.relation,
            self.fold,
        ]
        .into_iter()
        .flatten()
        .max()
        .expect("schema has columns")
    }
}

fn parse_label(raw: &str) -> Option<bool> {
    match raw.trim().to_lowercase().as_str() {
        "true" | "1" => Some(true),
        "false" | "0" => Some(false),
        _ => None,
    }
}

/// Parses dataset text: TSV rows, optional header, `#` comments ignored.
pub fn parse_dataset(
    source: &str,
    name: &str,
    schema: &TsvSchema,
) -> Result<Dataset, DatasetError> {
    let mut pairs = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut first_data_line = true;
    for (line_idx, raw) in source.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() <= schema.max_index() {
            return Err(DatasetError::Malformed {
                line: line_no,
                reason: format!(
                    "expected at least {} tab-separated columns, found {}",
                    schema.max_index() + 1,
                    cells.len()
                ),
            });
        }
        let label = match parse_label(cells[schema.label]) {
            Some(label) => label,
            // an unparseable label in the very first row is a header
            None if first_data_line => {
                first_data_line = false;
                continue;
            }
            None => {
                return Err(DatasetError::Malformed {
                    line: line_no,
                    reason: format!("bad label {:?}", cells[schema.label]),
                })
            }
        };
        first_data_line = false;
        let hypo = cells[schema.hypo].trim().to_string();
        let candidate = cells[schema.candidate].trim().to_string();
        if hypo.is_empty() || candidate.is_empty() {
            return Err(DatasetError::Malformed {
                line: line_no,
                reason: "empty term".into(),
            });
        }
        if hypo == candidate {
            return Err(DatasetError::Malformed {
                line: line_no,
                reason: format!("pair with identical terms {hypo:?}"),
            });
        }
        if !seen.insert((hypo.clone(), candidate.clone())) {
            return Err(DatasetError::DuplicatePair {
                line: line_no,
                hypo,
                candidate,
            });
        }
        pairs.push(LabeledPair {
            hypo,
            candidate,
            label,
            relation: schema
                .relation
                .map(|i| cells[i].trim().to_string())
                .unwrap_or_default(),
            fold: schema
                .fold
                .map(|i| Fold::parse(cells[i]))
                .unwrap_or(Fold::All),
        });
    }
    if pairs.is_empty() {
        return Err(DatasetError::Empty(name.to_string()));
    }
    if !pairs.iter().any(|p| p.label) {
        return Err(DatasetError::NoPositives(name.to_string()));
    }
    let ds = Dataset {
        name: name.to_string(),
        pairs,
    };
    log::info!(
        "dataset {}: {} pairs, {} positives",
        ds.name,
        ds.pairs.len(),
        ds.positives()
    );
    Ok(ds)
}

pub fn load_dataset(path: &Path, name: &str) -> Result<Dataset, DatasetError> {
    load_dataset_with_schema(path, name, &TsvSchema::default())
}

pub fn load_dataset_with_schema(
    path: &Path,
    name: &str,
    schema: &TsvSchema,
) -> Result<Dataset, DatasetError> {
    let source = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_dataset(&source, name, schema)
}

/// Serializes back to the default TSV layout (used by round-trip checks and
/// debugging dumps).
pub fn dataset_to_tsv(ds: &Dataset) -> String {
    let mut out = String::new();
    for pair in &ds.pairs {
        let fold = match pair.fold {
            Fold::Val => "val",
            Fold::Test => "test",
            Fold::All => "all",
        };
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            pair.hypo,
            pair.candidate,
            if pair.label { "True" } else { "False" },
            pair.relation,
            fold
        ));
    }
    out
}

/// Candidate pool of one target word: all candidates that co-occur with it
/// in the selected folds, and the positive ones among them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetPool {
    pub target: String,
    pub candidates: Vec<String>,
    pub gold: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedTarget {
    pub target: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetPools {
    /// Pools with at least one positive, sorted by target.
    pub pools: Vec<TargetPool>,
    /// Targets excluded from MAP (AP undefined without positives).
    pub skipped: Vec<SkippedTarget>,
}

/// Builds one pool per distinct target appearing in the selected folds.
pub fn build_target_pools(ds: &Dataset, folds: &FoldSelect) -> TargetPools {
    let mut by_target: BTreeMap<&str, (Vec<String>, BTreeSet<String>)> = BTreeMap::new();
    for pair in ds.pairs.iter().filter(|p| folds.includes(p.fold)) {
        let entry = by_target.entry(&pair.hypo).or_default();
        if !entry.0.contains(&pair.candidate) {
            entry.0.push(pair.candidate.clone());
        }
        if pair.label {
            entry.1.insert(pair.candidate.clone());
        }
    }
    let mut pools = Vec::new();
    let mut skipped = Vec::new();
    for (target, (candidates, gold)) in by_target {
        if gold.is_empty() {
            skipped.push(SkippedTarget {
                target: target.to_string(),
                reason: "no positive candidates".into(),
            });
        } else {
            pools.push(TargetPool {
                target: target.to_string(),
                candidates,
                gold,
            });
        }
    }
    TargetPools { pools, skipped }
}

/// The global pair list for detection AP: every pair of every fold, input
/// order preserved.
pub fn build_detection_list(ds: &Dataset) -> Vec<LabeledPair> {
    ds.pairs.clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SYNTHETIC: &str = "\
word1\tword2\tlabel\trel\tfold
apple\tfruit\tTrue\thyper\tval
apple\tpear\tFalse\tcoord\tval
dagger\tweapon\tTrue\thyper\ttest
dagger\tfruit\tFalse\trandom\ttest
pear\tapple\tFalse\tcoord\ttest
";

    #[test]
    fn parses_rows_and_counts() {
        let ds = parse_dataset(SYNTHETIC, "synthetic", &TsvSchema::default()).unwrap();
        assert_eq!(ds.pairs.len(), 5);
        assert_eq!(ds.positives(), 2);
        assert_eq!(ds.pairs[0].hypo, "apple");
        assert_eq!(ds.pairs[0].fold, Fold::Val);
        assert_eq!(ds.pairs[2].fold, Fold::Test);
    }

    #[test]
    fn two_row_file() {
        let ds = parse_dataset(
            "a\tb\tTrue\thyper\tval\nc\td\tFalse\trandom\tval\n",
            "tiny",
            &TsvSchema::default(),
        )
        .unwrap();
        assert_eq!(ds.pairs.len(), 2);
    }

    #[test]
    fn malformed_row_names_line() {
        let err = parse_dataset(
            "a\tb\tTrue\thyper\tval\nbroken row\n",
            "bad",
            &TsvSchema::default(),
        )
        .unwrap_err();
        assert!(matches!(err, DatasetError::Malformed { line: 2, .. }), "{err}");
    }

    #[test]
    fn bad_label_after_header_is_error() {
        let err = parse_dataset(
            "a\tb\tTrue\thyper\tval\nc\td\tmaybe\thyper\tval\n",
            "bad",
            &TsvSchema::default(),
        )
        .unwrap_err();
        assert!(matches!(err, DatasetError::Malformed { line: 2, .. }));
    }

    #[test]
    fn duplicates_identity_and_empties_rejected() {
        let dup = "a\tb\tTrue\th\tval\na\tb\tFalse\tr\tval\n";
        assert!(matches!(
            parse_dataset(dup, "d", &TsvSchema::default()),
            Err(DatasetError::DuplicatePair { line: 2, .. })
        ));
        let ident = "a\ta\tTrue\th\tval\n";
        assert!(matches!(
            parse_dataset(ident, "d", &TsvSchema::default()),
            Err(DatasetError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse_dataset("", "d", &TsvSchema::default()),
            Err(DatasetError::Empty(_))
        ));
        let negative_only = "a\tb\tFalse\tr\tval\n";
        assert!(matches!(
            parse_dataset(negative_only, "d", &TsvSchema::default()),
            Err(DatasetError::NoPositives(_))
        ));
    }

    #[test]
    fn schema_remap() {
        let schema: TsvSchema = "hypo=1,candidate=0,label=2".parse().unwrap();
        let ds = parse_dataset("fruit\tapple\tTrue\n", "remap", &schema).unwrap();
        assert_eq!(ds.pairs[0].hypo, "apple");
        assert_eq!(ds.pairs[0].candidate, "fruit");
        assert_eq!(ds.pairs[0].fold, Fold::All);
        assert!("hypo=0,label=2".parse::<TsvSchema>().is_err());
    }

    #[test]
    fn pools_group_by_target_and_skip_goldless() {
        let ds = parse_dataset(SYNTHETIC, "synthetic", &TsvSchema::default()).unwrap();
        let pools = build_target_pools(&ds, &FoldSelect::All);
        assert_eq!(pools.pools.len(), 2);
        let apple = &pools.pools[0];
        assert_eq!(apple.target, "apple");
        assert_eq!(apple.candidates, vec!["fruit".to_string(), "pear".to_string()]);
        assert_eq!(apple.gold.iter().collect::<Vec<_>>(), ["fruit"]);
        assert_eq!(pools.skipped.len(), 1);
        assert_eq!(pools.skipped[0].target, "pear");
    }

    #[test]
    fn pools_respect_fold_selection() {
        let ds = parse_dataset(SYNTHETIC, "synthetic", &TsvSchema::default()).unwrap();
        let val_only = build_target_pools(&ds, &FoldSelect::Subset([Fold::Val].into()));
        assert_eq!(val_only.pools.len(), 1);
        assert_eq!(val_only.pools[0].target, "apple");
        let val_test = build_target_pools(&ds, &FoldSelect::val_and_test());
        assert_eq!(val_test.pools.len(), 2);
    }

    #[test]
    fn gold_counts_are_conserved() {
        let ds = parse_dataset(SYNTHETIC, "synthetic", &TsvSchema::default()).unwrap();
        let pools = build_target_pools(&ds, &FoldSelect::All);
        let gold_total: usize = pools.pools.iter().map(|p| p.gold.len()).sum();
        assert_eq!(gold_total, ds.positives());
    }

    #[test]
    fn detection_list_preserves_order() {
        let ds = parse_dataset(SYNTHETIC, "synthetic", &TsvSchema::default()).unwrap();
        let list = build_detection_list(&ds);
        assert_eq!(list, ds.pairs);
    }

    #[test]
    fn loader_round_trip_is_row_equivalent() {
        let ds = parse_dataset(SYNTHETIC, "synthetic", &TsvSchema::default()).unwrap();
        let rewritten = dataset_to_tsv(&ds);
        let reloaded = parse_dataset(&rewritten, "synthetic", &TsvSchema::default()).unwrap();
        assert_eq!(reloaded.pairs, ds.pairs);
    }
}
