//! Ranking metrics: average precision, mean average precision, and
//! Pearson/Spearman correlation.
//!
//! All metrics operate on [`RankedList`]s whose ordering is fully
//! deterministic: scores non-increasing, ties broken by id ascending.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    /// AP is undefined when the list contains no positive labels.
    #[error("average precision undefined: ranked list has no positive labels")]
    NoPositives,
    #[error("mean average precision undefined: no ranked lists given")]
    EmptyPools,
    #[error("correlation undefined: input lengths {0} and {1} differ")]
    LengthMismatch(usize, usize),
    #[error("correlation undefined: need at least 2 observations, got {0}")]
    TooFewObservations(usize),
    #[error("correlation undefined: zero variance in {0}")]
    ZeroVariance(&'static str),
}

/// One ranked entry: candidate id, score, gold label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedItem {
    pub id: String,
    pub score: f64,
    pub label: bool,
}

/// Candidates ordered by score descending with deterministic tie-breaking
/// (equal scores order by id ascending). The unit of AP evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    items: Vec<RankedItem>,
}

impl RankedList {
    /// Builds a ranked list from unordered (id, score, label) triples.
    pub fn from_scored(items: impl IntoIterator<Item = (String, f64, bool)>) -> Self {
        let mut items: Vec<RankedItem> = items
            .into_iter()
            .map(|(id, score, label)| RankedItem { id, score, label })
            .collect();
        items.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
        RankedList { items }
    }

    pub fn items(&self) -> &[RankedItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Relabels entries against a gold set without reordering.
    ///
    /// Labels do not participate in the sort order, so the ranking of the
    /// returned list is identical to `self`.
    pub fn with_labels<'a>(&self, gold: impl IntoIterator<Item = &'a str>) -> RankedList {
        let gold: std::collections::HashSet<&str> = gold.into_iter().collect();
        RankedList {
            items: self
                .items
                .iter()
                .map(|it| RankedItem {
                    id: it.id.clone(),
                    score: it.score,
                    label: gold.contains(it.id.as_str()),
                })
                .collect(),
        }
    }
}

/// Average precision over a ranked list.
///
/// AP = (1/M) Σ_{i : y_i = 1} prec_i, where prec_i is the fraction of
/// positives among ranks 1..=i and M is the total number of positives.
pub fn average_precision(list: &RankedList) -> Result<f64, MetricError> {
    let positives = list.items.iter().filter(|it| it.label).count();
    if positives == 0 {
        return Err(MetricError::NoPositives);
    }
    let mut seen_positives = 0usize;
    let mut sum = 0.0;
    for (rank0, item) in list.items.iter().enumerate() {
        if item.label {
            seen_positives += 1;
            sum += seen_positives as f64 / (rank0 + 1) as f64;
        }
    }
    Ok(sum / positives as f64)
}

/// Arithmetic mean of per-list average precision.
pub fn mean_average_precision(pools: &[RankedList]) -> Result<f64, MetricError> {
    if pools.is_empty() {
        return Err(MetricError::EmptyPools);
    }
    let mut sum = 0.0;
    for pool in pools {
        sum += average_precision(pool)?;
    }
    Ok(sum / pools.len() as f64)
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
    if x.len() != y.len() {
        return Err(MetricError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(MetricError::TooFewObservations(x.len()));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 {
        return Err(MetricError::ZeroVariance("x"));
    }
    if var_y == 0.0 {
        return Err(MetricError::ZeroVariance("y"));
    }
    Ok(cov / (var_x.sqrt() * var_y.sqrt()))
}

/// Spearman rank correlation: Pearson over fractional ranks
/// (tied values receive the average of their rank positions).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
    if x.len() != y.len() {
        return Err(MetricError::LengthMismatch(x.len(), y.len()));
    }
    pearson(&fractional_ranks(x), &fractional_ranks(y))
}

/// 1-based fractional ranks; ties get the mean of the ranks they span.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 averaged over the tie group
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Per-dataset evaluation figures for one (backend, prompt, mode) run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetEval {
    pub dataset: String,
    /// Detection AP over the global pair list.
    pub detection_ap: f64,
    /// MAP over per-target pools; absent when no pool had a positive.
    pub map: Option<f64>,
    pub n_targets: usize,
    pub skipped_targets: usize,
}

/// Evaluation report for one (backend, prompt, mode) across datasets.
///
/// `mean_detection_ap` averages the detection APs only, mirroring the
/// customary "mean" column of hypernymy benchmark tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub backend: String,
    pub prompt: String,
    pub mode: String,
    pub per_dataset: Vec<DatasetEval>,
    pub mean_detection_ap: f64,
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

impl EvalReport {
    pub fn new(backend: String, prompt: String, mode: String, per_dataset: Vec<DatasetEval>) -> Self {
        let mean_detection_ap = if per_dataset.is_empty() {
            0.0
        } else {
            per_dataset.iter().map(|d| d.detection_ap).sum::<f64>() / per_dataset.len() as f64
        };
        EvalReport {
            schema_version: REPORT_SCHEMA_VERSION,
            backend,
            prompt,
            mode,
            per_dataset,
            mean_detection_ap,
        }
    }
}
