//! `correlate`: Pearson/Spearman of prompt results against pattern
//! precision scores, joined on id.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use taxoprompt::metrics::{pearson, spearman};

use crate::error::CliError;
use crate::output::write_atomic;
use crate::CorrelateArgs;

/// Prompt results: id column plus named numeric columns ("-" = missing).
struct ResultsTable {
    columns: Vec<String>,
    rows: BTreeMap<String, Vec<Option<f64>>>,
}

fn read_results(path: &Path) -> Result<ResultsTable, CliError> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = source
        .lines()
        .map(str::trim_end)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| CliError::config(format!("{} has no header row", path.display())))?;
    let mut header_cells = header.split('\t');
    header_cells.next();
    let columns: Vec<String> = header_cells.map(str::to_string).collect();
    if columns.is_empty() {
        return Err(CliError::config(format!(
            "{} needs an id column plus at least one numeric column",
            path.display()
        )));
    }
    let mut rows = BTreeMap::new();
    for line in lines {
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != columns.len() + 1 {
            return Err(CliError::config(format!(
                "{}: row {line:?} has {} cells, expected {}",
                path.display(),
                cells.len(),
                columns.len() + 1
            )));
        }
        let values: Result<Vec<Option<f64>>, CliError> = cells[1..]
            .iter()
            .map(|cell| {
                if *cell == "-" {
                    Ok(None)
                } else {
                    cell.parse::<f64>().map(Some).map_err(|_| {
                        CliError::config(format!(
                            "{}: bad number {cell:?} in row {line:?}",
                            path.display()
                        ))
                    })
                }
            })
            .collect();
        rows.insert(cells[0].to_string(), values?);
    }
    Ok(ResultsTable { columns, rows })
}

/// Two-column TSV: id, score. A first row whose second cell is not a
/// number is treated as a header.
fn read_pattern_scores(path: &Path) -> Result<BTreeMap<String, f64>, CliError> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut scores = BTreeMap::new();
    let mut first = true;
    for line in source
        .lines()
        .map(str::trim_end)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
    {
        let Some((id, raw)) = line.split_once('\t') else {
            return Err(CliError::config(format!(
                "{}: expected two tab-separated columns, got {line:?}",
                path.display()
            )));
        };
        match raw.trim().parse::<f64>() {
            Ok(score) => {
                scores.insert(id.to_string(), score);
            }
            Err(_) if first => {}
            Err(_) => {
                return Err(CliError::config(format!(
                    "{}: bad score {raw:?} in row {line:?}",
                    path.display()
                )))
            }
        }
        first = false;
    }
    Ok(scores)
}

#[derive(Serialize)]
struct ColumnCorrelation {
    pearson: f64,
    spearman: f64,
    n: usize,
}

#[derive(Serialize)]
struct CorrelationFile {
    schema_version: u32,
    n_joined: usize,
    unmatched_result_ids: Vec<String>,
    unmatched_pattern_ids: Vec<String>,
    columns: BTreeMap<String, ColumnCorrelation>,
}

pub fn run(args: CorrelateArgs) -> Result<String, CliError> {
    let runtime_out = {
        // correlate needs no backend; only the output settings apply
        args.common
            .output_dir
            .clone()
            .unwrap_or_else(|| std::path::PathBuf::from("."))
    };
    let results = read_results(&args.prompt_results)?;
    let patterns = read_pattern_scores(&args.pattern_scores)?;

    let joined_ids: Vec<&String> = results
        .rows
        .keys()
        .filter(|id| patterns.contains_key(*id))
        .collect();
    if joined_ids.len() < 2 {
        return Err(CliError::config(format!(
            "only {} ids joined between results and pattern scores; need at least 2",
            joined_ids.len()
        )));
    }
    let unmatched_result_ids: Vec<String> = results
        .rows
        .keys()
        .filter(|id| !patterns.contains_key(*id))
        .cloned()
        .collect();
    let unmatched_pattern_ids: Vec<String> = patterns
        .keys()
        .filter(|id| !results.rows.contains_key(*id))
        .cloned()
        .collect();
    for id in &unmatched_result_ids {
        log::warn!("result id {id:?} has no pattern score; excluded");
    }
    for id in &unmatched_pattern_ids {
        log::warn!("pattern id {id:?} has no prompt results; excluded");
    }

    let mut columns = BTreeMap::new();
    for (col_idx, column) in results.columns.iter().enumerate() {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for id in &joined_ids {
            if let Some(value) = results.rows[*id][col_idx] {
                xs.push(patterns[*id]);
                ys.push(value);
            }
        }
        if xs.len() < 2 {
            return Err(CliError::config(format!(
                "column {column:?} has fewer than 2 joined values"
            )));
        }
        columns.insert(
            column.clone(),
            ColumnCorrelation {
                pearson: pearson(&xs, &ys)?,
                spearman: spearman(&xs, &ys)?,
                n: xs.len(),
            },
        );
    }

    let file = CorrelationFile {
        schema_version: 1,
        n_joined: joined_ids.len(),
        unmatched_result_ids,
        unmatched_pattern_ids,
        columns,
    };
    let path = runtime_out.join("correlation.json");
    write_atomic(&path, &serde_json::to_vec_pretty(&file).expect("serializes"))?;

    let brief: Vec<String> = file
        .columns
        .iter()
        .map(|(name, c)| {
            format!(
                "{name}: pearson={:.3} spearman={:.3}",
                c.pearson, c.spearman
            )
        })
        .collect();
    Ok(format!(
        "correlate ok joined={} {} outputs={}",
        file.n_joined,
        brief.join(" "),
        runtime_out.display()
    ))
}
