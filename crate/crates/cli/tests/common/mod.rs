//! Shared helpers for binary end-to-end tests.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

pub const TABLE_SEP: char = '\u{241E}';

pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_bin(args: &[&str], envs: &[(&str, &str)]) -> RunOutput {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_taxoprompt"));
    cmd.args(args);
    cmd.env_remove("TAXO_CACHE");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let output = cmd.output().expect("binary runs");
    RunOutput {
        code: output.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&output.stdout).to_string(),
        stderr: String::from_utf8_lossy(&output.stderr).to_string(),
    }
}

/// Writes a table-backend file of single-token full sentences.
pub fn write_sentence_table(path: &Path, entries: &[(String, f64)]) {
    let map: BTreeMap<String, f64> = entries
        .iter()
        .map(|(sentence, lp)| (format!("{TABLE_SEP}{sentence}"), *lp))
        .collect();
    std::fs::write(path, serde_json::to_string_pretty(&map).unwrap()).unwrap();
}

pub fn s(v: &str) -> String {
    v.to_string()
}
