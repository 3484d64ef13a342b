//! Output-file helpers: atomic writes and stable number formatting.

use std::io::Write;
use std::path::Path;

/// Writes via a temp file in the same directory plus rename, so readers
/// never observe a half-written report.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.flush()?;
    }
    std::fs::rename(&tmp, path)
}

/// Fixed-width metric formatting keeps report bytes reproducible.
pub fn metric(v: f64) -> String {
    format!("{v:.6}")
}

pub fn opt_metric(v: Option<f64>) -> String {
    v.map(metric).unwrap_or_else(|| "-".to_string())
}

/// Filesystem-safe name for per-target files.
pub fn sanitize_filename(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' })
        .collect();
    if out.is_empty() {
        out.push('_');
    }
    out
}
