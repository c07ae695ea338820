use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// One tolerance line of a report: passes when `value <= tol`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tol,
            pass: value <= tol,
        }
    }

    /// A yes/no condition, recorded as a violation count against zero.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_most(name, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    pub fn line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        format!(
            "{tag} {}: value {:e}, tol {:e}",
            self.name, self.value, self.tol
        )
    }
}

/// Rendered report body together with its checks.
pub struct Outcome {
    pub body: String,
    pub checks: Vec<Check>,
}

pub fn text_body(checks: &[Check]) -> String {
    checks.iter().map(|c| c.line() + "\n").collect()
}

pub fn json_body<T: Serialize>(report: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).context("serializing report")?;
    s.push('\n');
    Ok(s)
}

/// Writes `rows` (header first) as CSV.
pub fn csv_body(rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().context("flushing csv")?;
    Ok(String::from_utf8(bytes)?)
}

/// Number formatting shared by the CSV reports; empty for missing values.
pub fn cell(value: Option<f64>) -> String {
    value.map_or_else(String::new, |v| format!("{v:e}"))
}

/// Replaces `path` with `body` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, body: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(body.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
