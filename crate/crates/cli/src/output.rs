//! Result artifacts: results.csv, results.json and summary.json, written
//! atomically (temp file + rename).

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// One verified assertion of a run.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    /// Stable identifier of the property family the check belongs to.
    pub reference: String,
    pub pass: bool,
    pub residual: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, reference: &str, pass: bool, residual: f64) -> Self {
        Self {
            name: name.into(),
            reference: reference.into(),
            pass,
            residual,
        }
    }
}

#[derive(Serialize)]
pub struct Summary<'a> {
    pub schema_version: u32,
    pub mode: &'a str,
    pub seed: u64,
    pub pass: bool,
    pub checks: &'a [Check],
}

/// Everything a mode runner produces.
pub struct RunArtifacts {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub results: serde_json::Value,
    pub checks: Vec<Check>,
}

impl RunArtifacts {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

pub fn write_artifacts(
    out_dir: &Path,
    mode: &str,
    seed: u64,
    artifacts: &RunArtifacts,
) -> Result<()> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let mut csv = csv::WriterBuilder::new().from_writer(Vec::new());
    csv.write_record(&artifacts.header)?;
    for row in &artifacts.rows {
        csv.write_record(row)?;
    }
    write_atomic(&out_dir.join("results.csv"), &csv.into_inner()?)?;

    let results = serde_json::to_vec_pretty(&artifacts.results)?;
    write_atomic(&out_dir.join("results.json"), &results)?;

    let summary = Summary {
        schema_version: 1,
        mode,
        seed,
        pass: artifacts.all_pass(),
        checks: &artifacts.checks,
    };
    write_atomic(
        &out_dir.join("summary.json"),
        &serde_json::to_vec_pretty(&summary)?,
    )?;
    Ok(())
}
