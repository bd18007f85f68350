//! Artifact writing. Everything here runs on one thread, after the
//! parallel work is done, so file contents depend only on (config, seed).

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use coherence_core::photonstats::write_clicks;
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::pipelines::Outcome;

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub command: String,
}

impl Provenance {
    pub fn new(seed: u64, command: impl Into<String>) -> Self {
        Self {
            tool: "coherence-lab",
            version: env!("CARGO_PKG_VERSION"),
            seed,
            command: command.into(),
        }
    }
}

/// The fixed `{config, results, provenance}` report layout.
#[derive(Serialize)]
pub struct Report<'a> {
    pub config: &'a RunConfig,
    pub results: &'a Value,
    pub provenance: Provenance,
}

impl Report<'_> {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serialisable");
        s.push('\n');
        s
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Writes CSVs, the JSON report and (optionally) SVGs for one outcome and
/// returns the report text.
pub fn write_outcome(
    out_dir: &Path,
    outcome: &Outcome,
    cfg: &RunConfig,
    command: &str,
    plot: bool,
) -> Result<String, CliError> {
    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    for (stem, curve) in &outcome.curves {
        let path = out_dir.join(format!("{stem}.csv"));
        write_text(&path, &curve.to_csv_string()?)?;
    }
    if plot {
        for (stem, svg) in &outcome.plots {
            write_text(&out_dir.join(format!("{stem}.svg")), svg)?;
        }
    }
    let report = Report {
        config: cfg,
        results: &outcome.results,
        provenance: Provenance::new(cfg.seed, command),
    }
    .to_json();
    write_text(&out_dir.join(format!("{}.json", outcome.experiment)), &report)?;
    Ok(report)
}

pub fn write_click_file(path: &Path, outcome: &Outcome) -> Result<(), CliError> {
    let Some(clicks) = &outcome.clicks else {
        return Ok(());
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    write_clicks(clicks, BufWriter::new(file))?;
    Ok(())
}
