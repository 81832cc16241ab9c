//! Configuration-driven experiments: parse a TOML config, dispatch to the
//! library, and emit a JSON report with CSV side tables.

mod config;
mod report;
mod runners;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub use config::{
    CoefficientConfig, DomainConfig, Expectation, ExperimentConfig, ExperimentKind, FieldsConfig,
    Params, QuadratureConfig, EXPERIMENT_KINDS,
};
pub use report::{CheckRow, Comparison, OrderRow, RunReport, REPORT_VERSION};

use crate::Result;

/// Overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "MAXLAB_OUT_DIR";

/// A side table written next to the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub file: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub artifacts: Vec<Artifact>,
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let start = Instant::now();
    let out = runners::dispatch(config)?;
    let mut report = RunReport::new(config, out.rows);
    report.orders = out.orders;
    report.details = out.details;
    report.wall_time_s = start.elapsed().as_secs_f64();
    report.timestamp_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    Ok(RunOutput {
        report,
        artifacts: out.artifacts,
    })
}

pub fn output_dir(config: &ExperimentConfig) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => PathBuf::from(config.output.as_deref().unwrap_or("maxlab-out")),
    }
}

impl RunOutput {
    /// Writes `report.json`, `report.csv` and the side tables; returns the paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        let json = dir.join("report.json");
        std::fs::write(&json, self.report.to_json()? + "\n")?;
        paths.push(json);
        let csv = dir.join("report.csv");
        self.report.write_csv(std::fs::File::create(&csv)?)?;
        paths.push(csv);
        for a in &self.artifacts {
            let p = dir.join(&a.file);
            std::fs::write(&p, &a.bytes)?;
            paths.push(p);
        }
        Ok(paths)
    }
}
