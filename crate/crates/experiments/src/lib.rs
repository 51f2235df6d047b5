//! Experiment harness for active-IRS weighted sum-rate studies: config ingestion, user
//! placement, scenario sweeps, reference checks and persisted CSV/JSON outputs.

pub mod config;
pub mod error;
pub mod oracle;
pub mod placement;
pub mod record;
pub mod sweep;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{Command, ScenarioConfig, Scheme};
pub use error::{Error, Result};
pub use record::ResultRecord;

use oracle::CheckOutcome;
use record::OutputPaths;

/// Everything a command produces before it touches the filesystem.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub command: Command,
    pub config: ScenarioConfig,
    pub records: Vec<ResultRecord>,
    pub checks: Vec<CheckOutcome>,
    pub csv: Vec<u8>,
    /// Per-point means over drops; sweeps only.
    pub summary: Option<Vec<u8>>,
    pub runtime_ms: f64,
}

impl RunOutput {
    /// True when every row succeeded and every check passed in time.
    pub fn all_ok(&self) -> bool {
        self.records.iter().all(ResultRecord::ok) && self.checks.iter().all(|c| c.passed && c.within_time())
    }
}

pub fn run(cmd: Command, cfg: &ScenarioConfig, threads: usize) -> Result<RunOutput> {
    let t = Instant::now();
    let (records, checks, csv, summary) = if cmd == Command::Selftest {
        let checks = oracle::run_all();
        let csv = oracle::checks_csv(&checks)?;
        (Vec::new(), checks, csv, None)
    } else {
        let records = sweep::run_sweep(cmd, cfg, threads)?;
        let csv = record::records_csv(&records)?;
        let summary = record::summary_csv(&records)?;
        (records, Vec::new(), csv, Some(summary))
    };
    Ok(RunOutput {
        command: cmd,
        config: cfg.clone(),
        records,
        checks,
        csv,
        summary,
        runtime_ms: t.elapsed().as_secs_f64() * 1e3,
    })
}

/// Output directory: the explicit flag, else the environment override, else the config.
pub fn resolve_out_dir(flag: Option<&Path>, cfg: &ScenarioConfig) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match std::env::var_os(config::OUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => cfg.out_dir.clone(),
    }
}

/// Writes `<command>.csv`, `<command>_summary.csv` for sweeps and
/// `<command>.manifest.json`, each atomically.
pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<OutputPaths> {
    let name = out.command.name();
    let csv_name = format!("{name}.csv");
    let summary_name = format!("{name}_summary.csv");
    let mut files: Vec<(&str, &[u8])> = vec![(&csv_name, &out.csv)];
    if let Some(s) = &out.summary {
        files.push((&summary_name, s));
    }
    let mut m = record::manifest(out.command, &out.config, &files, &out.records, out.runtime_ms);
    if !out.checks.is_empty() {
        m["checks"] = out
            .checks
            .iter()
            .map(|c| {
                serde_json::json!({
                    "id": c.id,
                    "name": c.name,
                    "passed": c.passed,
                    "elapsed_ms": c.elapsed.as_secs_f64() * 1e3,
                    "within_time": c.within_time(),
                })
            })
            .collect();
    }
    let paths = OutputPaths {
        csv: dir.join(&csv_name),
        summary: out.summary.as_ref().map(|_| dir.join(&summary_name)),
        manifest: dir.join(format!("{name}.manifest.json")),
    };
    record::write_atomic(&paths.csv, &out.csv)?;
    if let (Some(p), Some(s)) = (&paths.summary, &out.summary) {
        record::write_atomic(p, s)?;
    }
    let mut json = serde_json::to_vec_pretty(&m)?;
    json.push(b'\n');
    record::write_atomic(&paths.manifest, &json)?;
    Ok(paths)
}
