//! Result rows, their CSV rendering and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{Command, ScenarioConfig};
use crate::error::Result;

/// Metrics of one successful evaluation. Rates are sums over users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub ul_rate: f64,
    pub dl_rate: f64,
    pub wsr_bpshz: f64,
    pub n_u: usize,
    pub n_d: usize,
    pub iterations: usize,
}

impl Metrics {
    /// Builds the WSR from the two rates so the columns agree exactly.
    pub fn new(epsilon: f64, ul_rate: f64, dl_rate: f64, n_u: usize, n_d: usize, iterations: usize) -> Self {
        Metrics { ul_rate, dl_rate, wsr_bpshz: (1.0 - epsilon) * ul_rate + epsilon * dl_rate, n_u, n_d, iterations }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub scheme: String,
    /// Position of the weight in `alloc_epsilons` (0 for single-series runs).
    pub series: usize,
    pub grid_index: usize,
    pub sweep_value: f64,
    pub epsilon: f64,
    pub n_total: usize,
    pub seed: u64,
    pub drop: usize,
    pub outcome: std::result::Result<Metrics, String>,
    /// Wall time; kept out of the CSV so reruns stay byte-identical.
    pub runtime_ms: f64,
}

impl ResultRecord {
    pub fn ok(&self) -> bool {
        self.outcome.is_ok()
    }

    pub fn metrics(&self) -> Option<&Metrics> {
        self.outcome.as_ref().ok()
    }
}

pub const CSV_HEADER: [&str; 17] = [
    "scheme",
    "series",
    "grid_index",
    "sweep_value",
    "epsilon",
    "n_total",
    "seed",
    "drop",
    "wsr_bpshz",
    "ul_rate",
    "dl_rate",
    "ul_weighted",
    "dl_weighted",
    "n_u",
    "n_d",
    "iterations",
    "error",
];

/// Nine significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

pub fn records_csv(records: &[ResultRecord]) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(CSV_HEADER)?;
    for r in records {
        let mut row = vec![
            r.scheme.clone(),
            r.series.to_string(),
            r.grid_index.to_string(),
            fmt_float(r.sweep_value),
            fmt_float(r.epsilon),
            r.n_total.to_string(),
            r.seed.to_string(),
            r.drop.to_string(),
        ];
        match &r.outcome {
            Ok(m) => {
                row.extend(
                    [m.wsr_bpshz, m.ul_rate, m.dl_rate, (1.0 - r.epsilon) * m.ul_rate, r.epsilon * m.dl_rate]
                        .map(fmt_float),
                );
                row.extend([m.n_u, m.n_d, m.iterations].map(|x| x.to_string()));
                row.push(String::new());
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(String::new(), 8));
                row.push(e.clone());
            }
        }
        w.write_record(&row)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub const SUMMARY_HEADER: [&str; 14] = [
    "scheme",
    "series",
    "grid_index",
    "sweep_value",
    "epsilon",
    "n_total",
    "drops_ok",
    "drops_failed",
    "wsr_bpshz",
    "ul_rate",
    "dl_rate",
    "ul_weighted",
    "dl_weighted",
    "n_d",
];

/// Per-(scheme, series, grid point) means over successful drops. Expects records sorted
/// so that drops of one point are contiguous.
pub fn summary_csv(records: &[ResultRecord]) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(SUMMARY_HEADER)?;
    for group in records.chunk_by(|a, b| a.scheme == b.scheme && a.series == b.series && a.grid_index == b.grid_index) {
        let ok: Vec<&Metrics> = group.iter().filter_map(ResultRecord::metrics).collect();
        let first = &group[0];
        let mut row = vec![
            first.scheme.clone(),
            first.series.to_string(),
            first.grid_index.to_string(),
            fmt_float(first.sweep_value),
            fmt_float(first.epsilon),
            first.n_total.to_string(),
            ok.len().to_string(),
            (group.len() - ok.len()).to_string(),
        ];
        if ok.is_empty() {
            row.extend(std::iter::repeat_n(String::new(), 6));
        } else {
            let mean = |f: &dyn Fn(&Metrics) -> f64| ok.iter().map(|m| f(m)).sum::<f64>() / ok.len() as f64;
            let (ul, dl) = (mean(&|m| m.ul_rate), mean(&|m| m.dl_rate));
            let e = first.epsilon;
            row.extend(
                [mean(&|m| m.wsr_bpshz), ul, dl, (1.0 - e) * ul, e * dl, mean(&|m| m.n_d as f64)].map(fmt_float),
            );
        }
        w.write_record(&row)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Object id git would assign to `bytes` as a blob in a SHA-256 repository.
pub fn git_blob_sha256(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn manifest(
    cmd: Command,
    cfg: &ScenarioConfig,
    files: &[(&str, &[u8])],
    records: &[ResultRecord],
    runtime_ms: f64,
) -> Value {
    let config: serde_json::Map<String, Value> =
        cfg.echo().into_iter().map(|(k, v)| (k.to_string(), Value::String(v))).collect();
    let outputs: Vec<Value> = files
        .iter()
        .map(|(name, bytes)| {
            json!({ "file": name, "bytes": bytes.len(), "sha256": sha256_hex(bytes), "git_blob_sha256": git_blob_sha256(bytes) })
        })
        .collect();
    let index: Vec<Value> = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            json!({
                "row": i,
                "scheme": r.scheme,
                "series": r.series,
                "grid_index": r.grid_index,
                "drop": r.drop,
                "ok": r.ok(),
                "runtime_ms": r.runtime_ms,
            })
        })
        .collect();
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": cmd.name(),
        "config": config,
        "outputs": outputs,
        "rows": records.len(),
        "failed_rows": records.iter().filter(|r| !r.ok()).count(),
        "runtime_ms": runtime_ms,
        "records": index,
    })
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Paths written by one run.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub summary: Option<PathBuf>,
    pub manifest: PathBuf,
}
