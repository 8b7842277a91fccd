//! Run artifacts: moments.csv, samples.csv, report.json, histogram and
//! residue files, speedup_study.csv. Every file is written to a temporary
//! sibling and renamed into place, so a file is either fully written or
//! absent.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cost::{PriceSheet, SpeedupRow, TimingBreakdown};
use crate::engine::{MergedResult, RunConfig};
use crate::stats::{Histogram, ResidueReport};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write-then-rename so readers never observe a torn file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), ReportError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(path))?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(contents).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// moments.csv: channel_index, time, mean, std.
pub fn write_moments_csv(
    path: &Path,
    merged: &MergedResult,
    channel_times: &[f64],
) -> Result<(), ReportError> {
    let mut out = String::from("channel_index,time,mean,std\n");
    for (i, acc) in merged.channel_moments.iter().enumerate() {
        let mean = acc.mean().unwrap_or(0.0);
        let std = acc.std().unwrap_or(0.0);
        let time = channel_times.get(i).copied().unwrap_or(0.0);
        out.push_str(&format!("{i},{time:.17e},{mean:.17e},{std:.17e}\n"));
    }
    write_atomic(path, out.as_bytes())
}

/// samples.csv: tracked scalar samples, one per line, in task order.
pub fn write_samples_csv(path: &Path, merged: &MergedResult) -> Result<(), ReportError> {
    let mut out = String::from("sample\n");
    for x in &merged.tracked_samples {
        out.push_str(&format!("{x:.17e}\n"));
    }
    write_atomic(path, out.as_bytes())
}

/// Histogram CSV: bin_center, density.
pub fn write_histogram_csv(path: &Path, histogram: &Histogram) -> Result<(), ReportError> {
    let mut out = String::from("bin_center,density\n");
    for (i, d) in histogram.density.iter().enumerate() {
        out.push_str(&format!("{:.17e},{d:.17e}\n", histogram.spec.bin_center(i)));
    }
    write_atomic(path, out.as_bytes())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ReportError> {
    let body = serde_json::to_vec_pretty(value)?;
    write_atomic(path, &body)
}

pub fn write_residue_report(path: &Path, report: &ResidueReport) -> Result<(), ReportError> {
    write_json(path, report)
}

/// Summary emitted as report.json for every run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub base_seed: u64,
    pub n_mc: u64,
    pub n_serial: u64,
    pub n_tasks: u64,
    pub n_workers: u64,
    pub timing: TimingBreakdown,
    pub storage_bytes: u64,
    pub storage_mb: f64,
    pub serial_extrapolated_ms: f64,
    pub speedup_vs_serial: f64,
    pub estimated_cost: f64,
}

impl RunReport {
    pub fn from_run(config: &RunConfig, merged: &MergedResult, prices: &PriceSheet) -> Self {
        let n_tasks = config.n_tasks();
        let avg_task_ms = if n_tasks > 0 {
            merged.timing.process_ms * config.n_workers as f64 / n_tasks as f64
        } else {
            0.0
        };
        let serial_ms = crate::cost::extrapolate_serial(avg_task_ms, n_tasks);
        let speedup = if merged.timing.total_ms > 0.0 {
            crate::cost::speedup(serial_ms, merged.timing.total_ms)
        } else {
            1.0
        };
        Self {
            base_seed: config.base_seed,
            n_mc: config.n_mc,
            n_serial: config.n_serial,
            n_tasks,
            n_workers: config.n_workers,
            timing: merged.timing,
            storage_bytes: merged.storage_bytes,
            storage_mb: merged.storage_bytes as f64 / (1024.0 * 1024.0),
            serial_extrapolated_ms: serial_ms,
            speedup_vs_serial: speedup,
            estimated_cost: crate::cost::estimate_cost(
                &merged.timing,
                merged.storage_bytes,
                0,
                prices,
            ),
        }
    }
}

/// speedup_study.csv: workers, total_ms, speedup.
pub fn write_speedup_csv(path: &Path, rows: &[SpeedupRow]) -> Result<(), ReportError> {
    let mut out = String::from("workers,total_ms,speedup\n");
    for r in rows {
        out.push_str(&format!("{},{:.6},{:.6}\n", r.n_workers, r.total_ms, r.speedup));
    }
    write_atomic(path, out.as_bytes())
}

/// Emit the standard per-run artifact set into `dir`.
pub fn write_run_artifacts(
    dir: &Path,
    config: &RunConfig,
    merged: &MergedResult,
    prices: &PriceSheet,
) -> Result<RunReport, ReportError> {
    write_moments_csv(&dir.join("moments.csv"), merged, &config.problem.channel_times())?;
    write_samples_csv(&dir.join("samples.csv"), merged)?;
    let report = RunReport::from_run(config, merged, prices);
    write_json(&dir.join("report.json"), &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine;

    #[test]
    fn atomic_write_leaves_no_tmp_behind() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        write_atomic(&path, b"hello").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"hello");
        assert!(!path.with_extension("tmp").exists());
    }

    #[test]
    fn run_artifacts_present_and_rerun_identical() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig::toy(64, 3);
        let merged = engine::run(&config).unwrap();
        write_run_artifacts(dir.path(), &config, &merged, &PriceSheet::default()).unwrap();
        assert!(dir.path().join("moments.csv").exists());
        assert!(dir.path().join("samples.csv").exists());
        assert!(dir.path().join("report.json").exists());
        let first = fs::read(dir.path().join("moments.csv")).unwrap();

        let merged2 = engine::run(&config).unwrap();
        write_run_artifacts(dir.path(), &config, &merged2, &PriceSheet::default()).unwrap();
        let second = fs::read(dir.path().join("moments.csv")).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn report_json_contains_seed() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig::toy(16, 777);
        let merged = engine::run(&config).unwrap();
        let report =
            write_run_artifacts(dir.path(), &config, &merged, &PriceSheet::default()).unwrap();
        assert_eq!(report.base_seed, 777);
        let body = fs::read_to_string(dir.path().join("report.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&body).unwrap();
        assert_eq!(v["base_seed"], 777);
        assert_eq!(v["n_tasks"], config.n_tasks());
    }
}
