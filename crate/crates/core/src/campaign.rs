//! Multi-run campaign studies: the sample-quadrupling convergence protocol
//! and the worker-count speedup study. Both reuse one base seed, so every
//! smaller run's sample set is a prefix of the larger run's.

use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::cost::{extrapolate_serial, speedup, PriceSheet, SpeedupRow};
use crate::engine::{self, split, EngineError, MergedResult, RunConfig};
use crate::report::{self, ReportError};
use crate::stats::{
    normalize_samples, pdf_residue, series_residue, Histogram, ResidueQuantity, ResidueReport,
    StatsError,
};

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("n_list must quadruple at each entry: {0} does not follow {1}")]
    NotQuadrupling(u64, u64),
    #[error("n_list entry {0} is not divisible by n_serial {1}")]
    NotDivisible(u64, u64),
    #[error("n_list and worker_list must be nonempty")]
    EmptyList,
    #[error("merged moments differ between {0} and {1} workers")]
    InvarianceViolation(u64, u64),
}

/// Residues between one pair of successive runs (n and 4n).
#[derive(Debug, Clone, Serialize)]
pub struct ConvergencePair {
    pub n_small: u64,
    pub n_large: u64,
    pub pdf: ResidueReport,
    /// Sup over time of the mean-series residue.
    pub mean_residue: f64,
    /// Sup over time of the std-series residue.
    pub std_residue: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStudy {
    pub n_list: Vec<u64>,
    pub pairs: Vec<ConvergencePair>,
    pub converged: bool,
}

fn validate_n_list(n_list: &[u64], n_serial: u64) -> Result<(), CampaignError> {
    if n_list.is_empty() {
        return Err(CampaignError::EmptyList);
    }
    for w in n_list.windows(2) {
        if w[1] != 4 * w[0] {
            return Err(CampaignError::NotQuadrupling(w[1], w[0]));
        }
    }
    for &n in n_list {
        if n % n_serial != 0 || n == 0 {
            return Err(CampaignError::NotDivisible(n, n_serial));
        }
    }
    Ok(())
}

fn mean_series(merged: &MergedResult) -> Vec<f64> {
    merged
        .channel_moments
        .iter()
        .map(|a| a.mean().unwrap_or(0.0))
        .collect()
}

fn std_series(merged: &MergedResult) -> Vec<f64> {
    merged
        .channel_moments
        .iter()
        .map(|a| a.std().unwrap_or(0.0))
        .collect()
}

/// Run the campaign at every n in `n_list`, write per-run artifacts under
/// `out_dir/n_<n>/`, and compute PDF and moment residues between each
/// successive pair. Tracked samples are normalized per run before binning
/// on the shared histogram spec.
pub fn convergence_study(
    base: &RunConfig,
    n_list: &[u64],
    tolerance: f64,
    out_dir: &Path,
    prices: &PriceSheet,
) -> Result<ConvergenceStudy, CampaignError> {
    validate_n_list(n_list, base.n_serial)?;
    let mut runs: Vec<(u64, MergedResult, Histogram)> = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mut config = base.clone();
        config.n_mc = n;
        let merged = engine::run(&config)?;
        let normalized = normalize_samples(&merged.tracked_samples)?;
        let histogram = Histogram::build(&normalized, base.histogram_spec)?;
        let run_dir = out_dir.join(format!("n_{n}"));
        report::write_run_artifacts(&run_dir, &config, &merged, prices)?;
        report::write_histogram_csv(&run_dir.join("histogram.csv"), &histogram)?;
        runs.push((n, merged, histogram));
    }

    let mut pairs = Vec::new();
    for pair in runs.windows(2) {
        let (n_small, small, h_small) = (&pair[0].0, &pair[0].1, &pair[0].2);
        let (n_large, large, h_large) = (&pair[1].0, &pair[1].1, &pair[1].2);
        let pdf = pdf_residue(h_small, h_large, tolerance)?;
        let mean_res = series_residue(&mean_series(small), &mean_series(large))?;
        let std_res = series_residue(&std_series(small), &std_series(large))?;
        let pair = ConvergencePair {
            n_small: *n_small,
            n_large: *n_large,
            pdf: pdf.clone(),
            mean_residue: mean_res.iter().copied().fold(0.0, f64::max),
            std_residue: std_res.iter().copied().fold(0.0, f64::max),
        };
        report::write_json(
            &out_dir.join(format!("residue_{n_small}_to_{n_large}.json")),
            &pair,
        )?;
        let mean_report = ResidueReport {
            quantity: ResidueQuantity::Mean,
            n_small: *n_small,
            n_large: *n_large,
            residue: pair.mean_residue,
            per_point: Some(mean_res),
            tolerance,
            converged: pair.mean_residue < tolerance,
        };
        report::write_residue_report(
            &out_dir.join(format!("residue_mean_{n_small}_to_{n_large}.json")),
            &mean_report,
        )?;
        pairs.push(pair);
    }
    let converged = pairs.last().map(|p| p.pdf.converged).unwrap_or(false);
    let study = ConvergenceStudy {
        n_list: n_list.to_vec(),
        pairs,
        converged,
    };
    report::write_json(&out_dir.join("convergence.json"), &study)?;
    Ok(study)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpeedupStudy {
    pub serial_extrapolated_ms: f64,
    pub rows: Vec<SpeedupRow>,
}

/// Re-run the same campaign for every worker count, check that the merged
/// moments are bit-identical across counts, and emit speedup_study.csv.
///
/// The serial baseline follows the extrapolation protocol: one task is
/// executed `repetitions` times, and the average is scaled by N_tasks.
pub fn speedup_study(
    base: &RunConfig,
    worker_list: &[u64],
    repetitions: u32,
    out_dir: &Path,
) -> Result<SpeedupStudy, CampaignError> {
    if worker_list.is_empty() || worker_list.contains(&0) {
        return Err(CampaignError::EmptyList);
    }
    let specs = split(base)?;
    let mut task_ms = 0.0;
    for _ in 0..repetitions.max(1) {
        let started = std::time::Instant::now();
        engine::execute_task(&base.problem, &specs[0])?;
        task_ms += started.elapsed().as_secs_f64() * 1e3;
    }
    let avg_task_ms = task_ms / repetitions.max(1) as f64;
    let serial_ms = extrapolate_serial(avg_task_ms, base.n_tasks());

    let mut rows = Vec::new();
    let mut reference: Option<(u64, MergedResult)> = None;
    for &w in worker_list {
        let mut config = base.clone();
        config.n_workers = w;
        let merged = engine::run(&config)?;
        if let Some((w0, ref baseline)) = reference {
            if baseline.channel_moments != merged.channel_moments
                || baseline.tracked_samples != merged.tracked_samples
            {
                return Err(CampaignError::InvarianceViolation(w0, w));
            }
        }
        rows.push(SpeedupRow {
            n_workers: w,
            total_ms: merged.timing.total_ms,
            speedup: speedup(serial_ms, merged.timing.total_ms),
        });
        if reference.is_none() {
            reference = Some((w, merged));
        }
    }
    report::write_speedup_csv(&out_dir.join("speedup_study.csv"), rows.as_slice())?;
    let study = SpeedupStudy {
        serial_extrapolated_ms: serial_ms,
        rows,
    };
    report::write_json(&out_dir.join("speedup_study.json"), &study)?;
    Ok(study)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ProblemConfig;

    fn toy_base(seed: u64) -> RunConfig {
        let mut config = RunConfig::toy(4096, seed);
        config.n_serial = 256;
        config.n_workers = 2;
        config
    }

    #[test]
    fn n_list_must_quadruple() {
        let base = toy_base(1);
        let dir = tempfile::tempdir().unwrap();
        let err = convergence_study(
            &base,
            &[1024, 2048],
            0.05,
            dir.path(),
            &PriceSheet::default(),
        )
        .unwrap_err();
        assert!(matches!(err, CampaignError::NotQuadrupling(2048, 1024)));
    }

    #[test]
    fn n_list_must_divide_by_n_serial() {
        let base = toy_base(1);
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            convergence_study(&base, &[100], 0.05, dir.path(), &PriceSheet::default()),
            Err(CampaignError::NotDivisible(100, 256))
        ));
    }

    #[test]
    fn single_entry_runs_once_without_residues() {
        let base = toy_base(2);
        let dir = tempfile::tempdir().unwrap();
        let study =
            convergence_study(&base, &[1024], 0.05, dir.path(), &PriceSheet::default()).unwrap();
        assert!(study.pairs.is_empty());
        assert!(!study.converged);
        assert!(dir.path().join("n_1024/report.json").exists());
    }

    #[test]
    fn toy_residues_strictly_decrease() {
        let base = toy_base(3);
        let dir = tempfile::tempdir().unwrap();
        let study = convergence_study(
            &base,
            &[4096, 16384, 65536],
            0.05,
            dir.path(),
            &PriceSheet::default(),
        )
        .unwrap();
        assert_eq!(study.pairs.len(), 2);
        assert!(
            study.pairs[0].pdf.residue > study.pairs[1].pdf.residue,
            "{} vs {}",
            study.pairs[0].pdf.residue,
            study.pairs[1].pdf.residue
        );
    }

    #[test]
    fn prefix_property_across_runs() {
        // the n-run sample set is a prefix of the 4n-run sample set
        let base = toy_base(4);
        let mut small = base.clone();
        small.n_mc = 1024;
        let mut large = base.clone();
        large.n_mc = 4096;
        let a = engine::run(&small).unwrap();
        let b = engine::run(&large).unwrap();
        assert_eq!(a.tracked_samples[..], b.tracked_samples[..1024]);
    }

    #[test]
    fn speedup_study_single_worker_row() {
        let mut base = toy_base(5);
        base.problem = ProblemConfig::ToyDigitSquare { busy_work_iters: 200 };
        let dir = tempfile::tempdir().unwrap();
        let study =
            speedup_study(&base, &[1], 3, dir.path()).unwrap();
        assert_eq!(study.rows.len(), 1);
        assert_eq!(study.rows[0].n_workers, 1);
        assert!(study.rows[0].speedup > 0.0);
        assert!(dir.path().join("speedup_study.csv").exists());
    }

    #[test]
    fn speedup_study_checks_invariance() {
        let base = toy_base(6);
        let dir = tempfile::tempdir().unwrap();
        let study =
            speedup_study(&base, &[1, 2, 4], 1, dir.path()).unwrap();
        assert_eq!(study.rows.len(), 3);
    }

    #[test]
    fn speedup_study_rejects_zero_workers() {
        let base = toy_base(7);
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            speedup_study(&base, &[0], 1, dir.path()),
            Err(CampaignError::EmptyList)
        ));
    }
}
