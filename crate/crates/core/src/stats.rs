//! Storage-lean streaming statistics: single-pass moment accumulators with
//! pairwise merging, fixed-bin density histograms, and residue-based
//! convergence diagnostics between successive sample-quadrupled runs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("non-finite sample: {0}")]
    NonFiniteSample(f64),
    #[error("insufficient samples: need at least {needed}, have {have}")]
    InsufficientSamples { needed: u64, have: u64 },
    #[error("degenerate sample: zero standard deviation")]
    DegenerateSample,
    #[error("histogram specs do not match")]
    SpecMismatch,
    #[error("series length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Count, mean and centered sum of squares of a sample stream.
///
/// This is the mergeable carrier of first- and second-order statistics:
/// a task ships one of these per output channel instead of the raw samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Default for MomentAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl MomentAccumulator {
    pub const fn new() -> Self {
        Self {
            count: 0,
            mean: 0.0,
            m2: 0.0,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Single-pass Welford update.
    pub fn update(&mut self, x: f64) -> Result<(), StatsError> {
        if !x.is_finite() {
            return Err(StatsError::NonFiniteSample(x));
        }
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        Ok(())
    }

    /// Pairwise merge: exact combination of two accumulators, as if every
    /// underlying sample had been folded into one. Merging with an empty
    /// accumulator is the identity.
    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let n_a = self.count as f64;
        let n_b = other.count as f64;
        let n = n_a + n_b;
        let delta = other.mean - self.mean;
        Self {
            count: self.count + other.count,
            mean: self.mean + delta * n_b / n,
            m2: self.m2 + other.m2 + delta * delta * n_a * n_b / n,
        }
    }

    pub fn mean(&self) -> Result<f64, StatsError> {
        if self.count < 1 {
            return Err(StatsError::InsufficientSamples {
                needed: 1,
                have: self.count,
            });
        }
        Ok(self.mean)
    }

    /// Sample standard deviation, unbiased (n - 1) convention.
    pub fn std(&self) -> Result<f64, StatsError> {
        if self.count < 2 {
            return Err(StatsError::InsufficientSamples {
                needed: 2,
                have: self.count,
            });
        }
        Ok((self.m2 / (self.count - 1) as f64).sqrt())
    }

    /// Raw m2 (centered sum of squares), exposed for byte-level comparisons.
    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn raw_mean(&self) -> f64 {
        self.mean
    }

    /// Serialized footprint in bytes: count + mean + m2.
    pub const BYTES: u64 = 8 + 8 + 8;
}

/// Fold an iterator of samples into a fresh accumulator.
pub fn accumulate<I: IntoIterator<Item = f64>>(samples: I) -> Result<MomentAccumulator, StatsError> {
    let mut acc = MomentAccumulator::new();
    for x in samples {
        acc.update(x)?;
    }
    Ok(acc)
}

/// Shift samples to zero mean and unit sample standard deviation.
pub fn normalize_samples(samples: &[f64]) -> Result<Vec<f64>, StatsError> {
    let acc = accumulate(samples.iter().copied())?;
    if acc.count() < 2 {
        return Err(StatsError::InsufficientSamples {
            needed: 2,
            have: acc.count(),
        });
    }
    let std = acc.std()?;
    if std == 0.0 {
        return Err(StatsError::DegenerateSample);
    }
    let mean = acc.mean()?;
    Ok(samples.iter().map(|x| (x - mean) / std).collect())
}

/// Fixed binning shared across runs so residues compare like with like.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub lower_edge: f64,
    pub upper_edge: f64,
    pub n_bins: usize,
}

impl HistogramSpec {
    /// Default range for normalized (zero mean, unit std) variables.
    pub fn normalized_default() -> Self {
        Self {
            lower_edge: -5.0,
            upper_edge: 5.0,
            n_bins: 100,
        }
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        if !(self.lower_edge < self.upper_edge) || self.n_bins < 1 {
            return Err(StatsError::SpecMismatch);
        }
        Ok(())
    }

    pub fn bin_width(&self) -> f64 {
        (self.upper_edge - self.lower_edge) / self.n_bins as f64
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.lower_edge + (i as f64 + 0.5) * self.bin_width()
    }
}

/// Normalized density estimate. Out-of-range samples are tallied, never
/// clamped into the edge bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub spec: HistogramSpec,
    pub density: Vec<f64>,
    pub n_total: u64,
    pub n_out_of_range: u64,
}

impl Histogram {
    /// Bins are half-open [edge_i, edge_{i+1}), top bin closed.
    pub fn build(samples: &[f64], spec: HistogramSpec) -> Result<Self, StatsError> {
        spec.validate()?;
        let mut counts = vec![0u64; spec.n_bins];
        let mut out = 0u64;
        let width = spec.bin_width();
        for &x in samples {
            if !x.is_finite() {
                return Err(StatsError::NonFiniteSample(x));
            }
            if x < spec.lower_edge || x > spec.upper_edge {
                out += 1;
            } else if x == spec.upper_edge {
                counts[spec.n_bins - 1] += 1;
            } else {
                let i = ((x - spec.lower_edge) / width) as usize;
                counts[i.min(spec.n_bins - 1)] += 1;
            }
        }
        let n_total = samples.len() as u64;
        let denom = n_total as f64 * width;
        let density = counts
            .iter()
            .map(|&c| if n_total == 0 { 0.0 } else { c as f64 / denom })
            .collect();
        Ok(Self {
            spec,
            density,
            n_total,
            n_out_of_range: out,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidueQuantity {
    Pdf,
    Mean,
    Std,
}

/// Sup-norm difference between density estimates (or moment series) built
/// from n and 4n realizations; convergence is declared below tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidueReport {
    pub quantity: ResidueQuantity,
    pub n_small: u64,
    pub n_large: u64,
    pub residue: f64,
    pub per_point: Option<Vec<f64>>,
    pub tolerance: f64,
    pub converged: bool,
}

/// Reference tolerance for the PDF convergence criterion.
pub const DEFAULT_PDF_TOLERANCE: f64 = 0.05;

/// Sup over bins of |density_large - density_small|.
pub fn pdf_residue(
    h_small: &Histogram,
    h_large: &Histogram,
    tolerance: f64,
) -> Result<ResidueReport, StatsError> {
    if h_small.spec != h_large.spec {
        return Err(StatsError::SpecMismatch);
    }
    let residue = h_small
        .density
        .iter()
        .zip(&h_large.density)
        .map(|(a, b)| (b - a).abs())
        .fold(0.0f64, f64::max);
    Ok(ResidueReport {
        quantity: ResidueQuantity::Pdf,
        n_small: h_small.n_total,
        n_large: h_large.n_total,
        residue,
        per_point: None,
        tolerance,
        converged: residue < tolerance,
    })
}

/// Elementwise absolute difference of a statistic's time series between an
/// n-run and a 4n-run.
pub fn series_residue(stat_small: &[f64], stat_large: &[f64]) -> Result<Vec<f64>, StatsError> {
    if stat_small.len() != stat_large.len() {
        return Err(StatsError::LengthMismatch(stat_small.len(), stat_large.len()));
    }
    Ok(stat_small
        .iter()
        .zip(stat_large)
        .map(|(a, b)| (b - a).abs())
        .collect())
}
