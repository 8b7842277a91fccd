//! Split / process / merge orchestration.
//!
//! `split` partitions a campaign into tasks of `n_serial` realizations
//! each, `run` executes them on a pool of worker threads over the
//! lease-based queue, and `merge` combines the per-task accumulators in a
//! canonical order so the merged statistics are bit-identical for any
//! worker count and any completion order.

pub mod queue;

use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bar::{simulate_realization, BarConfig, BarError};
use crate::cost::TimingBreakdown;
use crate::rng::{derive_stream, StreamId};
use crate::stats::{HistogramSpec, MomentAccumulator};
use queue::TaskQueue;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown task index {0}")]
    UnknownTask(u64),
    #[error("missing result for task {0}")]
    MissingTask(u64),
    #[error("duplicate result for task {0}")]
    DuplicateTask(u64),
    #[error("problem failed in task {task_index}, realization {realization}: {source}")]
    Problem {
        task_index: u64,
        realization: u64,
        source: BarError,
    },
}

/// The stochastic problem a campaign samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemConfig {
    /// Square of a uniform integer digit 0..=9. Exact moments are known by
    /// enumeration (mean 28.5, variance 721.05), which makes it the
    /// end-to-end oracle for the pipeline.
    ToyDigitSquare {
        /// Artificial CPU work per realization, for speedup benchmarks.
        #[serde(default)]
        busy_work_iters: u64,
    },
    Bar(BarConfig),
}

impl ProblemConfig {
    pub fn toy() -> Self {
        Self::ToyDigitSquare { busy_work_iters: 0 }
    }

    /// One output channel per tracked statistic: a single scalar for the
    /// toy problem, one per time step of the tip displacement for the bar.
    pub fn n_channels(&self) -> usize {
        match self {
            Self::ToyDigitSquare { .. } => 1,
            Self::Bar(bar) => bar.n_steps() + 1,
        }
    }

    /// Physical time associated with each channel, for moments.csv.
    pub fn channel_times(&self) -> Vec<f64> {
        match self {
            Self::ToyDigitSquare { .. } => vec![0.0],
            Self::Bar(bar) => (0..=bar.n_steps()).map(|i| i as f64 * bar.dt).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        match self {
            Self::ToyDigitSquare { .. } => Ok(()),
            Self::Bar(bar) => bar.validate().map_err(|e| EngineError::Config(e.to_string())),
        }
    }
}

/// Full description of a Monte Carlo campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Total realizations N_MC.
    pub n_mc: u64,
    /// Realizations per task N_serial; must divide n_mc.
    pub n_serial: u64,
    /// Concurrent workers (the stand-in for cloud VMs).
    pub n_workers: u64,
    pub base_seed: u64,
    pub lease_duration_ms: u64,
    pub problem: ProblemConfig,
    pub histogram_spec: HistogramSpec,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn toy(n_mc: u64, base_seed: u64) -> Self {
        Self {
            n_mc,
            n_serial: (n_mc / 16).clamp(1, 256),
            n_workers: 1,
            base_seed,
            lease_duration_ms: 30_000,
            problem: ProblemConfig::toy(),
            histogram_spec: HistogramSpec::normalized_default(),
            output_dir: PathBuf::from("out"),
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.n_mc < 1 || self.n_serial < 1 || self.n_workers < 1 {
            return Err(EngineError::Config(
                "n_mc, n_serial and n_workers must all be >= 1".into(),
            ));
        }
        if self.n_mc % self.n_serial != 0 {
            return Err(EngineError::Config(format!(
                "n_mc ({}) must be a multiple of n_serial ({})",
                self.n_mc, self.n_serial
            )));
        }
        if self.lease_duration_ms == 0 {
            return Err(EngineError::Config("lease_duration_ms must be > 0".into()));
        }
        self.histogram_spec
            .validate()
            .map_err(|e| EngineError::Config(e.to_string()))?;
        self.problem.validate()
    }

    pub fn n_tasks(&self) -> u64 {
        self.n_mc / self.n_serial
    }

    pub fn lease_duration(&self) -> Duration {
        Duration::from_millis(self.lease_duration_ms)
    }
}

/// Unit of distributed work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_index: u64,
    pub n_realizations: u64,
    pub stream_id: StreamId,
}

/// Value-typed output of one task: moment accumulators per channel plus
/// the tracked scalar samples (one per realization).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub task_index: u64,
    pub channel_moments: Vec<MomentAccumulator>,
    pub tracked_samples: Vec<f64>,
    pub wall_time: Duration,
    pub bytes_written: u64,
}

/// Aggregate of a whole campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergedResult {
    pub channel_moments: Vec<MomentAccumulator>,
    pub tracked_samples: Vec<f64>,
    pub timing: TimingBreakdown,
    pub storage_bytes: u64,
}

/// Partition the campaign into N_tasks = n_mc / n_serial task specs with
/// contiguous indices and pairwise-distinct stream ids.
pub fn split(config: &RunConfig) -> Result<Vec<TaskSpec>, EngineError> {
    config.validate()?;
    Ok((0..config.n_tasks())
        .map(|i| TaskSpec {
            task_index: i,
            n_realizations: config.n_serial,
            stream_id: StreamId::new(config.base_seed, i),
        })
        .collect())
}

/// Execute one task: run its realizations off its private stream and fold
/// them into per-channel accumulators.
pub fn execute_task(problem: &ProblemConfig, spec: &TaskSpec) -> Result<TaskResult, EngineError> {
    let started = Instant::now();
    let mut rng = derive_stream(spec.stream_id.base_seed, spec.stream_id.task_index);
    let mut channels = vec![MomentAccumulator::new(); problem.n_channels()];
    let mut tracked = Vec::with_capacity(spec.n_realizations as usize);
    for realization in 0..spec.n_realizations {
        match problem {
            ProblemConfig::ToyDigitSquare { busy_work_iters } => {
                use rand::Rng;
                let digit: u32 = rng.gen_range(0..=9);
                let x = (digit * digit) as f64;
                busy_work(*busy_work_iters);
                channels[0].update(x).expect("digit squares are finite");
                tracked.push(x);
            }
            ProblemConfig::Bar(bar) => {
                let sol = simulate_realization(bar, &mut rng).map_err(|source| {
                    EngineError::Problem {
                        task_index: spec.task_index,
                        realization,
                        source,
                    }
                })?;
                for (acc, &u) in channels.iter_mut().zip(&sol.tip_displacement) {
                    acc.update(u).map_err(|_| EngineError::Problem {
                        task_index: spec.task_index,
                        realization,
                        source: BarError::InvalidConfig("non-finite displacement".into()),
                    })?;
                }
                tracked.push(*sol.tip_displacement.last().expect("at least one step"));
            }
        }
    }
    let bytes_written =
        channels.len() as u64 * MomentAccumulator::BYTES + tracked.len() as u64 * 8;
    Ok(TaskResult {
        task_index: spec.task_index,
        channel_moments: channels,
        tracked_samples: tracked,
        wall_time: started.elapsed(),
        bytes_written,
    })
}

fn busy_work(iters: u64) {
    let mut x = 1.000000001f64;
    for _ in 0..iters {
        x = x.sqrt() * x;
    }
    std::hint::black_box(x);
}

/// Combine per-task results into campaign statistics.
///
/// Accumulators are merged over a binary reduction tree in ascending
/// task_index order, so the result does not depend on completion order or
/// worker count. Tracked samples are concatenated in task order.
pub fn merge(mut results: Vec<TaskResult>, config: &RunConfig) -> Result<MergedResult, EngineError> {
    let n_tasks = config.n_tasks();
    results.sort_by_key(|r| r.task_index);
    for (i, r) in results.iter().enumerate() {
        if (i as u64) < r.task_index {
            return Err(EngineError::MissingTask(i as u64));
        }
        if (i as u64) > r.task_index {
            return Err(EngineError::DuplicateTask(r.task_index));
        }
    }
    if (results.len() as u64) < n_tasks {
        return Err(EngineError::MissingTask(results.len() as u64));
    }
    if (results.len() as u64) > n_tasks {
        return Err(EngineError::DuplicateTask(n_tasks));
    }

    let n_channels = config.problem.n_channels();
    let mut channel_moments = Vec::with_capacity(n_channels);
    for c in 0..n_channels {
        let per_task: Vec<MomentAccumulator> =
            results.iter().map(|r| r.channel_moments[c]).collect();
        channel_moments.push(tree_merge(&per_task));
    }
    let storage_bytes = results.iter().map(|r| r.bytes_written).sum();
    let mut tracked_samples = Vec::with_capacity(config.n_mc as usize);
    for r in results {
        tracked_samples.extend(r.tracked_samples);
    }
    Ok(MergedResult {
        channel_moments,
        tracked_samples,
        timing: TimingBreakdown::default(),
        storage_bytes,
    })
}

// Canonical pairwise reduction: adjacent pairs per level.
fn tree_merge(accs: &[MomentAccumulator]) -> MomentAccumulator {
    let mut level: Vec<MomentAccumulator> = accs.to_vec();
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| {
                if pair.len() == 2 {
                    pair[0].merge(&pair[1])
                } else {
                    pair[0]
                }
            })
            .collect();
    }
    level.first().copied().unwrap_or_default()
}

/// Deterministic fault-injection plan for re-queue testing: the first
/// execution of every selected task has its lease force-expired before
/// completing, so the task runs twice and completes twice.
#[derive(Debug, Clone, Copy)]
pub struct FaultPlan {
    /// Fault every task whose index is a multiple of this.
    pub expire_every: u64,
}

impl FaultPlan {
    fn selects(&self, task_index: u64) -> bool {
        self.expire_every > 0 && task_index % self.expire_every == 0
    }
}

/// Execute the full split -> process -> merge pipeline.
pub fn run(config: &RunConfig) -> Result<MergedResult, EngineError> {
    run_with_faults(config, None)
}

/// As `run`, with an optional fault-injection plan.
pub fn run_with_faults(
    config: &RunConfig,
    faults: Option<FaultPlan>,
) -> Result<MergedResult, EngineError> {
    let total_start = Instant::now();

    let split_start = Instant::now();
    let specs = split(config)?;
    let queue = Arc::new(TaskQueue::new(specs, config.lease_duration()));
    let split_ms = split_start.elapsed().as_secs_f64() * 1e3;

    let process_start = Instant::now();
    let abort = Arc::new(AtomicBool::new(false));
    let first_error: Arc<Mutex<Option<EngineError>>> = Arc::new(Mutex::new(None));
    // tracks which faulted tasks have already been through their forced
    // expiry, so the re-execution runs clean
    let faulted: Arc<Mutex<std::collections::HashSet<u64>>> =
        Arc::new(Mutex::new(std::collections::HashSet::new()));

    std::thread::scope(|scope| {
        let sweeper_queue = Arc::clone(&queue);
        let sweeper_abort = Arc::clone(&abort);
        let sweep_period = (config.lease_duration() / 4).max(Duration::from_millis(10));
        scope.spawn(move || {
            while !sweeper_queue.all_done() && !sweeper_abort.load(Ordering::Relaxed) {
                sweeper_queue.expire_leases(Instant::now());
                std::thread::sleep(sweep_period.min(Duration::from_millis(50)));
            }
        });

        for _ in 0..config.n_workers {
            let queue = Arc::clone(&queue);
            let abort = Arc::clone(&abort);
            let first_error = Arc::clone(&first_error);
            let faulted = Arc::clone(&faulted);
            let problem = &config.problem;
            scope.spawn(move || {
                loop {
                    if abort.load(Ordering::Relaxed) {
                        return;
                    }
                    let Some(spec) = queue.acquire_task(Instant::now()) else {
                        if queue.all_done() {
                            return;
                        }
                        // leased tasks may still expire and need pickup
                        std::thread::sleep(Duration::from_millis(1));
                        continue;
                    };
                    let inject = faults
                        .map(|f| f.selects(spec.task_index))
                        .unwrap_or(false)
                        && faulted.lock().unwrap().insert(spec.task_index);
                    if inject {
                        // simulate a lease timeout on a still-running
                        // worker: the task re-queues, and this execution
                        // later races its duplicate completion
                        queue.force_expire(spec.task_index);
                    }
                    match execute_task(problem, &spec) {
                        Ok(result) => {
                            let _ = queue.complete_task(result);
                        }
                        Err(e) => {
                            *first_error.lock().unwrap() = Some(e);
                            abort.store(true, Ordering::Relaxed);
                            return;
                        }
                    }
                }
            });
        }
    });

    if let Some(e) = first_error.lock().unwrap().take() {
        return Err(e);
    }
    let process_ms = process_start.elapsed().as_secs_f64() * 1e3;

    let merge_start = Instant::now();
    // intermediates are dropped once merged; only the merged result survives
    let results = queue.take_results();
    let mut merged = merge(results, config)?;
    let merge_ms = merge_start.elapsed().as_secs_f64() * 1e3;

    merged.timing = TimingBreakdown {
        split_ms,
        process_ms,
        merge_ms,
        total_ms: total_start.elapsed().as_secs_f64() * 1e3,
        n_tasks: config.n_tasks(),
        n_workers: config.n_workers,
    };
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_large_campaign() {
        let mut config = RunConfig::toy(1_048_576, 0);
        config.n_serial = 256;
        let specs = split(&config).unwrap();
        assert_eq!(specs.len(), 4096);
    }

    #[test]
    fn split_unit_partition() {
        let mut config = RunConfig::toy(16, 0);
        config.n_serial = 1;
        let specs = split(&config).unwrap();
        assert_eq!(specs.len(), 16);
        for (i, s) in specs.iter().enumerate() {
            assert_eq!(s.task_index, i as u64);
            assert_eq!(s.n_realizations, 1);
        }
        let total: u64 = specs.iter().map(|s| s.n_realizations).sum();
        assert_eq!(total, 16);
        let ids: std::collections::HashSet<u128> =
            specs.iter().map(|s| s.stream_id.as_u128()).collect();
        assert_eq!(ids.len(), 16);
    }

    #[test]
    fn split_single_partition() {
        let mut config = RunConfig::toy(16, 0);
        config.n_serial = 16;
        assert_eq!(split(&config).unwrap().len(), 1);
    }

    #[test]
    fn split_rejects_indivisible() {
        let mut config = RunConfig::toy(10, 0);
        config.n_serial = 3;
        assert!(matches!(split(&config), Err(EngineError::Config(_))));
    }

    #[test]
    fn split_rejects_zero_counts() {
        let mut config = RunConfig::toy(16, 0);
        config.n_workers = 0;
        assert!(split(&config).is_err());
    }

    fn toy_config(n_mc: u64, n_serial: u64, n_workers: u64, seed: u64) -> RunConfig {
        let mut config = RunConfig::toy(n_mc, seed);
        config.n_serial = n_serial;
        config.n_workers = n_workers;
        config
    }

    #[test]
    fn merge_sixteen_single_sample_tasks() {
        // Fig. 3 setup: 16 realizations of the digit square, one per task
        let config = toy_config(16, 1, 1, 42);
        let specs = split(&config).unwrap();
        let results: Vec<TaskResult> = specs
            .iter()
            .map(|s| execute_task(&config.problem, s).unwrap())
            .collect();
        let direct = crate::stats::accumulate(
            results.iter().map(|r| r.tracked_samples[0]),
        )
        .unwrap();
        let merged = merge(results, &config).unwrap();
        assert_eq!(merged.channel_moments[0].count(), 16);
        assert!((merged.channel_moments[0].raw_mean() - direct.raw_mean()).abs() < 1e-12);
        assert!((merged.channel_moments[0].m2() - direct.m2()).abs() < 1e-9);
        assert_eq!(merged.tracked_samples.len(), 16);
    }

    #[test]
    fn merge_single_task_is_identity() {
        let config = toy_config(8, 8, 1, 1);
        let specs = split(&config).unwrap();
        let result = execute_task(&config.problem, &specs[0]).unwrap();
        let merged = merge(vec![result.clone()], &config).unwrap();
        assert_eq!(merged.channel_moments, result.channel_moments);
        assert_eq!(merged.tracked_samples, result.tracked_samples);
    }

    #[test]
    fn merge_rejects_missing_and_duplicate() {
        let config = toy_config(4, 1, 1, 0);
        let specs = split(&config).unwrap();
        let results: Vec<TaskResult> = specs
            .iter()
            .map(|s| execute_task(&config.problem, s).unwrap())
            .collect();
        let mut missing = results.clone();
        missing.remove(2);
        assert!(matches!(
            merge(missing, &config),
            Err(EngineError::MissingTask(2))
        ));
        let mut duplicated = results.clone();
        duplicated[3] = duplicated[0].clone();
        assert!(matches!(
            merge(duplicated, &config),
            Err(EngineError::DuplicateTask(0))
        ));
    }

    #[test]
    fn merge_is_completion_order_independent() {
        let config = toy_config(64, 4, 1, 9);
        let specs = split(&config).unwrap();
        let mut results: Vec<TaskResult> = specs
            .iter()
            .map(|s| execute_task(&config.problem, s).unwrap())
            .collect();
        let a = merge(results.clone(), &config).unwrap();
        results.reverse();
        let b = merge(results, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn run_toy_mean_in_range() {
        let merged = run(&toy_config(16, 4, 2, 7)).unwrap();
        let mean = merged.channel_moments[0].mean().unwrap();
        assert!((0.0..=81.0).contains(&mean));
        assert_eq!(merged.tracked_samples.len(), 16);
    }

    #[test]
    fn run_is_worker_count_invariant() {
        let a = run(&toy_config(256, 16, 1, 5)).unwrap();
        let b = run(&toy_config(256, 16, 4, 5)).unwrap();
        let c = run(&toy_config(256, 16, 19, 5)).unwrap();
        assert_eq!(a.channel_moments, b.channel_moments);
        assert_eq!(b.channel_moments, c.channel_moments);
        assert_eq!(a.tracked_samples, b.tracked_samples);
        assert_eq!(b.tracked_samples, c.tracked_samples);
    }

    #[test]
    fn faulted_run_matches_fault_free_baseline() {
        let config = toy_config(256, 8, 4, 11);
        let baseline = run(&config).unwrap();
        let faulted = run_with_faults(&config, Some(FaultPlan { expire_every: 5 })).unwrap();
        assert_eq!(baseline.channel_moments, faulted.channel_moments);
        assert_eq!(baseline.tracked_samples, faulted.tracked_samples);
    }

    #[test]
    fn run_aborts_on_problem_error() {
        let mut config = toy_config(4, 1, 2, 0);
        // dispersion above the finite-variance bound fails at sampling time
        config.problem = ProblemConfig::Bar(BarConfig {
            e_delta: 0.9,
            ..BarConfig::default()
        });
        assert!(matches!(run(&config), Err(EngineError::Problem { .. })));
    }
}
