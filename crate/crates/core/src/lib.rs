//! Parallel Monte Carlo campaigns organized as split / process / merge:
//! a lease-based task queue executed by a pool of workers, per-task
//! deterministic random streams, storage-lean streaming statistics with
//! pairwise merging, and residue-based convergence diagnostics.
//!
//! Two reference problems are built in: a digit-squaring toy with exactly
//! known moments, and a stochastic fixed-mass-spring bar solved per
//! realization by linear FEM plus Newmark time integration.
//!
//! See the `examples/` directory for one runnable example per capability,
//! or the `parmc` binary for the config-file driven CLI.

pub mod bar;
pub mod campaign;
pub mod cli;
pub mod config;
pub mod cost;
pub mod engine;
pub mod report;
pub mod rng;
pub mod stats;

pub use engine::{run, MergedResult, ProblemConfig, RunConfig};
pub use stats::{Histogram, HistogramSpec, MomentAccumulator};
