//! Monte Carlo campaign on the stochastic fixed-mass-spring bar and the
//! standard artifact set (moments.csv, samples.csv, report.json).
//!
//! Run with `cargo run --release --example bar_campaign`.

use parmc::bar::BarConfig;
use parmc::cost::PriceSheet;
use parmc::engine::{run, ProblemConfig, RunConfig};
use parmc::report::write_run_artifacts;
use parmc::stats::HistogramSpec;

fn main() {
    let config = RunConfig {
        n_mc: 256,
        n_serial: 32,
        n_workers: 4,
        base_seed: 7,
        lease_duration_ms: 60_000,
        problem: ProblemConfig::Bar(BarConfig::default()),
        histogram_spec: HistogramSpec::normalized_default(),
        output_dir: "out/bar_campaign".into(),
    };

    let merged = run(&config).expect("campaign failed");
    let report = write_run_artifacts(
        &config.output_dir,
        &config,
        &merged,
        &PriceSheet::default(),
    )
    .expect("writing artifacts failed");

    let tip_final = merged.channel_moments.last().unwrap();
    println!("seed:           {}", config.base_seed);
    println!("realizations:   {}", config.n_mc);
    println!("tip u(L,T):     mean {:.3e} m, std {:.3e} m", tip_final.mean().unwrap(), tip_final.std().unwrap());
    println!("total time:     {:.1} ms", report.timing.total_ms);
    println!("artifacts in:   {}", config.output_dir.display());
}
