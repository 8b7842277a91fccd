//! Lease-timeout fault tolerance: force lease expiries on a fifth of the
//! tasks so they execute twice and complete twice, then check the merged
//! result is bit-identical to the fault-free baseline.
//!
//! Run with `cargo run --release --example fault_injection`.

use parmc::engine::{run, run_with_faults, FaultPlan, RunConfig};

fn main() {
    let mut config = RunConfig::toy(16_384, 42);
    config.n_serial = 64; // 256 tasks
    config.n_workers = 4;

    let baseline = run(&config).expect("baseline failed");
    let faulted = run_with_faults(&config, Some(FaultPlan { expire_every: 5 }))
        .expect("faulted run failed");

    println!("tasks:             {}", config.n_tasks());
    println!("forced expiries:   every 5th task (20%)");
    println!(
        "moments identical: {}",
        baseline.channel_moments == faulted.channel_moments
    );
    println!(
        "samples identical: {}",
        baseline.tracked_samples == faulted.tracked_samples
    );
}
