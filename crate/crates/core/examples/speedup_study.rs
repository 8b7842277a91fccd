//! Strong-scaling study: repeat the same campaign across worker counts,
//! verify the merged statistics are bit-identical, and report speedup
//! against an extrapolated serial baseline.
//!
//! Run with `cargo run --release --example speedup_study`.

use parmc::campaign::speedup_study;
use parmc::engine::{ProblemConfig, RunConfig};

fn main() {
    let cores = std::thread::available_parallelism().map(|n| n.get() as u64).unwrap_or(1);
    let worker_list: Vec<u64> = [1, 2, 4, 8].into_iter().filter(|&w| w <= cores).collect();

    let mut base = RunConfig::toy(2048, 3);
    base.n_serial = 32;
    base.problem = ProblemConfig::ToyDigitSquare {
        busy_work_iters: 100_000, // make each task CPU-bound
    };
    base.output_dir = "out/speedup".into();

    let study = speedup_study(&base, &worker_list, 10, &base.output_dir).expect("study failed");
    println!("serial baseline (extrapolated): {:.1} ms", study.serial_extrapolated_ms);
    for r in &study.rows {
        println!(
            "  workers {:>2}: total {:>8.1} ms, speedup {:.2}",
            r.n_workers, r.total_ms, r.speedup
        );
    }
    println!("speedup_study.csv in: {}", base.output_dir.display());
}
