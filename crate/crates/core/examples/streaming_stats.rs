//! Storage-lean statistics: single-pass moment updates, pairwise merging
//! of partial accumulators, and a fixed-bin density histogram.
//!
//! Run with `cargo run --release --example streaming_stats`.

use parmc::stats::{accumulate, Histogram, HistogramSpec, MomentAccumulator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    // incremental updates, one sample at a time
    let mut acc = MomentAccumulator::new();
    for x in [1.0, 2.0, 3.0, 4.0] {
        acc.update(x).unwrap();
    }
    println!("fold {{1,2,3,4}}: mean {}, m2 {}", acc.mean().unwrap(), acc.m2());

    // partial accumulators merge exactly, in any grouping
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let samples: Vec<f64> = (0..100_000).map(|_| rng.gen::<f64>()).collect();
    let sequential = accumulate(samples.iter().copied()).unwrap();
    let merged = samples
        .chunks(997)
        .map(|c| accumulate(c.iter().copied()).unwrap())
        .fold(MomentAccumulator::new(), |a, b| a.merge(&b));
    println!(
        "sequential mean {:.12}, merged mean {:.12}, |diff| {:.2e}",
        sequential.mean().unwrap(),
        merged.mean().unwrap(),
        (sequential.mean().unwrap() - merged.mean().unwrap()).abs()
    );

    // density histogram with out-of-range tallying
    let spec = HistogramSpec {
        lower_edge: 0.0,
        upper_edge: 1.0,
        n_bins: 10,
    };
    let h = Histogram::build(&samples, spec).unwrap();
    println!("bin densities (uniform(0,1), expect ~1.0):");
    for (i, d) in h.density.iter().enumerate() {
        println!("  [{:.1}, {:.1}): {d:.3}", spec.bin_center(i) - 0.05, spec.bin_center(i) + 0.05);
    }
}
