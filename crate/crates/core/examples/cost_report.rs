//! Cost accounting against a pay-per-VM-hour pricing model: run a
//! campaign, then price it under hourly-ceiling and fractional billing.
//!
//! Run with `cargo run --release --example cost_report`.

use parmc::cost::{estimate_cost, extrapolate_serial, speedup, PriceSheet};
use parmc::engine::{run, RunConfig};

fn main() {
    let mut config = RunConfig::toy(262_144, 42);
    config.n_serial = 256;
    config.n_workers = 4;
    let merged = run(&config).expect("campaign failed");

    let avg_task_ms = merged.timing.process_ms * config.n_workers as f64 / config.n_tasks() as f64;
    let serial_ms = extrapolate_serial(avg_task_ms, config.n_tasks());
    println!("total:   {:.1} ms on {} workers", merged.timing.total_ms, config.n_workers);
    println!("serial:  {serial_ms:.1} ms (extrapolated)");
    println!("speedup: {:.2}", speedup(serial_ms, merged.timing.total_ms));

    let prices = PriceSheet {
        vm_hour_price: 0.12,
        storage_price: 0.0001,
        egress_price: 0.01,
        fractional_billing: false,
    };
    let hourly = estimate_cost(&merged.timing, merged.storage_bytes, 0, &prices);
    let fractional = estimate_cost(
        &merged.timing,
        merged.storage_bytes,
        0,
        &PriceSheet {
            fractional_billing: true,
            ..prices
        },
    );
    println!("storage: {:.3} MB of intermediates", merged.storage_bytes as f64 / (1024.0 * 1024.0));
    println!("cost (hour-ceiling billing): ${hourly:.4}");
    println!("cost (fractional billing):   ${fractional:.6}");
}
