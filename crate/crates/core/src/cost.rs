//! Timing, speedup, storage and monetary-cost accounting for a campaign,
//! mirroring a pay-per-VM-hour cloud billing model against the local
//! worker pool. Wall-clock timers stand in for cloud telemetry; resolution
//! is no better than 1 ms.

use serde::{Deserialize, Serialize};

/// Wall time spent in each pipeline phase.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TimingBreakdown {
    pub split_ms: f64,
    pub process_ms: f64,
    pub merge_ms: f64,
    pub total_ms: f64,
    pub n_tasks: u64,
    pub n_workers: u64,
}

/// Unit prices of the simulated provider. All zero by default.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PriceSheet {
    /// Currency per VM-hour.
    pub vm_hour_price: f64,
    /// Currency per MB-month of shared storage.
    pub storage_price: f64,
    /// Currency per MB of outbound transfer. Inbound is free.
    pub egress_price: f64,
    /// Bill fractional hours instead of the per-hour ceiling.
    pub fractional_billing: bool,
}

/// Serial-time baseline extrapolated from the average single-task time.
pub fn extrapolate_serial(avg_task_ms: f64, n_tasks: u64) -> f64 {
    avg_task_ms * n_tasks as f64
}

/// Ratio between the serial and the parallel total time.
pub fn speedup(serial_ms: f64, total_ms: f64) -> f64 {
    assert!(total_ms > 0.0, "total time must be positive");
    serial_ms / total_ms
}

const BYTES_PER_MB: f64 = 1024.0 * 1024.0;

/// Campaign cost: VM time per worker (hour-ceiling by default), storage
/// and outbound transfer. Inbound transfer is free.
pub fn estimate_cost(
    breakdown: &TimingBreakdown,
    bytes_stored: u64,
    bytes_egress: u64,
    prices: &PriceSheet,
) -> f64 {
    let hours = breakdown.total_ms / 3.6e6;
    let billed_hours = if prices.fractional_billing {
        hours
    } else {
        hours.ceil()
    };
    let vm_cost = breakdown.n_workers as f64 * billed_hours * prices.vm_hour_price;
    let storage_cost = bytes_stored as f64 / BYTES_PER_MB * prices.storage_price;
    let egress_cost = bytes_egress as f64 / BYTES_PER_MB * prices.egress_price;
    vm_cost + storage_cost + egress_cost
}

/// One row of a speedup study, backing the workers-vs-time plots.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpeedupRow {
    pub n_workers: u64,
    pub total_ms: f64,
    pub speedup: f64,
}
