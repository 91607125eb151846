//! Per-slot evaluation quantities, smoothing and cross-run aggregation.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{network_cost, SlotOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub slot: usize,
    pub cost_s: f64,
    pub drop_rate: f64,
    pub throughput_bps: f64,
    pub generated_bps: f64,
    /// Rate-weighted space-segment hops (ISL and GSL) of delivered traffic.
    pub avg_hops: f64,
    /// Rate-weighted delay of delivered traffic.
    pub avg_delay_s: f64,
}

pub fn slot_metrics(slot: usize, outcome: &SlotOutcome) -> MetricsRecord {
    let generated = outcome.total_generated();
    let delivered = outcome.total_delivered();
    let drop_rate = if generated > 0.0 { (1.0 - delivered / generated).clamp(0.0, 1.0) } else { 0.0 };
    let (avg_hops, avg_delay_s) = if delivered > 0.0 {
        // The fiber edge is terrestrial, so it is not counted as a hop.
        let hops: f64 = outcome.delivered.iter().map(|d| d.rate_bps * d.hops.saturating_sub(1) as f64).sum();
        let delay: f64 = outcome.delivered.iter().map(|d| d.rate_bps * d.delay_s).sum();
        (hops / delivered, delay / delivered)
    } else {
        (0.0, 0.0)
    };
    MetricsRecord {
        slot,
        cost_s: network_cost(outcome),
        drop_rate,
        throughput_bps: if generated > 0.0 { delivered } else { 0.0 },
        generated_bps: generated,
        avg_hops,
        avg_delay_s,
    }
}

/// Trailing mean over `min(window, elapsed)` values, reported from index
/// `window / 2` onward as `(index, value)` pairs.
pub fn running_mean(series: &[f64], window: usize) -> Vec<(usize, f64)> {
    let window = window.max(1);
    let mut sum = 0.0;
    let mut out = Vec::with_capacity(series.len());
    for (i, v) in series.iter().enumerate() {
        sum += v;
        if i >= window {
            sum -= series[i - window];
        }
        if i >= window / 2 {
            let n = (i + 1).min(window);
            out.push((i, sum / n as f64));
        }
    }
    out
}

/// Number of slots in half a day.
pub fn half_day_window(slot_duration_s: f64) -> usize {
    ((43_200.0 / slot_duration_s).floor() as usize).max(1)
}

/// Pointwise mean and sample standard deviation across runs.
pub fn aggregate_runs(runs: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let Some(first) = runs.first() else {
        return Ok((Vec::new(), Vec::new()));
    };
    let len = first.len();
    if let Some(bad) = runs.iter().find(|r| r.len() != len) {
        return Err(Error::LengthMismatch { expected: len, found: bad.len() });
    }
    let n = runs.len() as f64;
    let mut mean = vec![0.0; len];
    let mut std = vec![0.0; len];
    for i in 0..len {
        let m = runs.iter().map(|r| r[i]).sum::<f64>() / n;
        mean[i] = m;
        if runs.len() > 1 {
            let ss: f64 = runs.iter().map(|r| (r[i] - m).powi(2)).sum();
            std[i] = (ss / (n - 1.0)).sqrt();
        }
    }
    Ok((mean, std))
}

#[derive(Serialize)]
struct CsvRow<'a> {
    slot: usize,
    utc_s: f64,
    router: &'a str,
    seed: u64,
    cost_s: f64,
    drop_rate: f64,
    throughput_bps: f64,
    generated_bps: f64,
    avg_hops: f64,
    avg_delay_s: f64,
}

/// Writes the per-slot metrics CSV (header included).
pub fn write_metrics_csv<W: Write>(
    out: W,
    router: &str,
    seed: u64,
    start_utc_s: f64,
    slot_duration_s: f64,
    records: &[MetricsRecord],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(CsvRow {
            slot: r.slot,
            utc_s: start_utc_s + r.slot as f64 * slot_duration_s,
            router,
            seed,
            cost_s: r.cost_s,
            drop_rate: r.drop_rate,
            throughput_bps: r.throughput_bps,
            generated_bps: r.generated_bps,
            avg_hops: r.avg_hops,
            avg_delay_s: r.avg_delay_s,
        })?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Run-level aggregates over a slot range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub router: String,
    pub seed: u64,
    pub slots: usize,
    pub mean_cost_s: f64,
    pub mean_drop_rate: f64,
    pub mean_throughput_bps: f64,
    pub mean_generated_bps: f64,
    pub mean_avg_hops: f64,
    pub total_delivered_bits: f64,
}

impl RunSummary {
    pub fn from_records(router: &str, seed: u64, records: &[MetricsRecord], slot_duration_s: f64) -> Self {
        let n = records.len().max(1) as f64;
        let mean = |f: fn(&MetricsRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
        Self {
            router: router.to_string(),
            seed,
            slots: records.len(),
            mean_cost_s: mean(|r| r.cost_s),
            mean_drop_rate: mean(|r| r.drop_rate),
            mean_throughput_bps: mean(|r| r.throughput_bps),
            mean_generated_bps: mean(|r| r.generated_bps),
            mean_avg_hops: mean(|r| r.avg_hops),
            total_delivered_bits: records.iter().map(|r| r.throughput_bps * slot_duration_s).sum(),
        }
    }
}
