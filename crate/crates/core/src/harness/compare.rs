//! Router comparisons and the tile-parameter sweep.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::sim::{run_seeds, RouterSetup, RunResult, Scenario};
use crate::error::{Error, Result};
use crate::routers::RouterKind;
use crate::skylink::TileCodingConfig;

/// Seed-averaged aggregates of one router over an evaluation window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouterAggregate {
    pub label: String,
    pub mean_cost_s: f64,
    pub mean_drop_rate: f64,
    pub mean_throughput_bps: f64,
    pub mean_avg_hops: f64,
    pub total_delivered_bits: f64,
}

/// Relative improvement of `router` over `baseline`, in percent. `None`
/// when the baseline value is zero and the two differ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseRatio {
    pub router: String,
    pub baseline: String,
    pub cost_reduction_pct: Option<f64>,
    pub drop_reduction_pct: Option<f64>,
    pub throughput_gain_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub seeds: Vec<u64>,
    pub eval_slots: Range<usize>,
    pub routers: Vec<RouterAggregate>,
    pub ratios: Vec<PairwiseRatio>,
}

fn relative_pct(better_when_lower: bool, value: f64, baseline: f64) -> Option<f64> {
    if value == baseline {
        return Some(0.0);
    }
    if baseline == 0.0 {
        return None;
    }
    let diff = if better_when_lower { baseline - value } else { value - baseline };
    Some(100.0 * diff / baseline)
}

/// Output of [`compare_routers`]: every run, indexed `[seed][router]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub slot_duration_s: f64,
    pub setups: Vec<RouterSetup>,
    pub runs: Vec<Vec<RunResult>>,
}

impl Comparison {
    pub fn seeds(&self) -> Vec<u64> {
        self.runs.iter().filter_map(|r| r.first().map(|x| x.seed)).collect()
    }

    /// All seeds' runs of router `idx`.
    pub fn router_runs(&self, idx: usize) -> impl Iterator<Item = &RunResult> {
        self.runs.iter().map(move |r| &r[idx])
    }

    pub fn report(&self, eval_slots: Range<usize>) -> ComparisonReport {
        let n_seeds = self.runs.len().max(1) as f64;
        let tau = self.slot_duration_s;
        let routers: Vec<RouterAggregate> = self
            .setups
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mean = |f: fn(&crate::metrics::MetricsRecord) -> f64| {
                    self.router_runs(i).map(|r| r.mean_over(eval_slots.clone(), f)).sum::<f64>() / n_seeds
                };
                let delivered: f64 = self
                    .router_runs(i)
                    .flat_map(|r| r.records.iter().filter(|x| eval_slots.contains(&x.slot)))
                    .map(|x| x.throughput_bps * tau)
                    .sum();
                RouterAggregate {
                    label: s.label.clone(),
                    mean_cost_s: mean(|r| r.cost_s),
                    mean_drop_rate: mean(|r| r.drop_rate),
                    mean_throughput_bps: mean(|r| r.throughput_bps),
                    mean_avg_hops: mean(|r| r.avg_hops),
                    total_delivered_bits: delivered / n_seeds,
                }
            })
            .collect();
        let mut ratios = Vec::new();
        for a in &routers {
            for b in &routers {
                if std::ptr::eq(a, b) {
                    continue;
                }
                ratios.push(PairwiseRatio {
                    router: a.label.clone(),
                    baseline: b.label.clone(),
                    cost_reduction_pct: relative_pct(true, a.mean_cost_s, b.mean_cost_s),
                    drop_reduction_pct: relative_pct(true, a.mean_drop_rate, b.mean_drop_rate),
                    throughput_gain_pct: relative_pct(false, a.mean_throughput_bps, b.mean_throughput_bps),
                });
            }
        }
        ComparisonReport { seeds: self.seeds(), eval_slots, routers, ratios }
    }
}

/// Runs every router on the same scenario and seeds.
pub fn compare_routers(cfg: &SimConfig, setups: &[RouterSetup]) -> Result<Comparison> {
    if setups.len() < 2 {
        return Err(Error::invalid("a comparison needs at least two routers"));
    }
    let scenario = Scenario::new(cfg.clone())?;
    Ok(Comparison { slot_duration_s: cfg.slot_duration_s, setups: setups.to_vec(), runs: run_seeds(&scenario, setups)? })
}

/// Convenience: compare router kinds with the configured parameters.
pub fn compare_kinds(cfg: &SimConfig, kinds: &[RouterKind]) -> Result<Comparison> {
    let setups: Vec<RouterSetup> = kinds.iter().map(|&k| RouterSetup::from_config(cfg, k)).collect();
    compare_routers(cfg, &setups)
}

/// Mean SkyLink cost for every (tile width, partition count) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub widths_m: Vec<f64>,
    pub partitions: Vec<usize>,
    /// `mean_cost_s[w][p]`, averaged over slots and seeds.
    pub mean_cost_s: Vec<Vec<f64>>,
}

impl SweepGrid {
    /// CSV with one row per width and one column per partition count.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["tile_width_km".to_string()];
        header.extend(self.partitions.iter().map(|p| format!("partitions_{p}")));
        w.write_record(&header)?;
        for (width, row) in self.widths_m.iter().zip(&self.mean_cost_s) {
            let mut rec = vec![(width / 1e3).to_string()];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// One full SkyLink run per cell on identical seeds.
pub fn sweep_tiles(cfg: &SimConfig, widths_m: &[f64], partitions: &[usize]) -> Result<SweepGrid> {
    if widths_m.is_empty() || partitions.is_empty() {
        return Err(Error::invalid("sweep needs at least one width and one partition count"));
    }
    let mut setups = Vec::with_capacity(widths_m.len() * partitions.len());
    for &w in widths_m {
        for &p in partitions {
            let mut skylink = cfg.router.skylink.clone();
            skylink.tiles = TileCodingConfig { tile_width_m: w, num_partitions: p, ..skylink.tiles };
            skylink.validate()?;
            setups.push(RouterSetup {
                label: format!("skylink-w{}km-g{p}", w / 1e3),
                kind: RouterKind::SkyLink,
                k: cfg.router.k,
                skylink,
            });
        }
    }
    let scenario = Scenario::new(cfg.clone())?;
    let runs = run_seeds(&scenario, &setups)?;
    let n_seeds = runs.len() as f64;
    let all = 0..cfg.slots;
    let mean_cost_s = (0..widths_m.len())
        .map(|wi| {
            (0..partitions.len())
                .map(|pi| {
                    let idx = wi * partitions.len() + pi;
                    runs.iter().map(|r| r[idx].mean_over(all.clone(), |x| x.cost_s)).sum::<f64>() / n_seeds
                })
                .collect()
        })
        .collect();
    Ok(SweepGrid { widths_m: widths_m.to_vec(), partitions: partitions.to_vec(), mean_cost_s })
}
