//! Scenario orchestration: configuration, seeded runs, router comparisons,
//! tile sweeps and report files.

mod compare;
mod config;
mod report;
mod sim;

pub use compare::{
    compare_kinds, compare_routers, sweep_tiles, Comparison, ComparisonReport, PairwiseRatio, RouterAggregate, SweepGrid,
};
pub use config::{desk, paper_shape, FailureSchedule, PopulationSource, Preset, RouterConfig, SimConfig};
pub use report::{heatmap_svg, line_chart_svg, metrics_csv_path, write_comparison, write_runs, write_sweep, Series};
pub use sim::{apply_failures, run_lockstep, run_seeds, run_simulation, RouterSetup, RunAudit, RunResult, Scenario};
