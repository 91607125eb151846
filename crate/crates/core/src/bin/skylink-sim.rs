use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use skylink::harness::{
    compare_kinds, run_seeds, sweep_tiles, write_comparison, write_runs, write_sweep, Preset, RouterSetup, RunResult,
    Scenario, SimConfig,
};
use skylink::routers::RouterKind;
use skylink::{Error, Result};

#[derive(Parser)]
#[command(name = "skylink-sim", version, about = "Time-slotted LEO network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one router over the configured seeds.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Run only this seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the configured router.
        #[arg(long)]
        router: Option<String>,
    },
    /// Run several routers on identical traffic and compare them.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "skylink,nc-skylink,dijkstra,ksp,bentpipe,random")]
        routers: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// First slot of the evaluation window (default: last quarter).
        #[arg(long)]
        eval_from: Option<usize>,
    },
    /// Mean SkyLink cost over a grid of tile widths and partition counts.
    SweepTiles {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "20,50,100,500,1000,2000")]
        widths_km: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
        partitions: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a bundled scenario as TOML.
    GenScenario {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        out: PathBuf,
    },
}

/// An unreadable config file counts as a config error.
fn load_config(path: &Path) -> Result<SimConfig> {
    SimConfig::load(path).map_err(|e| match e {
        Error::Io { path, source } => Error::InvalidConfig(format!("cannot read {}: {source}", path.display())),
        other => other,
    })
}

fn parse_kinds(names: &[String]) -> Result<Vec<RouterKind>> {
    names.iter().map(|n| n.parse()).collect()
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, out, seed, router } => {
            let mut cfg = load_config(&config)?;
            if let Some(seed) = seed {
                cfg.seeds = vec![seed];
            }
            if let Some(r) = router {
                cfg.router.kind = r.parse()?;
            }
            let scenario = Scenario::new(cfg.clone())?;
            let setup = RouterSetup::from_config(&cfg, cfg.router.kind);
            let runs = run_seeds(&scenario, &[setup])?;
            let flat: Vec<&RunResult> = runs.iter().flatten().collect();
            write_runs(&out, &flat, cfg.start_utc_s, cfg.slot_duration_s)?;
            for r in &flat {
                let s = r.summary(cfg.slot_duration_s);
                println!(
                    "{} seed {}: cost {:.2} ms, drop {:.4}, throughput {:.1} Mbit/s",
                    s.router,
                    s.seed,
                    s.mean_cost_s * 1e3,
                    s.mean_drop_rate,
                    s.mean_throughput_bps / 1e6
                );
            }
        }
        Command::Compare { config, routers, out, eval_from } => {
            let cfg = load_config(&config)?;
            let kinds = parse_kinds(&routers)?;
            let cmp = compare_kinds(&cfg, &kinds)?;
            let from = eval_from.unwrap_or(cfg.slots - cfg.slots / 4).min(cfg.slots - 1);
            let report = cmp.report(from..cfg.slots);
            write_comparison(&out, &cmp, &report, cfg.start_utc_s)?;
            println!("{:<12} {:>10} {:>10} {:>16} {:>8}", "router", "cost(ms)", "drop", "thrpt(Mbit/s)", "hops");
            for a in &report.routers {
                println!(
                    "{:<12} {:>10.3} {:>10.4} {:>16.2} {:>8.3}",
                    a.label,
                    a.mean_cost_s * 1e3,
                    a.mean_drop_rate,
                    a.mean_throughput_bps / 1e6,
                    a.mean_avg_hops
                );
            }
        }
        Command::SweepTiles { config, widths_km, partitions, out } => {
            let cfg = load_config(&config)?;
            let widths_m: Vec<f64> = widths_km.iter().map(|w| w * 1e3).collect();
            let grid = sweep_tiles(&cfg, &widths_m, &partitions)?;
            write_sweep(&out, &grid)?;
            print!("{}", grid.to_csv()?);
        }
        Command::GenScenario { preset, out } => {
            let preset: Preset = preset.parse()?;
            let text = preset.config().to_toml_string()?;
            std::fs::write(&out, text).map_err(|e| Error::Io { path: out.clone(), source: e })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
