use std::process::Command;

use approx::assert_relative_eq;
use skylink::channel::propagation_delay;
use skylink::ephemeris::{distance, geodetic_to_ecef, WalkerConfig};
use skylink::harness::{
    apply_failures, compare_routers, desk, paper_shape, run_lockstep, run_simulation, sweep_tiles, write_runs,
    FailureSchedule, RouterSetup, RunResult, Scenario, SimConfig,
};
use skylink::routers::RouterKind;
use skylink::topology::GroundStation;
use skylink::traffic::Hotspot;

fn short_desk(slots: usize) -> SimConfig {
    let mut cfg = desk();
    cfg.slots = slots;
    cfg.seeds = vec![1];
    cfg
}

/// One satellite, one station directly beneath it, a few users, no jitter.
fn lone_satellite() -> SimConfig {
    let mut cfg = desk();
    cfg.slots = 1;
    cfg.constellation = WalkerConfig::new(1, 1, 87.9, 1_200e3);
    let sat = Scenario::new(cfg.clone()).unwrap().positions(0)[0];
    let under = sat.to_geodetic(cfg.constellation.earth_radius_m);
    let mut location = under;
    location.altitude_m = 0.0;
    cfg.ground_stations =
        vec![GroundStation { name: "below".into(), location, num_antennas: 1, fiber_capacity_bps: 1e9 }];
    cfg.population.hotspots =
        vec![Hotspot { lat_deg: under.latitude_deg, lon_deg: under.longitude_deg, population: 1_000.0, spread_deg: 1.0 }];
    cfg.channel.fiber_delay_range_s = (3e-3, 3e-3);
    cfg.channel.fiber_delay_noise_std_s = 0.0;
    cfg
}

#[test]
fn lone_satellite_cost_is_gsl_plus_fiber_delay() {
    let cfg = lone_satellite();
    let scenario = Scenario::new(cfg.clone()).unwrap();
    let sat = scenario.positions(0)[0];
    let gs = geodetic_to_ecef(&cfg.ground_stations[0].location, cfg.constellation.earth_radius_m);
    let expected = propagation_delay(distance(&sat, &gs), &cfg.channel) + 3e-3;
    for kind in RouterKind::ALL {
        let mut c = cfg.clone();
        c.router.kind = kind;
        let rec = run_simulation(&c, 1).unwrap();
        assert_eq!(rec.len(), 1);
        assert!(rec[0].generated_bps > 0.0);
        assert_eq!(rec[0].drop_rate, 0.0, "{kind}");
        assert_relative_eq!(rec[0].cost_s, expected, max_relative = 1e-12);
        assert_eq!(rec[0].avg_hops, 1.0);
    }
    assert_relative_eq!(expected, 1_200e3 / 299_792_458.0 + 3e-3, max_relative = 1e-6);
}

fn csv_bytes(run: &RunResult, cfg: &SimConfig) -> Vec<u8> {
    let dir = tempfile::tempdir().unwrap();
    write_runs(dir.path(), &[run], cfg.start_utc_s, cfg.slot_duration_s).unwrap();
    std::fs::read(dir.path().join(format!("metrics_{}_seed{}.csv", run.label, run.seed))).unwrap()
}

#[test]
fn identical_seed_gives_identical_csv() {
    let cfg = short_desk(150);
    let scenario = Scenario::new(cfg.clone()).unwrap();
    let setups: Vec<RouterSetup> = [RouterKind::SkyLink, RouterKind::Random]
        .iter()
        .map(|&k| RouterSetup::from_config(&cfg, k))
        .collect();
    let a = run_lockstep(&scenario, 4, &setups).unwrap();
    let b = run_lockstep(&scenario, 4, &setups).unwrap();
    let c = run_lockstep(&scenario, 5, &setups).unwrap();
    for i in 0..setups.len() {
        assert_eq!(csv_bytes(&a[i], &cfg), csv_bytes(&b[i], &cfg));
        assert_ne!(csv_bytes(&a[i], &cfg), csv_bytes(&c[i], &cfg));
    }
}

#[test]
fn routers_in_lockstep_see_the_same_traffic() {
    let cfg = short_desk(200);
    let cmp = skylink::harness::compare_kinds(&cfg, &RouterKind::ALL).unwrap();
    let first = &cmp.runs[0][0].records;
    for run in &cmp.runs[0][1..] {
        for (a, b) in first.iter().zip(&run.records) {
            assert_eq!(a.generated_bps, b.generated_bps);
        }
    }
}

#[test]
fn failure_fraction_examples() {
    let sched = |fraction| FailureSchedule { fraction, start_slot: 10, end_slot: 20, selection_seed: 3 };
    assert!(apply_failures(64, &sched(0.0), 15).iter().all(|f| !f));
    assert!(apply_failures(64, &sched(1.0), 15).iter().all(|f| *f));

    let s = sched(0.03);
    let inside = apply_failures(636, &s, 10);
    assert_eq!(inside.iter().filter(|f| **f).count(), 20);
    for slot in 11..20 {
        assert_eq!(apply_failures(636, &s, slot), inside);
    }
    for slot in [0, 9, 20, 100] {
        assert!(apply_failures(636, &s, slot).iter().all(|f| !f));
    }
    let other = FailureSchedule { selection_seed: 4, ..s };
    assert_ne!(apply_failures(636, &other, 12), inside);
}

#[test]
fn failed_satellites_lose_gsl_traffic_only_in_window() {
    let mut cfg = lone_satellite();
    cfg.slots = 3;
    cfg.failure = Some(FailureSchedule { fraction: 1.0, start_slot: 1, end_slot: 2, selection_seed: 0 });
    cfg.router.kind = RouterKind::BentPipe;
    let rec = run_simulation(&cfg, 1).unwrap();
    assert_eq!(rec[0].drop_rate, 0.0);
    assert_eq!(rec[1].drop_rate, 1.0);
    assert_eq!(rec[1].cost_s, cfg.ttl.t_max_s);
}

#[test]
fn router_compared_with_itself_shows_no_difference() {
    let cfg = short_desk(120);
    let a = RouterSetup::from_config(&cfg, RouterKind::Dijkstra);
    let b = RouterSetup { label: "dijkstra-again".into(), ..a.clone() };
    let report = compare_routers(&cfg, &[a, b]).unwrap().report(60..120);
    assert_eq!(report.routers[0].mean_cost_s, report.routers[1].mean_cost_s);
    for r in &report.ratios {
        assert_eq!(r.cost_reduction_pct, Some(0.0));
        assert_eq!(r.drop_reduction_pct, Some(0.0));
        assert_eq!(r.throughput_gain_pct, Some(0.0));
    }
    assert!(compare_routers(&cfg, &[RouterSetup::from_config(&cfg, RouterKind::Dijkstra)]).is_err());
}

#[test]
fn uncongested_shortest_path_routers_deliver_everything() {
    let mut cfg = short_desk(200);
    for h in &mut cfg.population.hotspots {
        h.population = 1_000.0;
    }
    for g in &mut cfg.ground_stations {
        g.fiber_capacity_bps = 1e10;
    }
    let report = skylink::harness::compare_kinds(&cfg, &[RouterKind::Dijkstra, RouterKind::KShortest])
        .unwrap()
        .report(0..200);
    let (d, k) = (&report.routers[0], &report.routers[1]);
    assert_relative_eq!(d.mean_throughput_bps, k.mean_throughput_bps, max_relative = 1e-12);
    assert!(d.mean_drop_rate < 1e-12);
}

#[test]
fn single_cell_sweep_matches_a_plain_run() {
    let mut cfg = short_desk(150);
    cfg.router.skylink.tiles.tile_width_m = 300e3;
    cfg.router.skylink.tiles.num_partitions = 3;
    let grid = sweep_tiles(&cfg, &[300e3], &[3]).unwrap();
    let rec = run_simulation(&cfg, 1).unwrap();
    let mean = rec.iter().map(|r| r.cost_s).sum::<f64>() / rec.len() as f64;
    assert_relative_eq!(grid.mean_cost_s[0][0], mean, max_relative = 1e-12);
}

#[test]
fn permuting_widths_permutes_rows() {
    let cfg = short_desk(100);
    let a = sweep_tiles(&cfg, &[100e3, 1_000e3], &[1, 2]).unwrap();
    let b = sweep_tiles(&cfg, &[1_000e3, 100e3], &[1, 2]).unwrap();
    assert_eq!(a.mean_cost_s[0], b.mean_cost_s[1]);
    assert_eq!(a.mean_cost_s[1], b.mean_cost_s[0]);
    let csv = a.to_csv().unwrap();
    assert!(csv.starts_with("tile_width_km,partitions_1,partitions_2\n100,"));
    assert!(sweep_tiles(&cfg, &[], &[1]).is_err());
}

#[test]
fn presets_validate_and_round_trip() {
    for cfg in [desk(), paper_shape()] {
        let text = cfg.to_toml_string().unwrap();
        let back = SimConfig::from_toml_str(&text).unwrap();
        assert_eq!(back.to_toml_string().unwrap(), text);
        Scenario::new(back).unwrap();
    }
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skylink-sim"))
}

#[test]
fn cli_config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "slots = 0\nslot_duration_s = 15.0\nseeds = [1]\n").unwrap();
    let missing = dir.path().join("missing.toml");
    for cfg in [&bad, &missing] {
        let out = cli().args(["run", "--out"]).arg(dir.path().join("o")).arg("--config").arg(cfg).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let out = cli().args(["gen-scenario", "--preset", "nope", "--out"]).arg(dir.path().join("x.toml")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = cli().args(["run", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cli_generates_runs_and_compares() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("desk.toml");
    let out = cli().args(["gen-scenario", "--preset", "desk", "--out"]).arg(&cfg_path).output().unwrap();
    assert!(out.status.success());
    let mut cfg = SimConfig::load(&cfg_path).unwrap();
    assert_eq!(cfg.constellation.num_satellites(), 64);
    cfg.slots = 80;
    cfg.seeds = vec![1, 2];
    std::fs::write(&cfg_path, cfg.to_toml_string().unwrap()).unwrap();

    let run_dir = dir.path().join("run");
    let out = cli()
        .args(["run", "--router", "bentpipe", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&run_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["metrics_bentpipe_seed1.csv", "metrics_bentpipe_seed2.csv", "summary.json", "cost.svg"] {
        assert!(run_dir.join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(run_dir.join("metrics_bentpipe_seed1.csv")).unwrap();
    assert!(csv.starts_with("slot,utc_s,router,seed,cost_s,drop_rate,throughput_bps,generated_bps,avg_hops,avg_delay_s\n"));
    assert_eq!(csv.lines().count(), 81);

    let cmp_dir = dir.path().join("cmp");
    let out = cli()
        .args(["compare", "--routers", "skylink,dijkstra", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&cmp_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(cmp_dir.join("comparison.json")).unwrap()).unwrap();
    assert_eq!(report["routers"].as_array().unwrap().len(), 2);
    assert_eq!(report["eval_slots"]["start"], 60);

    let sweep_dir = dir.path().join("sweep");
    let out = cli()
        .args(["sweep-tiles", "--widths-km", "100,500", "--partitions", "1,2", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&sweep_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(sweep_dir.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}
