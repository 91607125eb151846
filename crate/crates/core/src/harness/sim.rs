//! Scenario assembly and the slot loop.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{FailureSchedule, SimConfig};
use crate::channel::FiberDelayModel;
use crate::ephemeris::{geodetic_to_ecef, local_solar_hour, load_ephemeris, EcefPosition, EphemerisTable, PlaneSlot, WalkerConstellation};
use crate::error::{Error, Result};
use crate::flow::{propagate_slot, SlotOutcome};
use crate::metrics::{slot_metrics, MetricsRecord, RunSummary};
use crate::rng::{substream, SimRng};
use crate::routers::{
    shortest_path_weights, BentPipeRouter, DijkstraRouter, KShortestRouter, LocalObservation, RandomRouter, Router,
    RouterKind,
};
use crate::skylink::{SkyLinkParams, SkyLinkRouter};
use crate::topology::{build_slot_graph, load_ground_catalog, GroundStation, NodeId, SlotInputs, TimeSlotGraph};
use crate::traffic::{assign_cells, generation_rate, PopulationGrid, SyntheticPopulation};

/// Satellites whose GSLs are out at `slot`. The subset has
/// `ceil(fraction * num_sats)` members and depends only on the selection seed.
pub fn apply_failures(num_sats: usize, schedule: &FailureSchedule, slot: usize) -> Vec<bool> {
    let mut mask = vec![false; num_sats];
    if slot < schedule.start_slot || slot >= schedule.end_slot {
        return mask;
    }
    for i in failed_set(num_sats, schedule) {
        mask[i] = true;
    }
    mask
}

fn failed_set(num_sats: usize, schedule: &FailureSchedule) -> Vec<usize> {
    let count = ((schedule.fraction * num_sats as f64).ceil() as usize).min(num_sats);
    let mut rng = substream(schedule.selection_seed, "failure");
    let mut picked = sample(&mut rng, num_sats, count).into_vec();
    picked.sort_unstable();
    picked
}

enum Positions {
    Walker(WalkerConstellation),
    Table(EphemerisTable),
}

/// Everything about a run that does not depend on the seed.
pub struct Scenario {
    cfg: SimConfig,
    positions: Positions,
    layout: Vec<PlaneSlot>,
    stations: Vec<GroundStation>,
    station_ecef: Vec<EcefPosition>,
    population: PopulationGrid,
    failed: Vec<usize>,
}

impl Scenario {
    /// Validates the configuration and loads every referenced file.
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let walker = WalkerConstellation::new(cfg.constellation.clone())?;
        let layout = cfg.constellation.layout();
        let positions = match &cfg.ephemeris {
            Some(path) => {
                let table = load_ephemeris(&cfg.resolve(path), cfg.slot_duration_s)?;
                if table.num_nodes() != layout.len() {
                    return Err(Error::invalid(format!(
                        "ephemeris has {} satellites but the plane layout has {}",
                        table.num_nodes(),
                        layout.len()
                    )));
                }
                if table.num_slots() < cfg.slots {
                    return Err(Error::invalid(format!(
                        "ephemeris covers {} slots, {} requested",
                        table.num_slots(),
                        cfg.slots
                    )));
                }
                Positions::Table(table)
            }
            None => Positions::Walker(walker),
        };
        let mut stations = cfg.ground_stations.clone();
        if let Some(path) = &cfg.ground_catalog {
            stations.extend(load_ground_catalog(&cfg.resolve(path))?);
        }
        if stations.is_empty() {
            return Err(Error::invalid("no ground stations configured"));
        }
        let radius = cfg.constellation.earth_radius_m;
        let station_ecef = stations.iter().map(|g| geodetic_to_ecef(&g.location, radius)).collect();
        let population = match &cfg.population.file {
            Some(path) => PopulationGrid::load(&cfg.resolve(path))?,
            None => PopulationGrid::synthetic(&SyntheticPopulation { hotspots: cfg.population.hotspots.clone() })?,
        };
        let failed = cfg.failure.as_ref().map(|f| failed_set(layout.len(), f)).unwrap_or_default();
        Ok(Self { cfg, positions, layout, stations, station_ecef, population, failed })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn num_satellites(&self) -> usize {
        self.layout.len()
    }

    pub fn stations(&self) -> &[GroundStation] {
        &self.stations
    }

    pub fn population(&self) -> &PopulationGrid {
        &self.population
    }

    /// Satellites selected by the failure schedule (empty without one).
    pub fn failed_satellites(&self) -> &[usize] {
        &self.failed
    }

    pub fn positions(&self, slot: usize) -> Vec<EcefPosition> {
        match &self.positions {
            Positions::Walker(w) => w.positions_at_slot(slot, self.cfg.slot_duration_s),
            Positions::Table(t) => t.slot(slot).to_vec(),
        }
    }

    pub fn utc_s(&self, slot: usize) -> f64 {
        self.cfg.start_utc_s + slot as f64 * self.cfg.slot_duration_s
    }

    /// Per-satellite generation rate, bit/s.
    pub fn generated_bps(&self, slot: usize, positions: &[EcefPosition]) -> Vec<f64> {
        let utc = self.utc_s(slot);
        assign_cells(positions, &self.population)
            .into_iter()
            .zip(positions)
            .map(|(pop, p)| generation_rate(pop, &self.cfg.traffic, local_solar_hour(p.longitude_deg(), utc)))
            .collect()
    }

    pub fn gsl_failures(&self, slot: usize) -> Vec<bool> {
        let mut mask = vec![false; self.num_satellites()];
        if let Some(f) = &self.cfg.failure {
            if slot >= f.start_slot && slot < f.end_slot {
                for &i in &self.failed {
                    mask[i] = true;
                }
            }
        }
        mask
    }

    fn graph(&self, slot: usize, positions: &[EcefPosition], fiber_delays_s: &[f64]) -> Result<TimeSlotGraph> {
        let active = vec![true; positions.len()];
        let failed = self.gsl_failures(slot);
        let inputs = SlotInputs {
            slot,
            positions,
            active: &active,
            layout: &self.layout,
            stations: &self.stations,
            station_ecef: &self.station_ecef,
            fiber_delays_s,
            gsl_failed: &failed,
        };
        build_slot_graph(&inputs, &self.cfg.topology, &self.cfg.channel)
    }
}

/// One router to run, with a label for reports and file names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouterSetup {
    pub label: String,
    pub kind: RouterKind,
    pub k: usize,
    pub skylink: SkyLinkParams,
}

impl RouterSetup {
    /// The configured parameters for `kind`, labelled by its name.
    pub fn from_config(cfg: &SimConfig, kind: RouterKind) -> Self {
        Self { label: kind.to_string(), kind, k: cfg.router.k, skylink: cfg.router.skylink.clone() }
    }

    pub fn build(&self, num_sats: usize, t_max_s: f64) -> Box<dyn Router> {
        match self.kind {
            RouterKind::SkyLink => Box::new(SkyLinkRouter::new(num_sats, self.skylink.clone(), t_max_s)),
            RouterKind::NcSkyLink => Box::new(SkyLinkRouter::non_contextual(num_sats, self.skylink.clone(), t_max_s)),
            RouterKind::Dijkstra => Box::new(DijkstraRouter::default()),
            RouterKind::KShortest => Box::new(KShortestRouter::new(self.k)),
            RouterKind::BentPipe => Box::new(BentPipeRouter),
            RouterKind::Random => Box::new(RandomRouter),
        }
    }
}

/// Invariant checks gathered while a run progresses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunAudit {
    /// Largest |delivered + dropped - generated| / generated over slots.
    pub max_conservation_error: f64,
    /// Largest edge load divided by σ·C.
    pub max_edge_utilisation: f64,
    pub min_cost_s: f64,
    pub max_cost_s: f64,
}

impl Default for RunAudit {
    fn default() -> Self {
        Self { max_conservation_error: 0.0, max_edge_utilisation: 0.0, min_cost_s: f64::INFINITY, max_cost_s: 0.0 }
    }
}

impl RunAudit {
    fn observe(&mut self, graph: &TimeSlotGraph, outcome: &SlotOutcome, sigma: f64, record: &MetricsRecord) {
        let generated = outcome.total_generated();
        if generated > 0.0 {
            let err = (outcome.total_delivered() + outcome.total_dropped() - generated).abs() / generated;
            self.max_conservation_error = self.max_conservation_error.max(err);
        }
        for (e, load) in graph.edges().iter().zip(&outcome.edge_load_bps) {
            let cap = sigma * e.capacity_bps;
            if cap.is_finite() && cap > 0.0 {
                self.max_edge_utilisation = self.max_edge_utilisation.max(load / cap);
            }
        }
        self.min_cost_s = self.min_cost_s.min(record.cost_s);
        self.max_cost_s = self.max_cost_s.max(record.cost_s);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub label: String,
    pub kind: RouterKind,
    pub seed: u64,
    pub records: Vec<MetricsRecord>,
    pub audit: RunAudit,
}

impl RunResult {
    pub fn summary(&self, slot_duration_s: f64) -> RunSummary {
        RunSummary::from_records(&self.label, self.seed, &self.records, slot_duration_s)
    }

    /// Mean of `f` over records with `range.start <= slot < range.end`.
    pub fn mean_over(&self, range: std::ops::Range<usize>, f: impl Fn(&MetricsRecord) -> f64) -> f64 {
        let (sum, n) = self
            .records
            .iter()
            .filter(|r| range.contains(&r.slot))
            .fold((0.0, 0usize), |(s, n), r| (s + f(r), n + 1));
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }
}

struct Lane {
    setup: RouterSetup,
    router: Box<dyn Router>,
    rng: SimRng,
    records: Vec<MetricsRecord>,
    audit: RunAudit,
}

/// Runs several routers side by side over one seed. Every router sees the
/// same graphs, fiber jitter and traffic; only its own decisions differ.
pub fn run_lockstep(scenario: &Scenario, seed: u64, setups: &[RouterSetup]) -> Result<Vec<RunResult>> {
    let cfg = &scenario.cfg;
    let n = scenario.num_satellites();
    let t_max = cfg.ttl.t_max_s;
    let sigma = cfg.router.sigma;
    let mut fiber_rng = substream(seed, "fiber");
    let fiber = FiberDelayModel::new(scenario.stations.len(), &cfg.channel, &mut fiber_rng);
    let mut lanes: Vec<Lane> = setups
        .iter()
        .map(|s| Lane {
            setup: s.clone(),
            router: s.build(n, t_max),
            rng: substream(seed, &format!("router/{}", s.label)),
            records: Vec::with_capacity(cfg.slots),
            audit: RunAudit::default(),
        })
        .collect();

    for slot in 0..cfg.slots {
        let positions = scenario.positions(slot);
        let delays = fiber.sample_slot(&mut fiber_rng);
        let graph = scenario.graph(slot, &positions, &delays)?;
        let weights = shortest_path_weights(&graph, fiber.base_delays());
        let generated = scenario.generated_bps(slot, &positions);
        let observations: Vec<LocalObservation> =
            (0..n).map(|v| LocalObservation::from_graph(&graph, NodeId::Satellite(v), generated[v])).collect();

        lanes.par_iter_mut().try_for_each(|lane| -> Result<()> {
            lane.router.begin_slot(&graph, &weights);
            let decisions: Vec<Vec<usize>> = observations.iter().map(|o| lane.router.decide(o, &mut lane.rng)).collect();
            let outcome = propagate_slot(&graph, &decisions, &generated, &cfg.ttl, &cfg.buffers, sigma);
            let costs = outcome.per_sat_costs();
            for v in 0..n {
                if generated[v] > 0.0 {
                    let used: Vec<usize> =
                        decisions[v].iter().copied().filter(|&e| outcome.edge_load_bps[e] > 0.0).collect();
                    lane.router.feedback(&observations[v], &decisions[v], &used, costs[v])?;
                }
            }
            let record = slot_metrics(slot, &outcome);
            lane.audit.observe(&graph, &outcome, sigma, &record);
            lane.records.push(record);
            Ok(())
        })?;
    }

    Ok(lanes
        .into_iter()
        .map(|l| RunResult { label: l.setup.label, kind: l.setup.kind, seed, records: l.records, audit: l.audit })
        .collect())
}

/// Runs `setups` for every configured seed, seeds in parallel.
/// Result is indexed `[seed][setup]`.
pub fn run_seeds(scenario: &Scenario, setups: &[RouterSetup]) -> Result<Vec<Vec<RunResult>>> {
    scenario.cfg.seeds.par_iter().map(|&seed| run_lockstep(scenario, seed, setups)).collect()
}

/// Per-slot metrics of the configured router for one seed.
pub fn run_simulation(cfg: &SimConfig, seed: u64) -> Result<Vec<MetricsRecord>> {
    let scenario = Scenario::new(cfg.clone())?;
    let setup = RouterSetup::from_config(cfg, cfg.router.kind);
    let mut runs = run_lockstep(&scenario, seed, &[setup])?;
    Ok(runs.remove(0).records)
}
