//! Contextual bandit routing. Each satellite keeps, per neighbour, running
//! mean costs indexed by tile-coded link distance, and ranks its links by a
//! lower confidence bound on cost.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::routers::{LocalObservation, PreferenceList, Router, RouterKind};
use crate::topology::{link_tiebreak, EdgeId, NodeId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TileCodingConfig {
    pub tile_width_m: f64,
    pub num_partitions: usize,
    pub max_distance_m: f64,
}

impl Default for TileCodingConfig {
    fn default() -> Self {
        Self { tile_width_m: 500e3, num_partitions: 2, max_distance_m: 6_000e3 }
    }
}

impl TileCodingConfig {
    /// One partition with a single tile spanning every distance.
    pub fn single_tile() -> Self {
        Self { tile_width_m: f64::INFINITY, num_partitions: 1, max_distance_m: 6_000e3 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tile_width_m > 0.0) {
            return Err(Error::invalid("tile width must be positive"));
        }
        if self.num_partitions == 0 {
            return Err(Error::invalid("at least one tile partition is required"));
        }
        if !(self.max_distance_m > 0.0) {
            return Err(Error::invalid("max tile distance must be positive"));
        }
        Ok(())
    }
}

/// Tile index of `d_m` in every partition; partition `g` is shifted by
/// `g * width / |G|`.
pub fn tile_indices(d_m: f64, cfg: &TileCodingConfig) -> Vec<u64> {
    let d = d_m.max(0.0).min(cfg.max_distance_m);
    let parts = cfg.num_partitions;
    (0..parts)
        .map(|g| {
            let offset = if g == 0 { 0.0 } else { g as f64 * cfg.tile_width_m / parts as f64 };
            ((d + offset) / cfg.tile_width_m).floor() as u64
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SkyLinkParams {
    pub tiles: TileCodingConfig,
    /// Seconds per cost unit inside the confidence bound; 1.0 scores costs in
    /// seconds, 1e-3 in milliseconds.
    pub cost_unit_s: f64,
    /// Update every link that carried traffic instead of only the top one.
    pub update_all_used: bool,
}

impl Default for SkyLinkParams {
    fn default() -> Self {
        Self { tiles: TileCodingConfig::default(), cost_unit_s: 1e-3, update_all_used: false }
    }
}

impl SkyLinkParams {
    pub fn validate(&self) -> Result<()> {
        self.tiles.validate()?;
        if !(self.cost_unit_s > 0.0) || !self.cost_unit_s.is_finite() {
            return Err(Error::invalid("cost unit must be positive and finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TileStat {
    pub mean_s: f64,
    pub count: u64,
}

/// Learned statistics of one satellite.
///
/// JSON layout: `{"t": .., "arms": {"<neighbour>": [ {"<tile>": {"mean_s": .., "count": ..}}, .. ]}}`
/// with one array entry per partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditState {
    /// Decisions taken so far.
    pub t: u64,
    pub arms: BTreeMap<NodeId, Vec<BTreeMap<u64, TileStat>>>,
}

impl BanditState {
    pub fn new() -> Self {
        Self { t: 0, arms: BTreeMap::new() }
    }

    pub fn stat(&self, neighbor: NodeId, partition: usize, tile: u64) -> Option<TileStat> {
        self.arms.get(&neighbor)?.get(partition)?.get(&tile).copied()
    }

    /// Lower-is-better score: mean cost minus the exploration bonus, averaged
    /// over partitions. Any unvisited tile makes the score `-inf`.
    pub fn ucb_score(&self, neighbor: NodeId, d_m: f64, t: u64, params: &SkyLinkParams) -> f64 {
        let tiles = tile_indices(d_m, &params.tiles);
        let ln_t = (t.max(1) as f64).ln();
        let mut total = 0.0;
        for (g, tile) in tiles.iter().enumerate() {
            match self.stat(neighbor, g, *tile) {
                Some(s) if s.count > 0 => {
                    total += s.mean_s / params.cost_unit_s - (2.0 * ln_t / s.count as f64).sqrt();
                }
                _ => return f64::NEG_INFINITY,
            }
        }
        total / tiles.len() as f64
    }

    /// Running-mean update of the tiles active at `d_m` for `neighbor`.
    pub fn update(&mut self, neighbor: NodeId, cost_s: f64, d_m: f64, params: &SkyLinkParams, t_max_s: f64) -> Result<()> {
        if !(0.0..=t_max_s).contains(&cost_s) {
            return Err(Error::CostOutOfRange { cost: cost_s, t_max: t_max_s });
        }
        let tiles = tile_indices(d_m, &params.tiles);
        let parts = self.arms.entry(neighbor).or_default();
        if parts.len() < tiles.len() {
            parts.resize_with(tiles.len(), BTreeMap::new);
        }
        for (g, tile) in tiles.into_iter().enumerate() {
            let s = parts[g].entry(tile).or_insert(TileStat { mean_s: 0.0, count: 0 });
            // Rounding can push the mean a hair past its inputs.
            s.mean_s = ((s.count as f64 * s.mean_s + cost_s) / (s.count + 1) as f64).clamp(0.0, t_max_s);
            s.count += 1;
        }
        Ok(())
    }

    /// Total count over one partition's tiles for `neighbor`.
    pub fn visits(&self, neighbor: NodeId, partition: usize) -> u64 {
        self.arms
            .get(&neighbor)
            .and_then(|p| p.get(partition))
            .map(|tiles| tiles.values().map(|s| s.count).sum())
            .unwrap_or(0)
    }
}

impl Default for BanditState {
    fn default() -> Self {
        Self::new()
    }
}

/// Outgoing links sorted by ascending score at step `t`; ties go GSL first,
/// then lowest neighbour id.
pub fn rank_links(state: &BanditState, obs: &LocalObservation, t: u64, params: &SkyLinkParams) -> PreferenceList {
    let mut scored: Vec<(f64, &crate::routers::LinkView)> =
        obs.links.iter().map(|l| (state.ucb_score(l.neighbor, l.distance_m, t, params), l)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(link_tiebreak((a.1.kind, a.1.neighbor), (b.1.kind, b.1.neighbor))));
    scored.into_iter().map(|(_, l)| l.edge).collect()
}

/// One learner per satellite. Ground nodes forward along their fiber edge.
#[derive(Debug, Clone)]
pub struct SkyLinkRouter {
    params: SkyLinkParams,
    t_max_s: f64,
    contextual: bool,
    states: Vec<BanditState>,
}

impl SkyLinkRouter {
    pub fn new(num_satellites: usize, params: SkyLinkParams, t_max_s: f64) -> Self {
        Self { params, t_max_s, contextual: true, states: vec![BanditState::new(); num_satellites] }
    }

    /// The same learner without distance context: one partition, one tile.
    pub fn non_contextual(num_satellites: usize, mut params: SkyLinkParams, t_max_s: f64) -> Self {
        params.tiles = TileCodingConfig { max_distance_m: params.tiles.max_distance_m, ..TileCodingConfig::single_tile() };
        Self { params, t_max_s, contextual: false, states: vec![BanditState::new(); num_satellites] }
    }

    pub fn params(&self) -> &SkyLinkParams {
        &self.params
    }

    pub fn state(&self, sat: usize) -> &BanditState {
        &self.states[sat]
    }

    pub fn states(&self) -> &[BanditState] {
        &self.states
    }

    /// Replaces learned state, e.g. for a warm start.
    pub fn set_states(&mut self, states: Vec<BanditState>) -> Result<()> {
        if states.len() != self.states.len() {
            return Err(Error::LengthMismatch { expected: self.states.len(), found: states.len() });
        }
        self.states = states;
        Ok(())
    }
}

impl Router for SkyLinkRouter {
    fn kind(&self) -> RouterKind {
        if self.contextual {
            RouterKind::SkyLink
        } else {
            RouterKind::NcSkyLink
        }
    }

    fn decide(&mut self, obs: &LocalObservation, _rng: &mut SimRng) -> PreferenceList {
        let NodeId::Satellite(sat) = obs.node else {
            return obs.links.iter().map(|l| l.edge).collect();
        };
        let state = &mut self.states[sat];
        state.t += 1;
        rank_links(state, obs, state.t, &self.params)
    }

    fn feedback(&mut self, obs: &LocalObservation, chosen: &[EdgeId], used: &[EdgeId], cost_s: f64) -> Result<()> {
        let NodeId::Satellite(sat) = obs.node else { return Ok(()) };
        let targets: &[EdgeId] = if self.params.update_all_used && !used.is_empty() {
            used
        } else {
            match chosen.first() {
                Some(top) => std::slice::from_ref(top),
                None => return Ok(()),
            }
        };
        for edge in targets {
            let link = obs.link(*edge).ok_or_else(|| Error::invalid(format!("edge {edge} is not a link of {}", obs.node)))?;
            self.states[sat].update(link.neighbor, cost_s, link.distance_m, &self.params, self.t_max_s)?;
        }
        Ok(())
    }
}
