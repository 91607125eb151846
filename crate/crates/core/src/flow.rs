//! Steady-stream propagation of one slot: water-filling allocation along
//! preference lists, buffer-induced queuing delay and drop accounting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{EdgeId, NodeId, TimeSlotGraph};
use crate::traffic::BufferSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TtlConfig {
    pub t_max_s: f64,
    pub hop_cap: usize,
}

impl Default for TtlConfig {
    fn default() -> Self {
        Self { t_max_s: 0.2, hop_cap: 32 }
    }
}

impl TtlConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_max_s > 0.0) || self.hop_cap == 0 {
            return Err(Error::invalid("ttl and hop cap must be positive"));
        }
        Ok(())
    }
}

/// Rates assigned to links in preference order, plus what did not fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub x_bps: Vec<f64>,
    pub overflow_bps: f64,
}

impl Allocation {
    pub fn total(&self) -> f64 {
        self.x_bps.iter().sum()
    }
}

/// Fills links in order, each up to `sigma * cap`, until `r_in` is placed.
pub fn water_fill(r_in_bps: f64, caps_bps: &[f64], sigma: f64) -> Allocation {
    let mut left = r_in_bps.max(0.0);
    let x_bps = caps_bps
        .iter()
        .map(|c| {
            let x = left.min((sigma * c).max(0.0));
            left -= x;
            x
        })
        .collect();
    Allocation { x_bps, overflow_bps: left }
}

/// FIFO delay of a node whose buffer is full: `q_max / outflow` when inflow
/// exceeds outflow, zero otherwise, `t_max` when nothing leaves.
pub fn queuing_delay(q_max_bits: f64, outgoing_bps: f64, incoming_bps: f64, t_max_s: f64) -> f64 {
    if incoming_bps - outgoing_bps <= 0.0 {
        0.0
    } else if outgoing_bps <= 0.0 {
        t_max_s
    } else {
        q_max_bits / outgoing_bps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Capacity,
    Loop,
    DeadEnd,
    Ttl,
    HopCap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delivered {
    pub origin: usize,
    pub rate_bps: f64,
    pub delay_s: f64,
    /// Links traversed, the fiber edge included.
    pub hops: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dropped {
    pub origin: usize,
    pub rate_bps: f64,
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotOutcome {
    pub t_max_s: f64,
    pub delivered: Vec<Delivered>,
    pub dropped: Vec<Dropped>,
    /// Generated rate per satellite.
    pub generated_bps: Vec<f64>,
    /// Total rate placed on each edge over all waves.
    pub edge_load_bps: Vec<f64>,
}

impl SlotOutcome {
    pub fn delivered_bps(&self, origin: usize) -> f64 {
        self.delivered.iter().filter(|d| d.origin == origin).map(|d| d.rate_bps).sum()
    }

    pub fn dropped_bps(&self, origin: usize) -> f64 {
        self.dropped.iter().filter(|d| d.origin == origin).map(|d| d.rate_bps).sum()
    }

    pub fn total_generated(&self) -> f64 {
        self.generated_bps.iter().sum()
    }

    pub fn total_delivered(&self) -> f64 {
        self.delivered.iter().map(|d| d.rate_bps).sum()
    }

    pub fn total_dropped(&self) -> f64 {
        self.dropped.iter().map(|d| d.rate_bps).sum()
    }

    pub fn dropped_by(&self, reason: DropReason) -> f64 {
        self.dropped.iter().filter(|d| d.reason == reason).map(|d| d.rate_bps).sum()
    }

    /// Rate-weighted delay numerator per satellite, drops charged `t_max`.
    fn weighted_delays(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.generated_bps.len()];
        for d in &self.delivered {
            acc[d.origin] += d.rate_bps * d.delay_s;
        }
        for d in &self.dropped {
            acc[d.origin] += d.rate_bps * self.t_max_s;
        }
        acc
    }

    /// Cost of every satellite's own traffic; zero where nothing was generated.
    pub fn per_sat_costs(&self) -> Vec<f64> {
        self.weighted_delays()
            .into_iter()
            .zip(&self.generated_bps)
            .map(|(w, &g)| if g > 0.0 { (w / g).min(self.t_max_s) } else { 0.0 })
            .collect()
    }
}

/// Rate-weighted delay of `v`'s own traffic, dropped shares counted at `t_max`.
pub fn per_sat_cost(outcome: &SlotOutcome, v: usize) -> f64 {
    let g = outcome.generated_bps[v];
    if g <= 0.0 {
        return 0.0;
    }
    let w: f64 = outcome.delivered.iter().filter(|d| d.origin == v).map(|d| d.rate_bps * d.delay_s).sum::<f64>()
        + outcome.dropped_bps(v) * outcome.t_max_s;
    (w / g).min(outcome.t_max_s)
}

/// Generation-weighted mean of per-satellite costs; zero without traffic.
pub fn network_cost(outcome: &SlotOutcome) -> f64 {
    let total = outcome.total_generated();
    if total <= 0.0 {
        return 0.0;
    }
    let costs = outcome.per_sat_costs();
    let weighted: f64 = costs.iter().zip(&outcome.generated_bps).map(|(c, g)| c * g).sum();
    (weighted / total).min(outcome.t_max_s)
}

#[derive(Debug, Clone)]
struct Bundle {
    origin: usize,
    path: Vec<usize>,
    delay_s: f64,
    rate_bps: f64,
}

/// Propagates every satellite's generated traffic through the slot graph.
///
/// `decisions[i]` is the preference list of satellite `i`; ground stations
/// always use their fiber edge. Propagation proceeds in synchronous waves:
/// all bundles sitting at a node are pooled, water-filled against what is left
/// of each link's `sigma * capacity`, and split pro rata. Overflow is dropped
/// as the same fraction of every bundle.
pub fn propagate_slot(
    graph: &TimeSlotGraph,
    decisions: &[Vec<EdgeId>],
    generated_bps: &[f64],
    ttl: &TtlConfig,
    buffers: &BufferSpec,
    sigma: f64,
) -> SlotOutcome {
    let n_sats = graph.num_satellites();
    assert_eq!(generated_bps.len(), n_sats, "one generated rate per satellite");
    let internet = graph.index_of(NodeId::Internet);
    let mut residual: Vec<f64> = graph.edges().iter().map(|e| sigma * e.capacity_bps).collect();
    let mut load = vec![0.0; graph.edges().len()];
    let mut out = SlotOutcome {
        t_max_s: ttl.t_max_s,
        delivered: Vec::new(),
        dropped: Vec::new(),
        generated_bps: generated_bps.to_vec(),
        edge_load_bps: Vec::new(),
    };

    let mut wave: Vec<Bundle> = generated_bps
        .iter()
        .enumerate()
        .filter(|(_, r)| **r > 0.0)
        .map(|(v, &r)| Bundle { origin: v, path: vec![v], delay_s: 0.0, rate_bps: r })
        .collect();

    while !wave.is_empty() {
        wave.sort_by_key(|b| *b.path.last().expect("paths are never empty"));
        let mut next = Vec::new();
        let mut start = 0;
        while start < wave.len() {
            let node = *wave[start].path.last().unwrap();
            let end = start + wave[start..].iter().take_while(|b| *b.path.last().unwrap() == node).count();
            let group = &wave[start..end];
            start = end;

            let node_id = graph.node_at(node);
            let prefs: &[EdgeId] = match node_id {
                NodeId::Satellite(i) => decisions.get(i).map(Vec::as_slice).unwrap_or(&[]),
                _ => graph.out_edges(node_id),
            };
            if prefs.is_empty() {
                for b in group {
                    out.dropped.push(Dropped { origin: b.origin, rate_bps: b.rate_bps, reason: DropReason::DeadEnd });
                }
                continue;
            }
            let r_in: f64 = group.iter().map(|b| b.rate_bps).sum();
            let caps: Vec<f64> = prefs.iter().map(|&e| residual[e]).collect();
            let alloc = water_fill(r_in, &caps, 1.0);
            let q_max = if matches!(node_id, NodeId::Satellite(_)) {
                buffers.satellite_buffer_bits
            } else {
                buffers.ground_buffer_bits
            };
            let q_delay = queuing_delay(q_max, alloc.total(), r_in, ttl.t_max_s);
            for (&e, &x) in prefs.iter().zip(&alloc.x_bps) {
                residual[e] = (residual[e] - x).max(0.0);
                load[e] += x;
            }
            let overflow_share = alloc.overflow_bps / r_in;
            for b in group {
                if overflow_share > 0.0 {
                    out.dropped.push(Dropped {
                        origin: b.origin,
                        rate_bps: b.rate_bps * overflow_share,
                        reason: DropReason::Capacity,
                    });
                }
                for (&e, &x) in prefs.iter().zip(&alloc.x_bps) {
                    if x <= 0.0 {
                        continue;
                    }
                    let rate = b.rate_bps * x / r_in;
                    let edge = graph.edge(e);
                    let dst = graph.index_of(edge.dst);
                    let delay = b.delay_s + q_delay + edge.prop_delay_s;
                    let drop = |reason| Dropped { origin: b.origin, rate_bps: rate, reason };
                    if b.path.contains(&dst) {
                        out.dropped.push(drop(DropReason::Loop));
                    } else if delay >= ttl.t_max_s {
                        out.dropped.push(drop(DropReason::Ttl));
                    } else if dst == internet {
                        out.delivered.push(Delivered { origin: b.origin, rate_bps: rate, delay_s: delay, hops: b.path.len() });
                    } else if b.path.len() >= ttl.hop_cap {
                        out.dropped.push(drop(DropReason::HopCap));
                    } else {
                        let mut path = Vec::with_capacity(b.path.len() + 1);
                        path.extend_from_slice(&b.path);
                        path.push(dst);
                        next.push(Bundle { origin: b.origin, path, delay_s: delay, rate_bps: rate });
                    }
                }
            }
        }
        wave = next;
    }
    out.edge_load_bps = load;
    out
}
