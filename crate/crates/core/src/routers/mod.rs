//! Per-node routing: every node ranks its outgoing links each slot and the
//! flow engine fills them in that order.

mod baselines;
mod shortest;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::topology::{EdgeId, EdgeKind, NodeId, TimeSlotGraph};

pub use baselines::{bent_pipe_decide, random_decide, BentPipeRouter, RandomRouter};
pub use shortest::{
    dijkstra_next_hop, first_hops, shortest_path_weights, yen_k_shortest, DijkstraRouter, KShortestRouter, Path,
};

/// Outgoing edges of one node, most preferred first.
pub type PreferenceList = Vec<EdgeId>;

/// What a node knows about one of its outgoing links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkView {
    pub edge: EdgeId,
    pub neighbor: NodeId,
    pub kind: EdgeKind,
    pub distance_m: f64,
    pub capacity_bps: f64,
}

/// Locally available information at a node for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalObservation {
    pub node: NodeId,
    pub slot: usize,
    pub links: Vec<LinkView>,
    /// The node's own generated traffic, bit/s.
    pub incoming_rate_bps: f64,
}

impl LocalObservation {
    pub fn from_graph(graph: &TimeSlotGraph, node: NodeId, incoming_rate_bps: f64) -> Self {
        let links = graph
            .out_edges(node)
            .iter()
            .map(|&id| {
                let e = graph.edge(id);
                LinkView { edge: id, neighbor: e.dst, kind: e.kind, distance_m: e.distance_m, capacity_bps: e.capacity_bps }
            })
            .collect();
        Self { node, slot: graph.slot, links, incoming_rate_bps }
    }

    pub fn link(&self, edge: EdgeId) -> Option<&LinkView> {
        self.links.iter().find(|l| l.edge == edge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RouterKind {
    SkyLink,
    NcSkyLink,
    Dijkstra,
    KShortest,
    BentPipe,
    Random,
}

impl RouterKind {
    pub const ALL: [RouterKind; 6] = [
        RouterKind::SkyLink,
        RouterKind::NcSkyLink,
        RouterKind::Dijkstra,
        RouterKind::KShortest,
        RouterKind::BentPipe,
        RouterKind::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RouterKind::SkyLink => "skylink",
            RouterKind::NcSkyLink => "nc-skylink",
            RouterKind::Dijkstra => "dijkstra",
            RouterKind::KShortest => "ksp",
            RouterKind::BentPipe => "bentpipe",
            RouterKind::Random => "random",
        }
    }
}

impl fmt::Display for RouterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RouterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RouterKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| Error::invalid(format!("unknown router {s:?}")))
    }
}

impl Serialize for RouterKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for RouterKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A network-wide routing scheme. Decisions are per node; shortest-path
/// schemes do their global work in `begin_slot`.
pub trait Router: Send {
    fn kind(&self) -> RouterKind;

    /// Called once per slot before any `decide`. `weights` are per-edge
    /// shortest-path weights in seconds.
    fn begin_slot(&mut self, _graph: &TimeSlotGraph, _weights: &[f64]) {}

    fn decide(&mut self, obs: &LocalObservation, rng: &mut SimRng) -> PreferenceList;

    /// Cost observed for the node's own traffic in the slot it decided on.
    /// `used` lists the preferred links that ended up carrying traffic.
    fn feedback(&mut self, _obs: &LocalObservation, _chosen: &[EdgeId], _used: &[EdgeId], _cost_s: f64) -> Result<()> {
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests_support {
    use crate::topology::{Edge, EdgeKind, NodeId, TimeSlotGraph};
    use rand::{Rng, SeedableRng};

    use NodeId::{Ground as G, Internet as I, Satellite as S};

    pub(crate) fn edge(src: NodeId, dst: NodeId, delay: f64) -> Edge {
        let kind = match (src, dst) {
            (_, I) => EdgeKind::Fiber,
            (_, G(_)) => EdgeKind::Gsl,
            _ => EdgeKind::Isl,
        };
        Edge { src, dst, kind, capacity_bps: 1e9, prop_delay_s: delay, distance_m: delay * 3e8 }
    }

    /// Random graph: `sats` satellites with random ISLs, `gs` stations each
    /// with a fiber edge, random GSLs. Weights are continuous, so ties have
    /// probability zero.
    pub(crate) fn random_graph(seed: u64, max_nodes: usize) -> TimeSlotGraph {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let total = rng.random_range(3..=max_nodes);
        let gs = rng.random_range(1..=(total - 2).min(3));
        let sats = total - 1 - gs;
        let mut edges = Vec::new();
        for a in 0..sats {
            for b in 0..sats {
                if a != b && rng.random_bool(0.4) {
                    edges.push(edge(S(a), S(b), rng.random_range(1e-3..10e-3)));
                }
            }
            for m in 0..gs {
                if rng.random_bool(0.35) {
                    edges.push(edge(S(a), G(m), rng.random_range(1e-3..10e-3)));
                }
            }
        }
        for m in 0..gs {
            edges.push(edge(G(m), I, rng.random_range(1e-3..5e-3)));
        }
        TimeSlotGraph::from_edges(0, sats, gs, edges)
    }

}
