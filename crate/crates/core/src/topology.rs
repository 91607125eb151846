//! Per-slot directed network graph: +grid ISLs, GSLs from ground stations to
//! their closest visible satellites, and fiber links to the internet node.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{self, ChannelParams};
use crate::ephemeris::{distance, elevation_angle, EcefPosition, GeodeticCoord, PlaneSlot};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeId {
    Satellite(usize),
    Ground(usize),
    Internet,
}

impl NodeId {
    pub fn satellite(self) -> Option<usize> {
        match self {
            NodeId::Satellite(i) => Some(i),
            _ => None,
        }
    }

    pub fn ground(self) -> Option<usize> {
        match self {
            NodeId::Ground(i) => Some(i),
            _ => None,
        }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Satellite(i) => write!(f, "sat:{i}"),
            NodeId::Ground(i) => write!(f, "gs:{i}"),
            NodeId::Internet => f.write_str("internet"),
        }
    }
}

impl FromStr for NodeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "internet" {
            return Ok(NodeId::Internet);
        }
        let bad = || Error::invalid(format!("bad node id {s:?}"));
        let (kind, idx) = s.split_once(':').ok_or_else(bad)?;
        let idx: usize = idx.parse().map_err(|_| bad())?;
        match kind {
            "sat" => Ok(NodeId::Satellite(idx)),
            "gs" => Ok(NodeId::Ground(idx)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for NodeId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NodeId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Gsl,
    Isl,
    Fiber,
}

pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: EdgeKind,
    pub capacity_bps: f64,
    pub prop_delay_s: f64,
    /// Geometric link length; zero for fiber.
    pub distance_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStation {
    pub name: String,
    pub location: GeodeticCoord,
    pub num_antennas: usize,
    pub fiber_capacity_bps: f64,
}

impl GroundStation {
    pub fn validate(&self) -> Result<()> {
        if self.num_antennas == 0 {
            return Err(Error::invalid(format!("ground station {} needs at least one antenna", self.name)));
        }
        if !(self.fiber_capacity_bps > 0.0) || !self.fiber_capacity_bps.is_finite() {
            return Err(Error::invalid(format!("ground station {} needs positive fiber capacity", self.name)));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct CatalogRow {
    name: String,
    lat_deg: f64,
    lon_deg: f64,
    num_antennas: usize,
    fiber_capacity_bps: f64,
}

/// Parses a `name,lat_deg,lon_deg,num_antennas,fiber_capacity_bps` catalog.
pub fn parse_ground_catalog<R: std::io::Read>(reader: R) -> Result<Vec<GroundStation>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize::<CatalogRow>() {
        let row = row?;
        let gs = GroundStation {
            location: GeodeticCoord::new(row.lat_deg, row.lon_deg, 0.0)?,
            name: row.name,
            num_antennas: row.num_antennas,
            fiber_capacity_bps: row.fiber_capacity_bps,
        };
        gs.validate()?;
        out.push(gs);
    }
    Ok(out)
}

pub fn load_ground_catalog(path: &std::path::Path) -> Result<Vec<GroundStation>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_ground_catalog(file)
}

/// Grid-building knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyParams {
    pub min_elevation_deg: f64,
    /// Link the first and last orbital planes.
    pub cross_seam_links: bool,
}

impl Default for TopologyParams {
    fn default() -> Self {
        Self { min_elevation_deg: 25.0, cross_seam_links: false }
    }
}

/// Planes adjacent to `plane`, without duplicates.
fn adjacent_planes(plane: usize, num_planes: usize, cross_seam: bool) -> Vec<usize> {
    let mut out = Vec::with_capacity(2);
    if num_planes < 2 {
        return out;
    }
    if plane > 0 {
        out.push(plane - 1);
    } else if cross_seam {
        out.push(num_planes - 1);
    }
    if plane + 1 < num_planes {
        out.push(plane + 1);
    } else if cross_seam {
        out.push(0);
    }
    out.sort_unstable();
    out.dedup();
    out.retain(|&q| q != plane);
    out
}

/// +grid ISL neighbours for every satellite (at most four each).
///
/// In-plane neighbours come from the anomaly ordering within the plane;
/// cross-plane neighbours are mutual nearest satellites in the adjacent planes.
/// Pairing is computed over the whole constellation and links touching an
/// inactive satellite are then left out, so deactivating satellites only ever
/// removes links.
pub fn build_isl_neighbors(positions: &[EcefPosition], active: &[bool], layout: &[PlaneSlot], cross_seam: bool) -> Vec<Vec<usize>> {
    let n = positions.len();
    assert_eq!(layout.len(), n, "layout must cover every satellite");
    assert_eq!(active.len(), n, "active mask must cover every satellite");
    let num_planes = layout.iter().map(|s| s.plane + 1).max().unwrap_or(0);
    let mut members: Vec<Vec<Option<usize>>> = vec![Vec::new(); num_planes];
    for (sat, slot) in layout.iter().enumerate() {
        let plane = &mut members[slot.plane];
        if plane.len() <= slot.index {
            plane.resize(slot.index + 1, None);
        }
        plane[slot.index] = Some(sat);
    }

    let nearest_in = |sat: usize, plane: usize| -> Option<usize> {
        let here = positions[sat];
        members[plane]
            .iter()
            .flatten()
            .map(|&c| (distance(&here, &positions[c]), c))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, c)| c)
    };

    let mut out = vec![Vec::with_capacity(4); n];
    for sat in 0..n {
        if !active[sat] {
            continue;
        }
        let PlaneSlot { plane, index } = layout[sat];
        let ring = &members[plane];
        let size = ring.len();
        let nbrs = &mut out[sat];
        if size > 1 {
            for other in [(index + size - 1) % size, (index + 1) % size] {
                if let Some(o) = ring[other] {
                    if o != sat && active[o] && !nbrs.contains(&o) {
                        nbrs.push(o);
                    }
                }
            }
        }
        for q in adjacent_planes(plane, num_planes, cross_seam) {
            if let Some(b) = nearest_in(sat, q) {
                if active[b] && nearest_in(b, plane) == Some(sat) && !nbrs.contains(&b) {
                    nbrs.push(b);
                }
            }
        }
    }
    out
}

/// A ground-satellite link candidate chosen by a station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GslLink {
    pub sat: usize,
    pub station: usize,
    pub distance_m: f64,
    pub elevation_deg: f64,
}

/// Each station links to its `num_antennas` closest satellites that are above
/// `min_elevation_deg` and allowed to downlink (`gsl_failed[sat] == false`).
pub fn build_gsl_edges(
    stations: &[GroundStation],
    station_ecef: &[EcefPosition],
    positions: &[EcefPosition],
    active: &[bool],
    gsl_failed: &[bool],
    min_elevation_deg: f64,
) -> Vec<GslLink> {
    let mut out = Vec::new();
    for (idx, (gs, g_pos)) in stations.iter().zip(station_ecef).enumerate() {
        let mut visible: Vec<GslLink> = positions
            .iter()
            .enumerate()
            .filter(|(sat, _)| active[*sat] && !gsl_failed.get(*sat).copied().unwrap_or(false))
            .filter_map(|(sat, p)| {
                let elevation_deg = elevation_angle(g_pos, p);
                (elevation_deg >= min_elevation_deg).then(|| GslLink {
                    sat,
                    station: idx,
                    distance_m: distance(g_pos, p),
                    elevation_deg,
                })
            })
            .collect();
        visible.sort_by(|a, b| a.distance_m.total_cmp(&b.distance_m).then(a.sat.cmp(&b.sat)));
        visible.truncate(gs.num_antennas);
        out.extend(visible);
    }
    out
}

/// Directed graph of one time slot.
#[derive(Debug, Clone)]
pub struct TimeSlotGraph {
    pub slot: usize,
    num_sats: usize,
    num_ground: usize,
    edges: Vec<Edge>,
    out: Vec<Vec<EdgeId>>,
}

impl TimeSlotGraph {
    /// Builds a graph from explicit edges. Out-lists are ordered by
    /// destination, then kind.
    pub fn from_edges(slot: usize, num_sats: usize, num_ground: usize, edges: Vec<Edge>) -> Self {
        let mut g = Self { slot, num_sats, num_ground, edges, out: vec![Vec::new(); num_sats + num_ground + 1] };
        for (id, e) in g.edges.iter().enumerate() {
            let src = g.index_of(e.src);
            g.out[src].push(id);
        }
        let edges = &g.edges;
        for list in &mut g.out {
            list.sort_by(|&a, &b| edges[a].dst.cmp(&edges[b].dst).then(edges[a].kind.cmp(&edges[b].kind)));
        }
        g
    }

    pub fn num_satellites(&self) -> usize {
        self.num_sats
    }

    pub fn num_ground(&self) -> usize {
        self.num_ground
    }

    pub fn num_nodes(&self) -> usize {
        self.num_sats + self.num_ground + 1
    }

    pub fn index_of(&self, node: NodeId) -> usize {
        match node {
            NodeId::Satellite(i) => i,
            NodeId::Ground(i) => self.num_sats + i,
            NodeId::Internet => self.num_sats + self.num_ground,
        }
    }

    pub fn node_at(&self, idx: usize) -> NodeId {
        if idx < self.num_sats {
            NodeId::Satellite(idx)
        } else if idx < self.num_sats + self.num_ground {
            NodeId::Ground(idx - self.num_sats)
        } else {
            NodeId::Internet
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.num_nodes()).map(|i| self.node_at(i))
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn out_edges(&self, node: NodeId) -> &[EdgeId] {
        &self.out[self.index_of(node)]
    }

    pub fn count_kind(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }
}

/// Everything needed to assemble one slot's graph.
pub struct SlotInputs<'a> {
    pub slot: usize,
    pub positions: &'a [EcefPosition],
    /// Satellites present this slot.
    pub active: &'a [bool],
    pub layout: &'a [PlaneSlot],
    pub stations: &'a [GroundStation],
    pub station_ecef: &'a [EcefPosition],
    /// Per-station fiber delay for this slot.
    pub fiber_delays_s: &'a [f64],
    /// Satellites whose GSLs are out this slot.
    pub gsl_failed: &'a [bool],
}

pub fn build_slot_graph(inputs: &SlotInputs<'_>, topo: &TopologyParams, channel_params: &ChannelParams) -> Result<TimeSlotGraph> {
    let n = inputs.positions.len();
    let m = inputs.stations.len();
    if inputs.station_ecef.len() != m || inputs.fiber_delays_s.len() != m {
        return Err(Error::invalid("station inputs disagree in length"));
    }
    let mut edges = Vec::new();
    if inputs.active.len() != n || inputs.layout.len() != n {
        return Err(Error::invalid("satellite inputs disagree in length"));
    }
    let isl = build_isl_neighbors(inputs.positions, inputs.active, inputs.layout, topo.cross_seam_links);
    for (a, nbrs) in isl.iter().enumerate() {
        for &b in nbrs {
            let d = distance(&inputs.positions[a], &inputs.positions[b]);
            // Coincident satellites have no defined beam-spread budget.
            let Ok(cap) = channel::isl_capacity(d, channel_params) else { continue };
            edges.push(Edge {
                src: NodeId::Satellite(a),
                dst: NodeId::Satellite(b),
                kind: EdgeKind::Isl,
                capacity_bps: cap,
                prop_delay_s: channel::propagation_delay(d, channel_params),
                distance_m: d,
            });
        }
    }
    let gsls = build_gsl_edges(
        inputs.stations,
        inputs.station_ecef,
        inputs.positions,
        inputs.active,
        inputs.gsl_failed,
        topo.min_elevation_deg,
    );
    for link in gsls {
        let cap = channel::gsl_capacity(link.distance_m, link.elevation_deg, channel_params)?;
        edges.push(Edge {
            src: NodeId::Satellite(link.sat),
            dst: NodeId::Ground(link.station),
            kind: EdgeKind::Gsl,
            capacity_bps: cap,
            prop_delay_s: channel::propagation_delay(link.distance_m, channel_params),
            distance_m: link.distance_m,
        });
    }
    for (i, gs) in inputs.stations.iter().enumerate() {
        edges.push(Edge {
            src: NodeId::Ground(i),
            dst: NodeId::Internet,
            kind: EdgeKind::Fiber,
            capacity_bps: gs.fiber_capacity_bps,
            prop_delay_s: inputs.fiber_delays_s[i],
            distance_m: 0.0,
        });
    }
    Ok(TimeSlotGraph::from_edges(inputs.slot, n, m, edges))
}

/// Orders neighbour candidates for deterministic tie-breaking: GSL before ISL,
/// then by neighbour id.
pub fn link_tiebreak(a: (EdgeKind, NodeId), b: (EdgeKind, NodeId)) -> Ordering {
    a.0.cmp(&b.0).then(a.1.cmp(&b.1))
}
