//! Delay-shortest-path baselines: Dijkstra next hops and Yen's k shortest
//! loop-free paths. Both ignore capacity and queues.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::{LocalObservation, PreferenceList, Router, RouterKind};
use crate::rng::SimRng;
use crate::topology::{link_tiebreak, EdgeId, EdgeKind, NodeId, TimeSlotGraph};

/// Edge weights in seconds: propagation delay on ISL/GSL, the station's base
/// fiber delay on fiber edges.
pub fn shortest_path_weights(graph: &TimeSlotGraph, fiber_base_s: &[f64]) -> Vec<f64> {
    graph
        .edges()
        .iter()
        .map(|e| match (e.kind, e.src) {
            (EdgeKind::Fiber, NodeId::Ground(i)) => fiber_base_s.get(i).copied().unwrap_or(e.prop_delay_s),
            _ => e.prop_delay_s,
        })
        .collect()
}

#[derive(Copy, Clone, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Distance from every node to the internet node.
fn distances_to_internet(graph: &TimeSlotGraph, weights: &[f64]) -> Vec<f64> {
    let n = graph.num_nodes();
    let mut incoming: Vec<Vec<EdgeId>> = vec![Vec::new(); n];
    for (id, e) in graph.edges().iter().enumerate() {
        incoming[graph.index_of(e.dst)].push(id);
    }
    let mut dist = vec![f64::INFINITY; n];
    let target = graph.index_of(NodeId::Internet);
    dist[target] = 0.0;
    let mut heap = BinaryHeap::from([Reverse(HeapItem(0.0, target))]);
    while let Some(Reverse(HeapItem(d, v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &id in &incoming[v] {
            let u = graph.index_of(graph.edge(id).src);
            let cand = d + weights[id];
            if cand < dist[u] {
                dist[u] = cand;
                heap.push(Reverse(HeapItem(cand, u)));
            }
        }
    }
    dist
}

/// First edge of a minimum-delay path to the internet for every node, indexed
/// like `graph.nodes()`. Unreachable nodes (and the internet node) get `None`.
/// Equal-delay alternatives are resolved by the GSL-first, lowest-neighbour rule.
pub fn dijkstra_next_hop(graph: &TimeSlotGraph, weights: &[f64]) -> Vec<Option<EdgeId>> {
    let dist = distances_to_internet(graph, weights);
    graph
        .nodes()
        .map(|v| {
            if v == NodeId::Internet || dist[graph.index_of(v)].is_infinite() {
                return None;
            }
            graph
                .out_edges(v)
                .iter()
                .copied()
                .filter(|&id| dist[graph.index_of(graph.edge(id).dst)].is_finite())
                .min_by(|&a, &b| {
                    let (ea, eb) = (graph.edge(a), graph.edge(b));
                    let ca = weights[a] + dist[graph.index_of(ea.dst)];
                    let cb = weights[b] + dist[graph.index_of(eb.dst)];
                    ca.total_cmp(&cb).then(link_tiebreak((ea.kind, ea.dst), (eb.kind, eb.dst)))
                })
        })
        .collect()
}

/// A loop-free path as a sequence of edges, with its total weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub edges: Vec<EdgeId>,
    pub delay_s: f64,
}

impl Path {
    /// Visited node indices, source first.
    pub fn nodes(&self, graph: &TimeSlotGraph, src: NodeId) -> Vec<usize> {
        let mut out = vec![graph.index_of(src)];
        out.extend(self.edges.iter().map(|&e| graph.index_of(graph.edge(e).dst)));
        out
    }
}

/// Forward Dijkstra from `src` to the internet avoiding banned nodes and edges.
fn shortest_path(
    graph: &TimeSlotGraph,
    weights: &[f64],
    src: usize,
    banned_nodes: &[bool],
    banned_edges: &[bool],
) -> Option<Path> {
    let n = graph.num_nodes();
    let target = graph.index_of(NodeId::Internet);
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<EdgeId>> = vec![None; n];
    dist[src] = 0.0;
    let mut heap = BinaryHeap::from([Reverse(HeapItem(0.0, src))]);
    while let Some(Reverse(HeapItem(d, v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        if v == target {
            break;
        }
        for &id in graph.out_edges(graph.node_at(v)) {
            if banned_edges[id] {
                continue;
            }
            let w = graph.index_of(graph.edge(id).dst);
            if banned_nodes[w] {
                continue;
            }
            let cand = d + weights[id];
            if cand < dist[w] {
                dist[w] = cand;
                pred[w] = Some(id);
                heap.push(Reverse(HeapItem(cand, w)));
            }
        }
    }
    if dist[target].is_infinite() {
        return None;
    }
    let mut edges = Vec::new();
    let mut at = target;
    while at != src {
        let id = pred[at].expect("reached nodes have a predecessor");
        edges.push(id);
        at = graph.index_of(graph.edge(id).src);
    }
    edges.reverse();
    Some(Path { edges, delay_s: dist[target] })
}

/// Up to `k` loop-free minimum-delay paths from `src` to the internet, in
/// non-decreasing delay order (Yen's algorithm).
pub fn yen_k_shortest(graph: &TimeSlotGraph, src: NodeId, k: usize, weights: &[f64]) -> Vec<Path> {
    let n = graph.num_nodes();
    let src_idx = graph.index_of(src);
    let mut banned_nodes = vec![false; n];
    let mut banned_edges = vec![false; graph.edges().len()];
    let Some(first) = shortest_path(graph, weights, src_idx, &banned_nodes, &banned_edges) else {
        return Vec::new();
    };
    let mut accepted = vec![first];
    let mut candidates: Vec<Path> = Vec::new();
    while accepted.len() < k {
        let last = accepted.last().expect("non-empty").clone();
        let last_nodes = last.nodes(graph, src);
        for i in 0..last.edges.len() {
            let root = &last.edges[..i];
            let spur = last_nodes[i];
            for p in &accepted {
                if p.edges.len() > i && p.edges[..i] == *root {
                    banned_edges[p.edges[i]] = true;
                }
            }
            for &v in &last_nodes[..i] {
                banned_nodes[v] = true;
            }
            if let Some(tail) = shortest_path(graph, weights, spur, &banned_nodes, &banned_edges) {
                let mut edges = root.to_vec();
                edges.extend(tail.edges);
                let delay_s = edges.iter().map(|&e| weights[e]).sum();
                let path = Path { edges, delay_s };
                if !candidates.contains(&path) && !accepted.iter().any(|a| a.edges == path.edges) {
                    candidates.push(path);
                }
            }
            banned_nodes.iter_mut().for_each(|b| *b = false);
            banned_edges.iter_mut().for_each(|b| *b = false);
        }
        let Some(best) = candidates
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.delay_s.total_cmp(&b.1.delay_s).then(a.1.edges.cmp(&b.1.edges)))
            .map(|(i, _)| i)
        else {
            break;
        };
        accepted.push(candidates.swap_remove(best));
    }
    accepted
}

/// Distinct first hops of `paths`, in path order.
pub fn first_hops(paths: &[Path]) -> PreferenceList {
    let mut out = PreferenceList::new();
    for p in paths {
        if let Some(&e) = p.edges.first() {
            if !out.contains(&e) {
                out.push(e);
            }
        }
    }
    out
}

#[derive(Debug, Default, Clone)]
pub struct DijkstraRouter {
    next: Vec<Option<EdgeId>>,
    nodes: Vec<NodeId>,
}

impl Router for DijkstraRouter {
    fn kind(&self) -> RouterKind {
        RouterKind::Dijkstra
    }

    fn begin_slot(&mut self, graph: &TimeSlotGraph, weights: &[f64]) {
        self.next = dijkstra_next_hop(graph, weights);
        self.nodes = graph.nodes().collect();
    }

    fn decide(&mut self, obs: &LocalObservation, _rng: &mut SimRng) -> PreferenceList {
        self.nodes
            .iter()
            .position(|&n| n == obs.node)
            .and_then(|i| self.next[i])
            .into_iter()
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct KShortestRouter {
    k: usize,
    prefs: Vec<PreferenceList>,
    nodes: Vec<NodeId>,
}

impl KShortestRouter {
    pub fn new(k: usize) -> Self {
        Self { k: k.max(1), prefs: Vec::new(), nodes: Vec::new() }
    }
}

impl Router for KShortestRouter {
    fn kind(&self) -> RouterKind {
        RouterKind::KShortest
    }

    fn begin_slot(&mut self, graph: &TimeSlotGraph, weights: &[f64]) {
        self.nodes = graph.nodes().collect();
        self.prefs = self
            .nodes
            .iter()
            .map(|&v| match v {
                NodeId::Satellite(_) => first_hops(&yen_k_shortest(graph, v, self.k, weights)),
                _ => graph.out_edges(v).to_vec(),
            })
            .collect();
    }

    fn decide(&mut self, obs: &LocalObservation, _rng: &mut SimRng) -> PreferenceList {
        self.nodes.iter().position(|&n| n == obs.node).map(|i| self.prefs[i].clone()).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Edge;
    use proptest::prelude::*;

    fn edge(src: NodeId, dst: NodeId, delay: f64) -> Edge {
        let kind = match (src, dst) {
            (_, NodeId::Internet) => EdgeKind::Fiber,
            (_, NodeId::Ground(_)) => EdgeKind::Gsl,
            _ => EdgeKind::Isl,
        };
        Edge { src, dst, kind, capacity_bps: 1e9, prop_delay_s: delay, distance_m: delay * 3e8 }
    }

    fn weights(g: &TimeSlotGraph) -> Vec<f64> {
        g.edges().iter().map(|e| e.prop_delay_s).collect()
    }

    use NodeId::{Ground as G, Internet as I, Satellite as S};

    #[test]
    fn unit_chain_uses_the_gsl() {
        let g = TimeSlotGraph::from_edges(0, 1, 1, vec![edge(S(0), G(0), 4e-3), edge(G(0), I, 2e-3)]);
        let next = dijkstra_next_hop(&g, &weights(&g));
        assert_eq!(next[0], Some(0));
        assert_eq!(next[1], Some(1));
        assert_eq!(next[2], None);
    }

    #[test]
    fn two_hop_shortcut_beats_direct_gsl() {
        // S0 -> G0 costs 8 ms; S0 -> S1 -> G0 costs 3 + 4 ms.
        let g = TimeSlotGraph::from_edges(
            0,
            2,
            1,
            vec![edge(S(0), G(0), 8e-3), edge(S(0), S(1), 3e-3), edge(S(1), G(0), 4e-3), edge(G(0), I, 1e-3)],
        );
        let next = dijkstra_next_hop(&g, &weights(&g));
        assert_eq!(g.edge(next[0].unwrap()).dst, S(1));
    }

    #[test]
    fn unreachable_nodes_have_no_next_hop() {
        let g = TimeSlotGraph::from_edges(0, 2, 1, vec![edge(S(0), S(1), 1e-3), edge(S(1), S(0), 1e-3), edge(G(0), I, 1e-3)]);
        let next = dijkstra_next_hop(&g, &weights(&g));
        assert_eq!(next[0], None);
        assert_eq!(next[1], None);
        assert!(yen_k_shortest(&g, S(0), 4, &weights(&g)).is_empty());
    }

    #[test]
    fn single_path_graph_yields_one_path() {
        let g = TimeSlotGraph::from_edges(0, 2, 1, vec![edge(S(0), S(1), 1e-3), edge(S(1), G(0), 1e-3), edge(G(0), I, 1e-3)]);
        let paths = yen_k_shortest(&g, S(0), 4, &weights(&g));
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].edges.len(), 3);
    }

    #[test]
    fn fiber_weights_use_base_delay() {
        let g = TimeSlotGraph::from_edges(0, 1, 1, vec![edge(S(0), G(0), 4e-3), edge(G(0), I, 2.7e-3)]);
        assert_eq!(shortest_path_weights(&g, &[1.5e-3]), vec![4e-3, 1.5e-3]);
    }

    /// Exhaustive enumeration of loop-free paths to the internet.
    pub(crate) fn all_paths(g: &TimeSlotGraph, src: NodeId) -> Vec<(f64, Vec<EdgeId>)> {
        fn dfs(g: &TimeSlotGraph, at: NodeId, seen: &mut Vec<NodeId>, stack: &mut Vec<EdgeId>, out: &mut Vec<(f64, Vec<EdgeId>)>) {
            if at == NodeId::Internet {
                let d = stack.iter().map(|&e| g.edge(e).prop_delay_s).sum();
                out.push((d, stack.clone()));
                return;
            }
            for &e in g.out_edges(at) {
                let nxt = g.edge(e).dst;
                if seen.contains(&nxt) {
                    continue;
                }
                seen.push(nxt);
                stack.push(e);
                dfs(g, nxt, seen, stack, out);
                stack.pop();
                seen.pop();
            }
        }
        let mut out = Vec::new();
        dfs(g, src, &mut vec![src], &mut Vec::new(), &mut out);
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    #[test]
    fn dijkstra_and_yen_match_enumeration_on_random_graphs() {
        for seed in 0..200 {
            let g = crate::routers::tests_support::random_graph(seed, 8);
            let w = weights(&g);
            let next = dijkstra_next_hop(&g, &w);
            for s in 0..g.num_satellites() {
                let all = all_paths(&g, S(s));
                match all.first() {
                    None => assert_eq!(next[s], None),
                    Some((_, best)) => assert_eq!(next[s], Some(best[0]), "seed {seed} sat {s}"),
                }
                for k in 1..=4 {
                    let yen = yen_k_shortest(&g, S(s), k, &w);
                    let expected: Vec<&Vec<EdgeId>> = all.iter().take(k).map(|p| &p.1).collect();
                    let got: Vec<&Vec<EdgeId>> = yen.iter().map(|p| &p.edges).collect();
                    assert_eq!(got, expected, "seed {seed} sat {s} k {k}");
                }
                if let Some(p) = yen_k_shortest(&g, S(s), 1, &w).first() {
                    assert_eq!(Some(p.edges[0]), next[s]);
                }
            }
        }
    }

    #[test]
    fn first_hops_collapse_duplicates() {
        let paths = vec![
            Path { edges: vec![3, 5], delay_s: 1.0 },
            Path { edges: vec![3, 6], delay_s: 2.0 },
            Path { edges: vec![1, 5], delay_s: 3.0 },
        ];
        assert_eq!(first_hops(&paths), vec![3, 1]);
    }

    #[test]
    fn feedback_leaves_dijkstra_unchanged() {
        let g = crate::routers::tests_support::random_graph(5, 8);
        let w = weights(&g);
        let mut r = DijkstraRouter::default();
        r.begin_slot(&g, &w);
        let mut rng = crate::rng::substream(0, "x");
        let obs = LocalObservation::from_graph(&g, S(0), 1e6);
        let before = r.decide(&obs, &mut rng);
        r.feedback(&obs, &before, &before, 0.2).unwrap();
        assert_eq!(r.decide(&obs, &mut rng), before);
    }

    proptest! {
        #[test]
        fn yen_paths_are_sorted_and_loop_free(seed in 0u64..10_000) {
            let g = crate::routers::tests_support::random_graph(seed, 8);
            let w = weights(&g);
            for s in 0..g.num_satellites() {
                let paths = yen_k_shortest(&g, S(s), 4, &w);
                for pair in paths.windows(2) {
                    prop_assert!(pair[0].delay_s <= pair[1].delay_s);
                }
                for p in &paths {
                    let mut nodes = p.nodes(&g, S(s));
                    let len = nodes.len();
                    nodes.sort();
                    nodes.dedup();
                    prop_assert_eq!(nodes.len(), len);
                }
            }
        }

        #[test]
        fn rankings_are_scale_invariant(seed in 0u64..10_000, scale in 0.01f64..100.0) {
            let g = crate::routers::tests_support::random_graph(seed, 8);
            let w = weights(&g);
            let scaled: Vec<f64> = w.iter().map(|x| x * scale).collect();
            prop_assert_eq!(dijkstra_next_hop(&g, &w), dijkstra_next_hop(&g, &scaled));
            for s in 0..g.num_satellites() {
                prop_assert_eq!(
                    first_hops(&yen_k_shortest(&g, S(s), 4, &w)),
                    first_hops(&yen_k_shortest(&g, S(s), 4, &scaled))
                );
            }
        }
    }
}
