//! Slant-range shortest path benchmark: full Dijkstra tables recomputed at
//! every topology refresh with global knowledge of the constellation.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::geometry::SatelliteId;
use crate::sim::{RouteDecision, Router, WorldView};
use crate::topology::NetworkGraph;

/// Distances from `source` to every node over a weighted undirected
/// adjacency list.
pub fn shortest_dist(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    dist[source] = 0.0;
    // (cost, node); BinaryHeap is a max-heap, so wrap in Reverse.
    let mut heap: BinaryHeap<Reverse<(OrdF64, usize)>> = BinaryHeap::new();
    heap.push(Reverse((OrdF64(0.0), source)));
    while let Some(Reverse((OrdF64(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((OrdF64(nd), v)));
            }
        }
    }
    dist
}

#[derive(PartialEq)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Next hop of `u` on a minimum-cost path toward the source of `dist`;
/// equal costs go to the smallest neighbor index.
pub fn next_hop_towards(adj: &[Vec<(usize, f64)>], dist: &[f64], u: usize) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for &(v, w) in &adj[u] {
        if !dist[v].is_finite() {
            continue;
        }
        let cost = w + dist[v];
        let better = match best {
            None => true,
            Some((bc, bv)) => cost < bc || (cost == bc && v < bv),
        };
        if better {
            best = Some((cost, v));
        }
    }
    best.map(|(_, v)| v)
}

/// Per (destination gateway, satellite) next-hop port table for one
/// topology snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingTable {
    pub snapshot_time: f64,
    /// `next_port[gateway][sat]`: outgoing ISL antenna, `None` when the
    /// destination is unreachable from that satellite.
    pub next_port: Vec<Vec<Option<usize>>>,
}

fn sat_adjacency(graph: &NetworkGraph) -> Vec<Vec<(usize, f64)>> {
    let shell = &graph.shell;
    graph
        .isl
        .iter()
        .map(|links| {
            links
                .iter()
                .flatten()
                .map(|l| (shell.sat_index(l.neighbor), l.distance_km))
                .collect()
        })
        .collect()
}

/// Build next-hop tables by slant range for every destination gateway;
/// ties go to the smallest (plane, slot) neighbor.
pub fn dijkstra_tables(graph: &NetworkGraph) -> RoutingTable {
    let shell = &graph.shell;
    let n = shell.num_satellites();
    let adj = sat_adjacency(graph);
    let mut next_port = Vec::with_capacity(graph.gsl.len());
    for gsl in &graph.gsl {
        let serving = shell.sat_index(gsl.sat);
        let dist = shortest_dist(&adj, serving);
        let mut ports = vec![None; n];
        for (u, slot) in ports.iter_mut().enumerate() {
            if u == serving {
                continue; // delivery is the automatic GSL hop
            }
            if let Some(v) = next_hop_towards(&adj, &dist, u) {
                *slot = graph.isl[u]
                    .iter()
                    .position(|l| l.map(|l| shell.sat_index(l.neighbor)) == Some(v));
            }
        }
        next_port.push(ports);
    }
    RoutingTable {
        snapshot_time: graph.snapshot_time,
        next_port,
    }
}

/// Router backed by per-snapshot Dijkstra tables.
pub struct DijkstraRouter {
    table: Option<RoutingTable>,
}

impl DijkstraRouter {
    pub fn new() -> Self {
        Self { table: None }
    }
}

impl Default for DijkstraRouter {
    fn default() -> Self {
        Self::new()
    }
}

impl Router for DijkstraRouter {
    fn on_topology(&mut self, graph: &NetworkGraph) {
        self.table = Some(dijkstra_tables(graph));
    }

    fn decide(
        &mut self,
        _packet_id: u64,
        _hop_index: usize,
        sat: SatelliteId,
        dst_gateway: usize,
        view: &WorldView,
    ) -> RouteDecision {
        let table = self.table.as_ref().expect("topology seen before packets");
        let idx = view.graph.shell.sat_index(sat);
        match table.next_port[dst_gateway][idx] {
            Some(port) => RouteDecision::Forward(port),
            None => RouteDecision::Drop,
        }
    }
}
