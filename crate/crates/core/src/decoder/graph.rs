//! Weighted matching graph built from the graphlike parts of a DEM.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use super::dem::{xor_probability, DetectorErrorModel};

/// Scale applied to log-likelihood weights before rounding to integers.
pub const WEIGHT_SCALE: f64 = 1000.0;

pub const BOUNDARY: u32 = u32::MAX;

pub fn edge_weight(p: f64) -> i64 {
    let w = ((1.0 - p) / p).ln() * WEIGHT_SCALE;
    if w.is_finite() {
        w.round().max(0.0) as i64
    } else if w > 0.0 {
        i64::MAX / 4
    } else {
        0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub a: u32,
    /// Second endpoint, or [`BOUNDARY`].
    pub b: u32,
    pub probability: f64,
    pub weight: i64,
    pub observables: u64,
}

#[derive(Clone, Debug)]
pub struct MatchingGraph {
    pub num_detectors: usize,
    pub num_observables: usize,
    pub edges: Vec<Edge>,
    /// Per node (detectors, then the boundary): (neighbor, edge index), sorted.
    adjacency: Vec<Vec<(u32, usize)>>,
}

impl MatchingGraph {
    /// Parallel edges with the same observable label merge by XOR probability;
    /// when labels disagree the likelier edge is kept.
    pub fn from_dem(dem: &DetectorErrorModel) -> Self {
        let mut merged: BTreeMap<(u32, u32), (f64, u64)> = BTreeMap::new();
        for m in &dem.mechanisms {
            for part in &m.parts {
                let key = match part.detectors.as_slice() {
                    [a] => (*a, BOUNDARY),
                    [a, b] => (*a.min(b), *a.max(b)),
                    _ => continue,
                };
                merged
                    .entry(key)
                    .and_modify(|(p, obs)| {
                        if *obs == part.observables {
                            *p = xor_probability(*p, m.probability);
                        } else if m.probability > *p {
                            *p = m.probability;
                            *obs = part.observables;
                        }
                    })
                    .or_insert((m.probability, part.observables));
            }
        }
        let edges: Vec<Edge> = merged
            .into_iter()
            .map(|((a, b), (p, obs))| Edge {
                a,
                b,
                probability: p,
                weight: edge_weight(p),
                observables: obs,
            })
            .collect();
        let n = dem.num_detectors;
        let mut adjacency = vec![Vec::new(); n + 1];
        let node = |x: u32| if x == BOUNDARY { n } else { x as usize };
        for (i, e) in edges.iter().enumerate() {
            adjacency[node(e.a)].push((e.b, i));
            adjacency[node(e.b)].push((e.a, i));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        MatchingGraph {
            num_detectors: n,
            num_observables: dem.num_observables,
            edges,
            adjacency,
        }
    }

    fn node(&self, x: u32) -> usize {
        if x == BOUNDARY {
            self.num_detectors
        } else {
            x as usize
        }
    }

    /// Shortest paths from `src` to every node; paths never pass through the
    /// boundary. Returns (distance, observable parity) per node, with the
    /// boundary last.
    pub fn shortest_paths(&self, src: u32) -> Vec<(i64, u64)> {
        let n = self.num_detectors + 1;
        let mut dist = vec![(i64::MAX, 0u64); n];
        let mut heap = BinaryHeap::new();
        let s = self.node(src);
        dist[s] = (0, 0);
        heap.push(Reverse((0i64, s)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u].0 || u == self.num_detectors {
                continue;
            }
            for &(v, ei) in &self.adjacency[u] {
                let v = self.node(v);
                let e = &self.edges[ei];
                let nd = d + e.weight;
                if nd < dist[v].0 {
                    dist[v] = (nd, dist[u].1 ^ e.observables);
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        dist
    }
}
