//! Minimum-weight perfect matching over the defects of a syndrome.
//!
//! All-pairs shortest paths are computed once per graph. A syndrome with k
//! defects becomes a complete graph on the defects (plus one boundary vertex
//! when k is odd). The edge between two defects costs the cheaper of their
//! connecting path and sending both to the boundary. A minimum-weight perfect
//! matching of that graph is an optimal pairing with the boundary allowed.

use petgraph::graph::UnGraph;
use rayon::prelude::*;
use rustworkx_core::max_weight_matching::max_weight_matching;

use super::graph::{MatchingGraph, BOUNDARY};
use crate::error::{Error, Result};
use crate::sim::shots::ShotBatch;

const UNREACHABLE: i64 = i64::MAX;
/// Largest cluster solved by subset DP inside [`Matcher::decode`].
const DP_LIMIT: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correction {
    pub observables: u64,
    pub weight: i64,
    /// Matched pairs; the second element may be [`BOUNDARY`].
    pub pairs: Vec<(u32, u32)>,
}

impl Correction {
    fn empty() -> Self {
        Correction {
            observables: 0,
            weight: 0,
            pairs: Vec::new(),
        }
    }
}

pub struct Matcher {
    n: usize,
    /// Row-major `n x n` path weights and observable parities.
    dist: Vec<i64>,
    obs: Vec<u64>,
    boundary: Vec<(i64, u64)>,
}

impl Matcher {
    pub fn new(graph: &MatchingGraph) -> Self {
        let n = graph.num_detectors;
        let rows: Vec<Vec<(i64, u64)>> = (0..n as u32).into_par_iter().map(|s| graph.shortest_paths(s)).collect();
        let mut dist = vec![UNREACHABLE; n * n];
        let mut obs = vec![0u64; n * n];
        let mut boundary = Vec::with_capacity(n);
        for (i, row) in rows.iter().enumerate() {
            for j in 0..n {
                dist[i * n + j] = row[j].0;
                obs[i * n + j] = row[j].1;
            }
            boundary.push(row[n]);
        }
        Matcher { n, dist, obs, boundary }
    }

    pub fn num_detectors(&self) -> usize {
        self.n
    }

    /// Path weight and observable parity between two detectors, or between a
    /// detector and the boundary.
    pub fn path(&self, a: u32, b: u32) -> (i64, u64) {
        if b == BOUNDARY {
            self.boundary[a as usize]
        } else {
            let k = a as usize * self.n + b as usize;
            (self.dist[k], self.obs[k])
        }
    }

    fn check(&self, defects: &[u32]) -> Result<()> {
        match defects.iter().find(|&&d| d as usize >= self.n) {
            Some(&d) => Err(Error::DefectNotInGraph(d as usize)),
            None => Ok(()),
        }
    }

    fn finish(&self, mut pairs: Vec<(u32, u32)>) -> Result<Correction> {
        pairs.sort_unstable();
        let mut c = Correction::empty();
        for &(a, b) in &pairs {
            let (w, o) = self.path(a, b);
            if w == UNREACHABLE {
                return Err(Error::NoMatching);
            }
            c.weight += w;
            c.observables ^= o;
        }
        c.pairs = pairs;
        Ok(c)
    }

    /// Decodes a sorted, duplicate-free defect list.
    ///
    /// Defects are first split into clusters: two defects belong together when
    /// pairing them is cheaper than sending both to the boundary. No optimal
    /// matching pairs defects from different clusters, so each cluster is
    /// solved on its own, small ones by subset DP and large ones by blossom.
    pub fn decode(&self, defects: &[u32]) -> Result<Correction> {
        self.check(defects)?;
        match *defects {
            [] => return Ok(Correction::empty()),
            [a] => return self.finish(vec![(a, BOUNDARY)]),
            [a, b] => return self.finish(self.pair_or_boundary(a, b)),
            _ => {}
        }
        let k = defects.len();
        let mut parent: Vec<usize> = (0..k).collect();
        fn root(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for i in 0..k {
            let bi = self.boundary[defects[i] as usize].0;
            for j in i + 1..k {
                let w = self.path(defects[i], defects[j]).0;
                let bj = self.boundary[defects[j] as usize].0;
                if w != UNREACHABLE && w < bi.saturating_add(bj) {
                    let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
        }
        let mut clusters: Vec<Vec<u32>> = vec![Vec::new(); k];
        for i in 0..k {
            let r = root(&mut parent, i);
            clusters[r].push(defects[i]);
        }
        let mut pairs = Vec::with_capacity(k);
        for cluster in clusters.iter().filter(|c| !c.is_empty()) {
            match cluster.len() {
                1 => pairs.push((cluster[0], BOUNDARY)),
                2 => pairs.extend(self.pair_or_boundary(cluster[0], cluster[1])),
                n if n <= DP_LIMIT => pairs.extend(self.exhaustive_pairs(cluster)?),
                _ => pairs.extend(self.decode_blossom(cluster)?.pairs),
            }
        }
        self.finish(pairs)
    }

    fn pair_or_boundary(&self, a: u32, b: u32) -> Vec<(u32, u32)> {
        let direct = self.path(a, b).0;
        let via = self.boundary[a as usize].0.saturating_add(self.boundary[b as usize].0);
        if direct <= via {
            vec![(a, b)]
        } else {
            vec![(a, BOUNDARY), (b, BOUNDARY)]
        }
    }

    /// Always runs the general matching, even for one or two defects.
    pub fn decode_blossom(&self, defects: &[u32]) -> Result<Correction> {
        self.check(defects)?;
        let k = defects.len();
        if k == 0 {
            return Ok(Correction::empty());
        }
        let bd: Vec<i64> = defects.iter().map(|&d| self.boundary[d as usize].0).collect();
        // Node k (present when k is odd) is the boundary.
        let n = k + (k & 1);
        let mut g: UnGraph<(), (i64, bool)> = UnGraph::with_capacity(n, n * n / 2);
        let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
        for i in 0..k {
            for j in i + 1..k {
                let direct = self.path(defects[i], defects[j]).0;
                let via = bd[i].saturating_add(bd[j]);
                if direct.min(via) != UNREACHABLE {
                    g.add_edge(nodes[i], nodes[j], (direct.min(via), direct <= via));
                }
            }
            if n > k && bd[i] != UNREACHABLE {
                g.add_edge(nodes[i], nodes[k], (bd[i], false));
            }
        }
        const BIG: i128 = 1 << 60;
        let matching = max_weight_matching(
            &g,
            true,
            |e: petgraph::graph::EdgeReference<(i64, bool)>| {
                Ok::<i128, std::convert::Infallible>(BIG - e.weight().0 as i128)
            },
            false,
        )
        .unwrap_or_else(|e| match e {});
        if matching.len() * 2 != n {
            return Err(Error::NoMatching);
        }
        let mut pairs = Vec::with_capacity(k);
        for (u, v) in matching {
            let (u, v) = (u.min(v), u.max(v));
            if v == k {
                pairs.push((defects[u], BOUNDARY));
            } else {
                let e = g.find_edge(nodes[u], nodes[v]).expect("matched edge exists");
                if g[e].1 {
                    pairs.push((defects[u], defects[v]));
                } else {
                    pairs.push((defects[u], BOUNDARY));
                    pairs.push((defects[v], BOUNDARY));
                }
            }
        }
        self.finish(pairs)
    }

    /// Optimal matching by dynamic programming over defect subsets.
    pub fn decode_exhaustive(&self, defects: &[u32]) -> Result<Correction> {
        self.check(defects)?;
        let pairs = self.exhaustive_pairs(defects)?;
        self.finish(pairs)
    }

    fn exhaustive_pairs(&self, defects: &[u32]) -> Result<Vec<(u32, u32)>> {
        let k = defects.len();
        if k > 16 {
            return Err(Error::TooLarge {
                what: "defects",
                count: k,
                limit: 16,
            });
        }
        let full = (1usize << k) - 1;
        let mut best = vec![UNREACHABLE; 1 << k];
        let mut choice = vec![(0u8, 0u8); 1 << k];
        best[0] = 0;
        for mask in 1..=full {
            let i = mask.trailing_zeros() as usize;
            let rest = mask & !(1 << i);
            let bw = self.boundary[defects[i] as usize].0;
            if bw != UNREACHABLE && best[rest] != UNREACHABLE && best[rest] + bw < best[mask] {
                best[mask] = best[rest] + bw;
                choice[mask] = (i as u8, u8::MAX);
            }
            let mut others = rest;
            while others != 0 {
                let j = others.trailing_zeros() as usize;
                others &= others - 1;
                let w = self.path(defects[i], defects[j]).0;
                let sub = rest & !(1 << j);
                if w != UNREACHABLE && best[sub] != UNREACHABLE && best[sub] + w < best[mask] {
                    best[mask] = best[sub] + w;
                    choice[mask] = (i as u8, j as u8);
                }
            }
        }
        if best[full] == UNREACHABLE {
            return Err(Error::NoMatching);
        }
        let mut pairs = Vec::with_capacity(k);
        let mut mask = full;
        while mask != 0 {
            let (i, j) = choice[mask];
            mask &= !(1 << i);
            if j == u8::MAX {
                pairs.push((defects[i as usize], BOUNDARY));
            } else {
                mask &= !(1 << j);
                pairs.push((defects[i as usize], defects[j as usize]));
            }
        }
        Ok(pairs)
    }

    /// Predicted observable flips for every shot of a batch.
    pub fn decode_batch(&self, batch: &ShotBatch) -> Result<Vec<u64>> {
        if batch.num_detectors() != self.n {
            return Err(Error::Validation(format!(
                "shots have {} detectors, graph has {}",
                batch.num_detectors(),
                self.n
            )));
        }
        (0..batch.shots())
            .into_par_iter()
            .with_min_len(256)
            .map(|s| {
                let defects: Vec<u32> = batch.fired(s).into_iter().map(|d| d as u32).collect();
                self.decode(&defects).map(|c| c.observables)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::dem::{DemMechanism, DetectorErrorModel, Signature};

    fn chain(ps: &[f64]) -> MatchingGraph {
        // Repetition-code style path: B - 0 - 1 - ... - (n-1) - B.
        let n = ps.len() - 1;
        let mut mechanisms = Vec::new();
        for (i, &p) in ps.iter().enumerate() {
            let detectors = match i {
                0 => vec![0],
                i if i == n => vec![(n - 1) as u32],
                i => vec![(i - 1) as u32, i as u32],
            };
            let sig = Signature {
                detectors,
                observables: u64::from(i == 0),
            };
            mechanisms.push(DemMechanism {
                probability: p,
                parts: vec![sig.clone()],
                signature: sig,
            });
        }
        MatchingGraph::from_dem(&DetectorErrorModel {
            num_detectors: n,
            num_observables: 1,
            mechanisms,
        })
    }

    #[test]
    fn empty_and_adjacent() {
        let m = Matcher::new(&chain(&[0.01, 0.1, 0.01]));
        assert_eq!(m.decode(&[]).unwrap(), Correction::empty());
        let c = m.decode(&[0, 1]).unwrap();
        assert_eq!(c.pairs, vec![(0, 1)]);
        assert_eq!(c.observables, 0);
        let c = m.decode_blossom(&[0, 1]).unwrap();
        assert_eq!(c.pairs, vec![(0, 1)]);
        // With a cheap boundary the two boundary edges win.
        let m = Matcher::new(&chain(&[0.3, 0.001, 0.3]));
        let c = m.decode(&[0, 1]).unwrap();
        assert_eq!(c.pairs, vec![(0, BOUNDARY), (1, BOUNDARY)]);
        assert_eq!(c.observables, 1);
        assert_eq!(m.decode_blossom(&[0, 1]).unwrap(), c);
        assert!(matches!(m.decode(&[5]), Err(Error::DefectNotInGraph(5))));
    }

    #[test]
    fn blossom_matches_exhaustive_on_chain() {
        let ps = [0.02, 0.05, 0.01, 0.2, 0.03, 0.07, 0.04, 0.1, 0.06];
        let m = Matcher::new(&chain(&ps));
        for mask in 0u32..(1 << 8) {
            let defects: Vec<u32> = (0..8).filter(|i| mask >> i & 1 == 1).collect();
            let a = m.decode_blossom(&defects).unwrap();
            let b = m.decode_exhaustive(&defects).unwrap();
            assert_eq!(a.weight, b.weight, "{defects:?}");
        }
    }
}
