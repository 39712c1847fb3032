//! Exact reference decoders and the circuit-distance search.

use std::collections::{HashMap, VecDeque};

use super::dem::{DetectorErrorModel, Signature};
use crate::error::{Error, Result};

/// Maximum-likelihood observable class for a syndrome, summing over every
/// subset of mechanisms. Ties go to the class with the smaller mask, so a
/// symmetric tie decodes to "no flip".
pub fn ml_decode_bruteforce(dem: &DetectorErrorModel, syndrome: &[u32]) -> Result<u64> {
    let m = dem.mechanisms.len();
    if m > 20 {
        return Err(Error::TooLarge {
            what: "mechanisms",
            count: m,
            limit: 20,
        });
    }
    let target = {
        let mut s = syndrome.to_vec();
        s.sort_unstable();
        s.dedup();
        s
    };
    let mut classes: HashMap<u64, f64> = HashMap::new();
    for subset in 0u32..(1 << m) {
        let mut sig = Signature::default();
        let mut prob = 1.0;
        for (i, mech) in dem.mechanisms.iter().enumerate() {
            if subset >> i & 1 == 1 {
                sig = sig.xor(&mech.signature);
                prob *= mech.probability;
            } else {
                prob *= 1.0 - mech.probability;
            }
        }
        if sig.detectors == target {
            *classes.entry(sig.observables).or_insert(0.0) += prob;
        }
    }
    let mut best = (0u64, -1.0f64);
    let mut keys: Vec<_> = classes.into_iter().collect();
    keys.sort_by_key(|&(k, _)| k);
    for (k, p) in keys {
        if p > best.1 {
            best = (k, p);
        }
    }
    Ok(best.0)
}

/// Fewest mechanisms whose combined effect fires no detector but flips an
/// observable. `None` if no such combination has at most `max_weight`
/// mechanisms.
///
/// An upper bound comes from a breadth-first search over mechanisms with at
/// most two detectors. Smaller solutions are then excluded (or found) by a
/// depth-first search that always cancels the lowest active detector, with
/// the final step done by table lookup.
pub fn min_distance(dem: &DetectorErrorModel, max_weight: usize) -> Option<usize> {
    let sigs: Vec<&Signature> = {
        let mut v: Vec<&Signature> = dem
            .mechanisms
            .iter()
            .map(|m| &m.signature)
            .filter(|s| !s.is_empty())
            .collect();
        v.sort();
        v.dedup();
        v
    };
    if sigs.iter().any(|s| s.detectors.is_empty()) {
        return Some(1);
    }
    let upper = graphlike_bound(dem.num_detectors, &sigs).unwrap_or(usize::MAX);
    let limit = upper.min(max_weight + 1);

    let mut by_detector: Vec<Vec<usize>> = vec![Vec::new(); dem.num_detectors];
    let mut exact: HashMap<&[u32], Vec<u64>> = HashMap::new();
    for (i, s) in sigs.iter().enumerate() {
        for &d in &s.detectors {
            by_detector[d as usize].push(i);
        }
        exact.entry(s.detectors.as_slice()).or_default().push(s.observables);
    }
    let max_dets = sigs.iter().map(|s| s.detectors.len()).max().unwrap_or(1);
    let search = Search {
        sigs: &sigs,
        by_detector: &by_detector,
        exact: &exact,
        max_dets,
    };
    for weight in 2..limit {
        let found = sigs
            .iter()
            .filter(|s| s.observables != 0)
            .any(|s| search.extend(&s.detectors, s.observables, weight - 1));
        if found {
            return Some(weight);
        }
    }
    (upper <= max_weight).then_some(upper)
}

struct Search<'a> {
    sigs: &'a [&'a Signature],
    by_detector: &'a [Vec<usize>],
    exact: &'a HashMap<&'a [u32], Vec<u64>>,
    max_dets: usize,
}

impl Search<'_> {
    /// Can `budget` more mechanisms cancel `active` while leaving a nonzero
    /// observable?
    fn extend(&self, active: &[u32], obs: u64, budget: usize) -> bool {
        if active.is_empty() {
            return obs != 0;
        }
        if budget == 0 || active.len() > budget * self.max_dets {
            return false;
        }
        if budget == 1 {
            return self
                .exact
                .get(active)
                .is_some_and(|masks| masks.iter().any(|&m| m ^ obs != 0));
        }
        let a = active[0];
        let here = Signature {
            detectors: active.to_vec(),
            observables: obs,
        };
        for &i in &self.by_detector[a as usize] {
            let next = here.xor(self.sigs[i]);
            if self.extend(&next.detectors, next.observables, budget - 1) {
                return true;
            }
        }
        false
    }
}

/// Shortest boundary-to-boundary walk with odd observable parity through
/// mechanisms of at most two detectors (single-observable DEMs use bit 0).
fn graphlike_bound(n: usize, sigs: &[&Signature]) -> Option<usize> {
    let boundary = n;
    let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n + 1];
    for s in sigs {
        match s.detectors.as_slice() {
            &[a] => {
                adj[a as usize].push((boundary, s.observables));
                adj[boundary].push((a as usize, s.observables));
            }
            &[a, b] => {
                adj[a as usize].push((b as usize, s.observables));
                adj[b as usize].push((a as usize, s.observables));
            }
            _ => {}
        }
    }
    let mut best: Option<usize> = None;
    // One BFS per observable bit that appears.
    let bits: u64 = sigs.iter().fold(0, |acc, s| acc | s.observables);
    for bit in (0..64).filter(|b| bits >> b & 1 == 1) {
        let mut dist = vec![[usize::MAX; 2]; n + 1];
        dist[boundary][0] = 0;
        let mut queue = VecDeque::from([(boundary, 0usize)]);
        while let Some((u, par)) = queue.pop_front() {
            if u == boundary && par == 1 {
                break;
            }
            if u == boundary && dist[u][par] != 0 {
                continue;
            }
            for &(v, o) in &adj[u] {
                let np = par ^ (o >> bit & 1) as usize;
                if dist[v][np] == usize::MAX {
                    dist[v][np] = dist[u][par] + 1;
                    queue.push_back((v, np));
                }
            }
        }
        let d = dist[boundary][1];
        if d != usize::MAX {
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::dem::DemMechanism;

    fn dem(n: usize, mechs: &[(f64, &[u32], u64)]) -> DetectorErrorModel {
        DetectorErrorModel {
            num_detectors: n,
            num_observables: 1,
            mechanisms: mechs
                .iter()
                .map(|&(p, d, o)| {
                    let s = Signature {
                        detectors: d.to_vec(),
                        observables: o,
                    };
                    DemMechanism {
                        probability: p,
                        parts: vec![s.clone()],
                        signature: s,
                    }
                })
                .collect(),
        }
    }

    #[test]
    fn ml_single_and_tie() {
        let d = dem(1, &[(0.1, &[0], 1)]);
        assert_eq!(ml_decode_bruteforce(&d, &[0]).unwrap(), 1);
        assert_eq!(ml_decode_bruteforce(&d, &[]).unwrap(), 0);
        let d = dem(1, &[(0.1, &[0], 1), (0.1, &[0], 0)]);
        assert_eq!(ml_decode_bruteforce(&d, &[0]).unwrap(), 0);
    }

    #[test]
    fn repetition_distance() {
        // B -0- D0 -1- D1 -2- B with the observable on the first edge.
        let d = dem(2, &[(0.1, &[0], 1), (0.1, &[0, 1], 0), (0.1, &[1], 0)]);
        assert_eq!(min_distance(&d, 10), Some(3));
        // A hyperedge shortcut lowers the distance.
        let d = dem(
            2,
            &[(0.1, &[0], 1), (0.1, &[0, 1], 0), (0.1, &[1], 0), (0.1, &[0, 1], 1)],
        );
        assert_eq!(min_distance(&d, 10), Some(2));
        assert_eq!(min_distance(&dem(2, &[(0.1, &[0, 1], 0)]), 10), None);
    }
}
