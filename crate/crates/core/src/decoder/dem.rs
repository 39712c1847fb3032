//! Detector error models.
//!
//! Signatures are computed with one backward sweep: walking the circuit from
//! the end, each qubit carries the set of detectors/observables an X or a Z
//! error at the current position would flip. Every mechanism then costs a few
//! row XORs instead of a full forward propagation.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::bits::BitRow;
use crate::circuit::{Basis, Circuit, Instruction};
use crate::error::{Error, Result};
use crate::noise::{enumerate_mechanisms, ErrorMechanism};
use crate::pauli::Pauli;

/// Detector set plus observable mask of an error.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Signature {
    pub detectors: Vec<u32>,
    pub observables: u64,
}

impl Signature {
    fn from_row(row: &BitRow, num_detectors: usize) -> Self {
        let mut detectors = Vec::new();
        let mut observables = 0u64;
        for i in row.iter_ones() {
            if i < num_detectors {
                detectors.push(i as u32);
            } else {
                observables |= 1 << (i - num_detectors);
            }
        }
        Signature { detectors, observables }
    }

    pub fn is_empty(&self) -> bool {
        self.detectors.is_empty() && self.observables == 0
    }

    pub fn xor(&self, other: &Signature) -> Signature {
        let mut detectors = Vec::with_capacity(self.detectors.len() + other.detectors.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.detectors, &other.detectors);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i] < b[j]) {
                detectors.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j] < a[i] {
                detectors.push(b[j]);
                j += 1;
            } else {
                i += 1;
                j += 1;
            }
        }
        Signature {
            detectors,
            observables: self.observables ^ other.observables,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DemMechanism {
    pub probability: f64,
    pub signature: Signature,
    /// Graphlike pieces (at most two detectors each) whose XOR is `signature`.
    pub parts: Vec<Signature>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorErrorModel {
    pub num_detectors: usize,
    pub num_observables: usize,
    pub mechanisms: Vec<DemMechanism>,
}

/// Combined probability of two independent mechanisms with the same effect.
pub fn xor_probability(p1: f64, p2: f64) -> f64 {
    p1 * (1.0 - p2) + p2 * (1.0 - p1)
}

/// Signature of every mechanism of `circuit`, in `enumerate_mechanisms` order.
pub fn mechanism_signatures(circuit: &Circuit) -> Vec<(ErrorMechanism, Signature)> {
    let mechanisms = enumerate_mechanisms(circuit);
    let nd = circuit.num_detectors();
    let width = nd + circuit.num_observables();
    let n = circuit.num_qubits();

    let mut touched: Vec<Vec<usize>> = vec![Vec::new(); circuit.measurement_count()];
    for d in circuit.detectors() {
        for &r in &d.records {
            touched[r].push(d.id);
        }
    }
    for (k, recs) in circuit.observables().iter().enumerate() {
        for &r in recs {
            touched[r].push(nd + k);
        }
    }

    let mut sx = vec![BitRow::zeros(width); n];
    let mut sz = vec![BitRow::zeros(width); n];
    let mut next_record = circuit.measurement_count();
    let mut out: Vec<Option<Signature>> = vec![None; mechanisms.len()];
    let mut m_end = mechanisms.len();
    let mut row = BitRow::zeros(width);

    for (idx, inst) in circuit.instructions().iter().enumerate().rev() {
        while m_end > 0 && mechanisms[m_end - 1].instruction == idx {
            m_end -= 1;
            let m = &mechanisms[m_end];
            row.clear();
            for &(q, p) in &m.paulis {
                let (x, z) = p.bits();
                if x {
                    row.xor_assign(&sx[q as usize]);
                }
                if z {
                    row.xor_assign(&sz[q as usize]);
                }
            }
            out[m_end] = Some(Signature::from_row(&row, nd));
        }
        match inst {
            Instruction::ResetZ(t) | Instruction::ResetX(t) => {
                for &q in t {
                    sx[q as usize].clear();
                    sz[q as usize].clear();
                }
            }
            Instruction::PrepArb { qubit, .. } => {
                sx[*qubit as usize].clear();
                sz[*qubit as usize].clear();
            }
            Instruction::H(t) => {
                for &q in t {
                    let q = q as usize;
                    std::mem::swap(&mut sx[q], &mut sz[q]);
                }
            }
            Instruction::Cx(pairs) => {
                for &(c, t) in pairs.iter().rev() {
                    let (c, t) = (c as usize, t as usize);
                    // X_c before the gate becomes X_c X_t; Z_t becomes Z_c Z_t.
                    let xt = sx[t].clone();
                    sx[c].xor_assign(&xt);
                    let zc = sz[c].clone();
                    sz[t].xor_assign(&zc);
                }
            }
            Instruction::Measure { basis, targets } => {
                for &q in targets.iter().rev() {
                    next_record -= 1;
                    let q = q as usize;
                    for &bit in &touched[next_record] {
                        if matches!(basis, Basis::Z | Basis::Y) {
                            sx[q].toggle(bit);
                        }
                        if matches!(basis, Basis::X | Basis::Y) {
                            sz[q].toggle(bit);
                        }
                    }
                }
            }
            _ => {}
        }
    }
    mechanisms
        .into_iter()
        .zip(out)
        .map(|(m, s)| (m, s.expect("every mechanism lies inside the circuit")))
        .collect()
}

fn part_signature(
    circuit_sigs: &HashMap<(usize, u32, u8), Signature>,
    m: &ErrorMechanism,
    take_x: bool,
) -> Option<Signature> {
    // The X (or Z) half of a mechanism is itself a mechanism of the same
    // channel whenever that channel offers it, which holds for depolarizing
    // channels.
    let mut acc = Signature::default();
    for &(q, p) in &m.paulis {
        let (x, z) = p.bits();
        let keep = if take_x { x } else { z };
        if keep {
            let single = if take_x { Pauli::X } else { Pauli::Z };
            acc = acc.xor(circuit_sigs.get(&(m.instruction, q, single as u8))?);
        }
    }
    Some(acc)
}

struct Decomposer {
    /// Graphlike signatures seen among single mechanisms: detectors -> observable masks.
    known: HashMap<Vec<u32>, Vec<u64>>,
}

impl Decomposer {
    fn search(&self, remaining: &[u32], target_obs: u64, acc_obs: u64, parts: &mut Vec<Signature>) -> bool {
        let Some(&a) = remaining.first() else {
            return acc_obs == target_obs;
        };
        let mut options: Vec<(Vec<u32>, usize)> = vec![(vec![a], 0)];
        for (i, &b) in remaining.iter().enumerate().skip(1) {
            options.push((vec![a, b], i));
        }
        for (dets, i) in options {
            let Some(masks) = self.known.get(&dets) else { continue };
            let rest: Vec<u32> = remaining
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != 0 && (i == 0 || k != i))
                .map(|(_, &d)| d)
                .collect();
            for &mask in masks {
                parts.push(Signature {
                    detectors: dets.clone(),
                    observables: mask,
                });
                if self.search(&rest, target_obs, acc_obs ^ mask, parts) {
                    return true;
                }
                parts.pop();
            }
        }
        false
    }

    fn decompose(&self, sig: &Signature) -> Option<Vec<Signature>> {
        if sig.detectors.len() <= 2 {
            return Some(vec![sig.clone()]);
        }
        let mut parts = Vec::new();
        self.search(&sig.detectors, sig.observables, 0, &mut parts)
            .then_some(parts)
    }
}

/// Builds the DEM of a noisy circuit. With `decompose`, mechanisms touching
/// more than two detectors are split into graphlike parts: first into their X
/// and Z halves, then by searching for a combination of graphlike signatures
/// that occur on their own in the circuit. A mechanism that cannot be split is
/// an error.
pub fn build_dem_with(circuit: &Circuit, decompose: bool) -> Result<DetectorErrorModel> {
    let sigs = mechanism_signatures(circuit);
    let mut singles: HashMap<(usize, u32, u8), Signature> = HashMap::new();
    let mut known: HashMap<Vec<u32>, Vec<u64>> = HashMap::new();
    for (m, s) in &sigs {
        if let [(q, p)] = m.paulis.as_slice() {
            singles.insert((m.instruction, *q, *p as u8), s.clone());
        }
        if !s.detectors.is_empty() && s.detectors.len() <= 2 {
            let masks = known.entry(s.detectors.clone()).or_default();
            if !masks.contains(&s.observables) {
                masks.push(s.observables);
            }
        }
    }
    for masks in known.values_mut() {
        masks.sort_unstable();
    }
    let decomposer = Decomposer { known };

    let mut merged: BTreeMap<(Signature, Vec<Signature>), f64> = BTreeMap::new();
    for (m, sig) in &sigs {
        if sig.is_empty() {
            continue;
        }
        let parts = if !decompose || sig.detectors.len() <= 2 {
            vec![sig.clone()]
        } else {
            let split = match (part_signature(&singles, m, true), part_signature(&singles, m, false)) {
                (Some(x), Some(z)) if !x.is_empty() && !z.is_empty() => {
                    match (decomposer.decompose(&x), decomposer.decompose(&z)) {
                        (Some(mut a), Some(b)) => {
                            a.extend(b);
                            Some(a)
                        }
                        _ => None,
                    }
                }
                _ => None,
            };
            match split.or_else(|| decomposer.decompose(sig)) {
                Some(p) => p,
                None => {
                    return Err(Error::Undecomposable {
                        location: m.describe(),
                        detectors: sig.detectors.iter().map(|&d| d as usize).collect(),
                    })
                }
            }
        };
        let entry = merged.entry((sig.clone(), parts)).or_insert(0.0);
        *entry = xor_probability(*entry, m.probability);
    }
    Ok(DetectorErrorModel {
        num_detectors: circuit.num_detectors(),
        num_observables: circuit.num_observables(),
        mechanisms: merged
            .into_iter()
            .map(|((signature, parts), probability)| DemMechanism {
                probability,
                signature,
                parts,
            })
            .collect(),
    })
}

pub fn build_dem(circuit: &Circuit) -> Result<DetectorErrorModel> {
    build_dem_with(circuit, true)
}

#[derive(Serialize, Deserialize)]
struct PartJson {
    dets: Vec<u32>,
    obs: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct MechanismJson {
    p: f64,
    dets: Vec<u32>,
    obs: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    parts: Vec<PartJson>,
}

#[derive(Serialize, Deserialize)]
struct DemJson {
    detectors: usize,
    observables: usize,
    mechanisms: Vec<MechanismJson>,
}

fn mask_to_list(mask: u64) -> Vec<u32> {
    (0..64).filter(|k| mask >> k & 1 == 1).collect()
}

fn list_to_mask(list: &[u32]) -> Result<u64> {
    list.iter().try_fold(0u64, |m, &k| {
        if k >= 64 {
            Err(Error::Validation(format!("observable index {k} out of range")))
        } else {
            Ok(m | 1 << k)
        }
    })
}

impl DetectorErrorModel {
    pub fn to_json(&self) -> String {
        let doc = DemJson {
            detectors: self.num_detectors,
            observables: self.num_observables,
            mechanisms: self
                .mechanisms
                .iter()
                .map(|m| MechanismJson {
                    p: m.probability,
                    dets: m.signature.detectors.clone(),
                    obs: mask_to_list(m.signature.observables),
                    parts: if m.parts.len() == 1 && m.parts[0] == m.signature {
                        Vec::new()
                    } else {
                        m.parts
                            .iter()
                            .map(|p| PartJson {
                                dets: p.detectors.clone(),
                                obs: mask_to_list(p.observables),
                            })
                            .collect()
                    },
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("DEM serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: DemJson = serde_json::from_str(s)?;
        let sig = |dets: Vec<u32>, obs: &[u32]| -> Result<Signature> {
            let mut dets = dets;
            dets.sort_unstable();
            if let Some(&d) = dets.iter().find(|&&d| d as usize >= doc.detectors) {
                return Err(Error::Validation(format!("mechanism references missing detector {d}")));
            }
            let observables = list_to_mask(obs)?;
            if doc.observables < 64 && observables >> doc.observables != 0 {
                return Err(Error::Validation("mechanism references a missing observable".into()));
            }
            Ok(Signature {
                detectors: dets,
                observables,
            })
        };
        let mut mechanisms = Vec::with_capacity(doc.mechanisms.len());
        for m in &doc.mechanisms {
            if !(0.0..=1.0).contains(&m.p) {
                return Err(Error::Validation(format!("probability {} out of range", m.p)));
            }
            let signature = sig(m.dets.clone(), &m.obs)?;
            let parts = if m.parts.is_empty() {
                vec![signature.clone()]
            } else {
                m.parts
                    .iter()
                    .map(|p| sig(p.dets.clone(), &p.obs))
                    .collect::<Result<Vec<_>>>()?
            };
            mechanisms.push(DemMechanism {
                probability: m.p,
                signature,
                parts,
            });
        }
        Ok(DetectorErrorModel {
            num_detectors: doc.detectors,
            num_observables: doc.observables,
            mechanisms,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{apply_noise, NoiseModel};
    use crate::sim::propagate::propagate_mechanism;

    fn rep_circuit() -> Circuit {
        Circuit::parse(
            "RESET_Z 0 1 2\nTICK\nCX 0 1\nTICK\nCX 2 1\nTICK\nMEASURE_Z 1\nDETECTOR rec[-1]\nTICK\n\
             MEASURE_Z 0 2\nDETECTOR rec[-1] rec[-2] rec[-3]\nOBSERVABLE(0) rec[-2]",
        )
        .unwrap()
    }

    #[test]
    fn backward_pass_matches_forward_propagation() {
        let c = apply_noise(&rep_circuit(), &NoiseModel::uniform(0.01)).unwrap();
        for (m, s) in mechanism_signatures(&c) {
            let p = propagate_mechanism(&c, &m).unwrap();
            let want: Vec<u32> = p.detector_list().into_iter().map(|d| d as u32).collect();
            assert_eq!(s.detectors, want, "{}", m.describe());
            assert_eq!(s.observables & 1 == 1, p.observables.get(0));
        }
    }

    #[test]
    fn noiseless_dem_is_empty() {
        let dem = build_dem(&rep_circuit()).unwrap();
        assert!(dem.mechanisms.is_empty());
    }

    #[test]
    fn identical_signatures_merge() {
        let c = Circuit::parse(
            "RESET_Z 0\nTICK\nFLIP_ERROR(0.1) 0\nTICK\nFLIP_ERROR(0.1) 0\nMEASURE_Z 0\nDETECTOR rec[-1]",
        )
        .unwrap();
        let dem = build_dem(&c).unwrap();
        assert_eq!(dem.mechanisms.len(), 1);
        assert!((dem.mechanisms[0].probability - 2.0 * 0.1 * 0.9).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let c = apply_noise(&rep_circuit(), &NoiseModel::uniform(0.01)).unwrap();
        let dem = build_dem(&c).unwrap();
        let back = DetectorErrorModel::from_json(&dem.to_json()).unwrap();
        assert_eq!(back, dem);
        assert!(DetectorErrorModel::from_json(
            r#"{"detectors":1,"observables":1,"mechanisms":[{"p":0.1,"dets":[3],"obs":[]}]}"#
        )
        .is_err());
    }

    #[test]
    fn signature_xor() {
        let a = Signature {
            detectors: vec![1, 3, 5],
            observables: 1,
        };
        let b = Signature {
            detectors: vec![3, 4],
            observables: 1,
        };
        assert_eq!(
            a.xor(&b),
            Signature {
                detectors: vec![1, 4, 5],
                observables: 0
            }
        );
    }
}
