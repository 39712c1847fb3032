//! Syndrome-extraction, memory and injection circuit builders.
//!
//! Builders emit an ordered op list with symbolic measurement keys, schedule
//! it into layers, and finally attach detectors. Detector candidates are
//! (i) a stabilizer's first outcome on its own, (ii) consecutive outcomes of
//! the same stabilizer, and (iii) the last outcome against the parity rebuilt
//! from the final data measurement. A candidate is kept exactly when the
//! tableau finds it deterministic, with the tableau's value as its parity.

use std::collections::HashMap;

use super::schedule::{schedule, Op};
use super::{Basis, Circuit, Instruction};
use crate::error::{Error, Result};
use crate::lattice::{injection_layout, InitBasis, LatticeLayout, PauliKind, QubitId, Readout, SubGroup};
use crate::sim::tableau::{run_symbolic, PrepMode};

/// What a detector compares.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetectorKind {
    /// First outcome of a stabilizer against its initial value.
    Initial,
    /// Two consecutive outcomes of the same stabilizer.
    Compare,
    /// Last outcome against the final data-qubit parity.
    Final,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DetectorMeta {
    pub stabilizer: usize,
    pub pauli: PauliKind,
    /// Index of the later measurement in the stabilizer's sequence; the final
    /// data readout counts as one past the last round.
    pub round: usize,
    pub kind: DetectorKind,
}

#[derive(Clone, Debug)]
pub struct MemoryCircuit {
    pub circuit: Circuit,
    pub basis: PauliKind,
    pub rounds: usize,
    pub detectors: Vec<DetectorMeta>,
}

#[derive(Clone, Debug)]
pub struct InjectionCircuit {
    pub circuit: Circuit,
    pub center: u32,
    pub theta: f64,
    pub phi: f64,
    pub basis: Basis,
    pub logical_x: Vec<u32>,
    pub logical_z: Vec<u32>,
    pub detectors: Vec<DetectorMeta>,
}

#[derive(Default)]
struct OpList {
    ops: Vec<Op>,
    next_key: usize,
    /// Per stabilizer, its measurement keys in time order.
    stab_keys: Vec<Vec<usize>>,
}

impl OpList {
    fn new(num_stabilizers: usize) -> Self {
        OpList {
            stab_keys: vec![Vec::new(); num_stabilizers],
            ..Default::default()
        }
    }

    fn measure(&mut self, basis: Basis, q: QubitId) -> usize {
        let key = self.next_key;
        self.next_key += 1;
        self.ops.push(Op::Measure(basis, q.0 as u32, key));
        key
    }

    fn fold(&mut self, layout: &LatticeLayout, group: SubGroup) {
        for link in layout.fold_links(group) {
            let (t, b, bot) = (link.control.0 as u32, link.bridge.0 as u32, link.target.0 as u32);
            self.ops.push(Op::ResetZ(b));
            self.ops.push(Op::Cx(t, b));
            self.ops.push(Op::Cx(b, bot));
            self.ops.push(Op::Cx(t, b));
        }
    }

    fn subround(&mut self, layout: &LatticeLayout, group: SubGroup) {
        self.fold(layout, group);
        for (idx, stab) in layout.stabilizers_in(group) {
            let key = match &stab.readout {
                Readout::Ancilla { ancilla, folded } => {
                    let a = ancilla.0 as u32;
                    match stab.pauli {
                        PauliKind::Z => {
                            self.ops.push(Op::ResetZ(a));
                            for f in folded {
                                self.ops.push(Op::Cx(f.0 as u32, a));
                            }
                            self.measure(Basis::Z, *ancilla)
                        }
                        PauliKind::X => {
                            self.ops.push(Op::ResetX(a));
                            for f in folded {
                                self.ops.push(Op::Cx(a, f.0 as u32));
                            }
                            self.measure(Basis::X, *ancilla)
                        }
                    }
                }
                Readout::Direct(q) => self.measure(Basis::Z, *q),
            };
            self.stab_keys[idx].push(key);
        }
        // Unfolding starts once the sub-round's readouts are done and is the
        // same self-inverse gate sequence.
        self.ops.push(Op::Barrier);
        self.fold(layout, group);
    }
}

fn kind_basis(k: PauliKind) -> Basis {
    match k {
        PauliKind::X => Basis::X,
        PauliKind::Z => Basis::Z,
    }
}

/// One sub-round of syndrome extraction for `group`, scheduled into layers.
pub fn build_subround(layout: &LatticeLayout, group: SubGroup) -> Circuit {
    let mut ops = OpList::new(layout.stabilizers().len());
    ops.subround(layout, group);
    schedule(layout.num_qubits(), &ops.ops).circuit
}

struct Candidate {
    keys: Vec<usize>,
    meta: DetectorMeta,
}

/// Schedules the ops, then keeps deterministic candidates as detectors.
fn finish(
    num_qubits: usize,
    ops: &[Op],
    candidates: Vec<Candidate>,
    observable_keys: &[usize],
) -> Result<(Circuit, Vec<DetectorMeta>)> {
    let scheduled = schedule(num_qubits, ops);
    let mut circuit = scheduled.circuit;
    let rec = |k: &usize| scheduled.records[k];
    let sym = run_symbolic(&circuit, PrepMode::Purified)?;

    let mut kept: Vec<(Vec<usize>, bool, DetectorMeta)> = Vec::new();
    for cand in candidates {
        let mut records: Vec<usize> = cand.keys.iter().map(rec).collect();
        records.sort_unstable();
        // Keys that appear twice cancel.
        let mut reduced: Vec<usize> = Vec::with_capacity(records.len());
        for r in records {
            if reduced.last() == Some(&r) {
                reduced.pop();
            } else {
                reduced.push(r);
            }
        }
        if reduced.is_empty() {
            continue;
        }
        let parity = sym.parity(&reduced);
        if parity.is_deterministic() {
            kept.push((reduced, parity.constant, cand.meta));
        }
    }
    kept.sort_by(|a, b| {
        let ka = (a.0.last().copied(), a.0.first().copied());
        let kb = (b.0.last().copied(), b.0.first().copied());
        ka.cmp(&kb)
    });
    let mut metas = Vec::with_capacity(kept.len());
    for (records, expected, meta) in kept {
        circuit.push(Instruction::Detector { expected, records });
        metas.push(meta);
    }
    let mut obs: Vec<usize> = observable_keys.iter().map(rec).collect();
    obs.sort_unstable();
    circuit.push(Instruction::Observable { id: 0, records: obs });
    Ok((circuit, metas))
}

fn ids(v: &[QubitId]) -> Vec<u32> {
    v.iter().map(|q| q.0 as u32).collect()
}

/// Prepares a logical eigenstate of `basis`, runs `rounds` full rounds
/// (sub-round A then B) and measures every data qubit in `basis`.
///
/// The extra top-region row is always prepared in `|0>` and read out in Z,
/// since its weight-one Z stabilizers are part of the code.
pub fn build_memory_circuit(layout: &LatticeLayout, basis: PauliKind, rounds: usize) -> Result<MemoryCircuit> {
    if rounds < 1 {
        return Err(Error::InvalidArgument("memory circuit needs at least one round".into()));
    }
    let d = layout.distance().get() as usize;
    let data = layout.data_qubits();
    let final_basis = |q: QubitId| {
        if layout.grid_position(q).unwrap().0 == d {
            PauliKind::Z
        } else {
            basis
        }
    };

    let mut ops = OpList::new(layout.stabilizers().len());
    for &q in &data {
        ops.ops.push(match final_basis(q) {
            PauliKind::Z => Op::ResetZ(q.0 as u32),
            PauliKind::X => Op::ResetX(q.0 as u32),
        });
    }
    for _ in 0..rounds {
        ops.subround(layout, SubGroup::A);
        ops.subround(layout, SubGroup::B);
    }
    let mut final_keys = HashMap::new();
    for &q in &data {
        final_keys.insert(q, ops.measure(kind_basis(final_basis(q)), q));
    }

    let mut candidates = Vec::new();
    for (si, stab) in layout.stabilizers().iter().enumerate() {
        let keys = &ops.stab_keys[si];
        let meta = |round, kind| DetectorMeta {
            stabilizer: si,
            pauli: stab.pauli,
            round,
            kind,
        };
        candidates.push(Candidate {
            keys: vec![keys[0]],
            meta: meta(0, DetectorKind::Initial),
        });
        for r in 1..keys.len() {
            candidates.push(Candidate {
                keys: vec![keys[r - 1], keys[r]],
                meta: meta(r, DetectorKind::Compare),
            });
        }
        if stab.support.iter().all(|&q| final_basis(q) == stab.pauli) {
            let mut k = vec![*keys.last().unwrap()];
            k.extend(stab.support.iter().map(|q| final_keys[q]));
            candidates.push(Candidate {
                keys: k,
                meta: meta(keys.len(), DetectorKind::Final),
            });
        }
    }
    let logical = layout.logical(basis);
    let obs_keys: Vec<usize> = logical.support.iter().map(|q| final_keys[q]).collect();
    let (circuit, detectors) = finish(layout.num_qubits(), &ops.ops, candidates, &obs_keys)?;
    Ok(MemoryCircuit {
        circuit,
        basis,
        rounds,
        detectors,
    })
}

/// Distance-3 injection: prepare the center with `U3(theta, phi, 0)`, the
/// other data qubits per the injection layout, run two sub-rounds, and
/// measure the center in `basis` and every other data qubit in its
/// preparation basis. The weight-one readout of sub-round B doubles as the
/// final readout of the extra row.
pub fn build_injection_circuit(layout: &LatticeLayout, theta: f64, phi: f64, basis: Basis) -> Result<InjectionCircuit> {
    let inj = injection_layout(layout)?;
    if !theta.is_finite() || !phi.is_finite() {
        return Err(Error::InvalidArgument("non-finite injection angle".into()));
    }
    let d = layout.distance().get() as usize;
    let center = inj.center;

    let mut ops = OpList::new(layout.stabilizers().len());
    ops.ops.push(Op::PrepArb(center.0 as u32, theta, phi));
    for &(q, b) in &inj.init_basis {
        ops.ops.push(match b {
            InitBasis::Z => Op::ResetZ(q.0 as u32),
            InitBasis::X => Op::ResetX(q.0 as u32),
        });
    }
    ops.subround(layout, SubGroup::A);
    ops.subround(layout, SubGroup::B);

    let mut final_keys: HashMap<QubitId, (usize, Basis)> = HashMap::new();
    for (si, stab) in layout.stabilizers().iter().enumerate() {
        if let Readout::Direct(q) = stab.readout {
            final_keys.insert(q, (ops.stab_keys[si][0], Basis::Z));
        }
    }
    final_keys.insert(center, (ops.measure(basis, center), basis));
    for &(q, b) in &inj.init_basis {
        if layout.grid_position(q).unwrap().0 == d {
            continue;
        }
        let bb = kind_basis(b.kind());
        final_keys.insert(q, (ops.measure(bb, q), bb));
    }

    let mut candidates = Vec::new();
    for (si, stab) in layout.stabilizers().iter().enumerate() {
        let key = ops.stab_keys[si][0];
        let meta = |round, kind| DetectorMeta {
            stabilizer: si,
            pauli: stab.pauli,
            round,
            kind,
        };
        candidates.push(Candidate {
            keys: vec![key],
            meta: meta(0, DetectorKind::Initial),
        });
        let want = kind_basis(stab.pauli);
        if stab.support.iter().all(|q| final_keys[q].1 == want) {
            let mut k = vec![key];
            k.extend(stab.support.iter().map(|q| final_keys[q].0));
            candidates.push(Candidate {
                keys: k,
                meta: meta(1, DetectorKind::Final),
            });
        }
    }
    let support: Vec<QubitId> = match basis {
        Basis::X => layout.logical_x().support.clone(),
        Basis::Z => layout.logical_z().support.clone(),
        Basis::Y => {
            let mut s = layout.logical_x().support.clone();
            s.extend(layout.logical_z().support.iter().filter(|&&q| q != center));
            s
        }
    };
    let obs_keys: Vec<usize> = support.iter().map(|q| final_keys[q].0).collect();
    let (circuit, detectors) = finish(layout.num_qubits(), &ops.ops, candidates, &obs_keys)?;
    Ok(InjectionCircuit {
        circuit,
        center: center.0 as u32,
        theta,
        phi,
        basis,
        logical_x: ids(&layout.logical_x().support),
        logical_z: ids(&layout.logical_z().support),
        detectors,
    })
}

/// Six-qubit stand-in for the injection circuit, small enough for the dense
/// oracle. Data qubits 0 (center), 1 and 2 carry the stabilizers `Z0 Z1` and
/// `X0 X1 X2` with logicals `X0 X1` and `Z0 Z2`; qubit 3 is a bridge, 4 and 5
/// are the Z and X syndrome qubits. Each of two rounds folds `X1 X2` onto
/// qubit 1 through the bridge, reads both stabilizers, and unfolds. Qubit 1
/// starts in `|+>`, qubit 2 in `|0>`, and the center is prepared with
/// `U3(theta, phi, 0)`.
pub fn build_validation_patch(theta: f64, phi: f64, basis: Basis) -> Result<InjectionCircuit> {
    let (c, a, b, br, az, ax) = (0u32, 1u32, 2u32, 3u32, 4u32, 5u32);
    let mut ops = OpList::new(2);
    ops.ops.push(Op::PrepArb(c, theta, phi));
    ops.ops.push(Op::ResetX(a));
    ops.ops.push(Op::ResetZ(b));
    let fold = |ops: &mut OpList| {
        ops.ops
            .extend([Op::ResetZ(br), Op::Cx(a, br), Op::Cx(br, b), Op::Cx(a, br)]);
    };
    for _ in 0..2 {
        fold(&mut ops);
        ops.ops.extend([Op::ResetX(ax), Op::Cx(ax, c), Op::Cx(ax, a)]);
        let kx = ops.measure(Basis::X, QubitId(ax as usize));
        ops.ops.extend([Op::ResetZ(az), Op::Cx(c, az), Op::Cx(a, az)]);
        let kz = ops.measure(Basis::Z, QubitId(az as usize));
        ops.stab_keys[0].push(kz);
        ops.stab_keys[1].push(kx);
        ops.ops.push(Op::Barrier);
        fold(&mut ops);
    }
    let kc = ops.measure(basis, QubitId(c as usize));
    let ka = ops.measure(Basis::X, QubitId(a as usize));
    let kb = ops.measure(Basis::Z, QubitId(b as usize));
    let mut candidates = Vec::new();
    for (si, pauli) in [(0, PauliKind::Z), (1, PauliKind::X)] {
        let keys = &ops.stab_keys[si];
        let meta = |round, kind| DetectorMeta {
            stabilizer: si,
            pauli,
            round,
            kind,
        };
        candidates.push(Candidate {
            keys: vec![keys[0]],
            meta: meta(0, DetectorKind::Initial),
        });
        candidates.push(Candidate {
            keys: vec![keys[0], keys[1]],
            meta: meta(1, DetectorKind::Compare),
        });
    }
    let obs_keys = match basis {
        Basis::X => vec![kc, ka],
        Basis::Z => vec![kc, kb],
        Basis::Y => vec![kc, ka, kb],
    };
    let (circuit, detectors) = finish(6, &ops.ops, candidates, &obs_keys)?;
    Ok(InjectionCircuit {
        circuit,
        center: c,
        theta,
        phi,
        basis,
        logical_x: vec![c, a],
        logical_z: vec![c, b],
        detectors,
    })
}
