//! ASAP layering of a gate list that preserves the order of operations on
//! every qubit.
//!
//! Resets are "sticky": they are placed in the layer immediately before the
//! next use of their qubit instead of as early as possible, so freshly reset
//! qubits do not sit idle.

use std::collections::HashMap;

use super::{Basis, Circuit, Instruction};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Op {
    ResetZ(u32),
    ResetX(u32),
    #[allow(dead_code)] // no builder needs a bare Hadamard yet
    H(u32),
    Cx(u32, u32),
    /// Measurement tagged with a caller-chosen key.
    Measure(Basis, u32, usize),
    PrepArb(u32, f64, f64),
    /// Everything after the barrier starts after everything before it.
    Barrier,
}

impl Op {
    fn qubits(&self) -> ([u32; 2], usize) {
        match *self {
            Op::ResetZ(q) | Op::ResetX(q) | Op::H(q) | Op::Measure(_, q, _) | Op::PrepArb(q, ..) => ([q, q], 1),
            Op::Cx(a, b) => ([a, b], 2),
            Op::Barrier => ([0, 0], 0),
        }
    }

    fn is_reset(&self) -> bool {
        matches!(self, Op::ResetZ(_) | Op::ResetX(_))
    }

    /// Emission order of op kinds inside one layer.
    fn rank(&self) -> u8 {
        match self {
            Op::ResetZ(_) => 0,
            Op::ResetX(_) => 1,
            Op::PrepArb(..) => 2,
            Op::H(_) => 3,
            Op::Cx(..) => 4,
            Op::Measure(Basis::Z, ..) => 5,
            Op::Measure(Basis::X, ..) => 6,
            Op::Measure(Basis::Y, ..) => 7,
            Op::Barrier => 8,
        }
    }
}

pub(crate) struct Scheduled {
    pub circuit: Circuit,
    /// Measurement key -> record index.
    pub records: HashMap<usize, usize>,
}

pub(crate) fn schedule(num_qubits: usize, ops: &[Op]) -> Scheduled {
    let mut ready = vec![0usize; num_qubits];
    let mut pending_reset: Vec<Option<usize>> = vec![None; num_qubits];
    let mut placed: Vec<(usize, usize)> = Vec::with_capacity(ops.len());

    let mut floor = 0usize;
    for (i, op) in ops.iter().enumerate() {
        if *op == Op::Barrier {
            floor = ready.iter().copied().max().unwrap_or(0).max(floor);
            continue;
        }
        let (qs, n) = op.qubits();
        let qs = &qs[..n];
        if op.is_reset() {
            let q = qs[0] as usize;
            // A second reset with no use in between supersedes the first.
            if let Some(prev) = pending_reset[q].take() {
                placed.push((usize::MAX, prev));
            }
            pending_reset[q] = Some(i);
            continue;
        }
        let layer = qs
            .iter()
            .map(|&q| {
                let pending = usize::from(pending_reset[q as usize].is_some());
                (ready[q as usize] + pending).max(floor + pending)
            })
            .max()
            .unwrap();
        for &q in qs {
            let q = q as usize;
            if let Some(r) = pending_reset[q].take() {
                placed.push((layer - 1, r));
            }
            ready[q] = layer + 1;
        }
        placed.push((layer, i));
    }
    for q in 0..num_qubits {
        if let Some(r) = pending_reset[q].take() {
            placed.push((ready[q], r));
            ready[q] += 1;
        }
    }
    placed.retain(|&(layer, _)| layer != usize::MAX);

    let depth = placed.iter().map(|&(l, _)| l + 1).max().unwrap_or(0);
    let mut layers: Vec<Vec<&Op>> = vec![Vec::new(); depth];
    for &(l, i) in &placed {
        layers[l].push(&ops[i]);
    }

    let mut circuit = Circuit::new(num_qubits);
    let mut records = HashMap::new();
    let mut next_record = 0usize;
    for (li, layer) in layers.iter_mut().enumerate() {
        if li > 0 {
            circuit.push(Instruction::Tick);
        }
        layer.sort_by_key(|op| (op.rank(), op.qubits().0[0]));
        let mut idx = 0;
        while idx < layer.len() {
            let rank = layer[idx].rank();
            let end = idx + layer[idx..].iter().take_while(|o| o.rank() == rank).count();
            let group = &layer[idx..end];
            let singles = || group.iter().map(|o| o.qubits().0[0]).collect::<Vec<_>>();
            match group[0] {
                Op::ResetZ(_) => circuit.push(Instruction::ResetZ(singles())),
                Op::ResetX(_) => circuit.push(Instruction::ResetX(singles())),
                Op::H(_) => circuit.push(Instruction::H(singles())),
                Op::Cx(..) => circuit.push(Instruction::Cx(
                    group
                        .iter()
                        .map(|o| match o {
                            Op::Cx(a, b) => (*a, *b),
                            _ => unreachable!(),
                        })
                        .collect(),
                )),
                Op::PrepArb(..) => {
                    for o in group {
                        if let Op::PrepArb(q, theta, phi) = **o {
                            circuit.push(Instruction::PrepArb { qubit: q, theta, phi });
                        }
                    }
                }
                Op::Barrier => unreachable!("barriers are never placed"),
                Op::Measure(basis, ..) => {
                    let mut targets = Vec::with_capacity(group.len());
                    for o in group {
                        if let Op::Measure(_, q, key) = **o {
                            targets.push(q);
                            records.insert(key, next_record);
                            next_record += 1;
                        }
                    }
                    circuit.push(Instruction::Measure { basis: *basis, targets });
                }
            }
            idx = end;
        }
    }
    Scheduled { circuit, records }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_qubit_order_and_sticky_reset() {
        let ops = vec![
            Op::ResetZ(0),
            Op::ResetZ(1),
            Op::H(2),
            Op::H(2),
            Op::H(2),
            Op::Cx(2, 1),
            Op::Measure(Basis::Z, 1, 7),
            Op::Cx(0, 2),
        ];
        let s = schedule(3, &ops);
        let text = s.circuit.to_text();
        // Reset of qubit 1 waits until just before the CX at layer 3.
        let expected = "QUBITS 3\nH 2\nTICK\nH 2\nTICK\nRESET_Z 1\nH 2\nTICK\nRESET_Z 0\nCX 2 1\n\
                        TICK\nCX 0 2\nMEASURE_Z 1\n";
        assert_eq!(text, expected);
        assert_eq!(s.records[&7], 0);
        s.circuit.validate(None).unwrap();
    }
}
