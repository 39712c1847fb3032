//! Forward propagation of a single Pauli error through a circuit.

use crate::bits::BitRow;
use crate::circuit::{Basis, Circuit, Instruction};
use crate::error::{Error, Result};
use crate::noise::ErrorMechanism;
use crate::pauli::{Pauli, PauliString};

/// Effect of one error: flipped detectors, flipped observables and the
/// residual Pauli left on the qubits at the end of the circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct Propagation {
    pub detectors: BitRow,
    pub observables: BitRow,
    pub final_frame: PauliString,
}

impl Propagation {
    pub fn detector_list(&self) -> Vec<usize> {
        self.detectors.iter_ones().collect()
    }
}

/// Single-shot Pauli frame over `n` qubits.
#[derive(Clone, Debug)]
pub(crate) struct SingleFrame {
    pub xs: BitRow,
    pub zs: BitRow,
}

impl SingleFrame {
    pub fn new(n: usize) -> Self {
        SingleFrame {
            xs: BitRow::zeros(n),
            zs: BitRow::zeros(n),
        }
    }

    pub fn apply(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        if x {
            self.xs.toggle(q);
        }
        if z {
            self.zs.toggle(q);
        }
    }

    /// Applies a non-noise instruction, pushing measurement flips to `flips`.
    pub fn step(&mut self, inst: &Instruction, flips: &mut Vec<bool>) {
        match inst {
            Instruction::ResetZ(t) | Instruction::ResetX(t) => {
                for &q in t {
                    self.xs.set(q as usize, false);
                    self.zs.set(q as usize, false);
                }
            }
            Instruction::PrepArb { qubit, .. } => {
                self.xs.set(*qubit as usize, false);
                self.zs.set(*qubit as usize, false);
            }
            Instruction::H(t) => {
                for &q in t {
                    let q = q as usize;
                    let (x, z) = (self.xs.get(q), self.zs.get(q));
                    self.xs.set(q, z);
                    self.zs.set(q, x);
                }
            }
            Instruction::Cx(pairs) => {
                for &(c, t) in pairs {
                    let (c, t) = (c as usize, t as usize);
                    if self.xs.get(c) {
                        self.xs.toggle(t);
                    }
                    if self.zs.get(t) {
                        self.zs.toggle(c);
                    }
                }
            }
            Instruction::Measure { basis, targets } => {
                for &q in targets {
                    let q = q as usize;
                    flips.push(match basis {
                        Basis::Z => self.xs.get(q),
                        Basis::X => self.zs.get(q),
                        Basis::Y => self.xs.get(q) ^ self.zs.get(q),
                    });
                }
            }
            _ => {}
        }
    }
}

pub(crate) fn parities(circuit: &Circuit, flips: &[bool]) -> (BitRow, BitRow) {
    let dets = circuit.detectors();
    let detectors = BitRow::from_indices(
        dets.len(),
        dets.iter()
            .filter(|d| d.records.iter().fold(false, |a, &r| a ^ flips[r]))
            .map(|d| d.id),
    );
    let obs = circuit.observables();
    let observables = BitRow::from_indices(
        obs.len(),
        obs.iter()
            .enumerate()
            .filter(|(_, recs)| recs.iter().fold(false, |a, &r| a ^ flips[r]))
            .map(|(i, _)| i),
    );
    (detectors, observables)
}

/// Inserts the mechanism's Paulis right after its instruction and propagates
/// them to the end of the circuit. Noise channels in the circuit are ignored.
pub fn propagate_mechanism(circuit: &Circuit, mechanism: &ErrorMechanism) -> Result<Propagation> {
    let n = circuit.num_qubits();
    if mechanism.instruction >= circuit.instructions().len() {
        return Err(Error::InvalidArgument(format!(
            "mechanism location {} is past the end of the circuit",
            mechanism.instruction
        )));
    }
    if let Some((q, _)) = mechanism.paulis.iter().find(|(q, _)| *q as usize >= n) {
        return Err(Error::InvalidArgument(format!("mechanism acts on missing qubit {q}")));
    }
    let mut frame = SingleFrame::new(n);
    let mut flips = Vec::with_capacity(circuit.measurement_count());
    for (idx, inst) in circuit.instructions().iter().enumerate() {
        if !inst.is_noise() {
            frame.step(inst, &mut flips);
        }
        if idx == mechanism.instruction {
            for &(q, p) in &mechanism.paulis {
                frame.apply(q as usize, p);
            }
        }
    }
    let (detectors, observables) = parities(circuit, &flips);
    let mut final_frame = PauliString::identity(n);
    for q in 0..n {
        final_frame.set(q, Pauli::from_bits(frame.xs.get(q), frame.zs.get(q)));
    }
    Ok(Propagation {
        detectors,
        observables,
        final_frame,
    })
}

/// Logical Pauli implemented by a data-qubit error, given the supports of the
/// X and Z logical operators.
pub fn logical_action(frame: &PauliString, logical_x: &[u32], logical_z: &[u32]) -> Pauli {
    let n = frame.num_qubits();
    let lx = PauliString::uniform(n, Pauli::X, logical_x.iter().map(|&q| q as usize));
    let lz = PauliString::uniform(n, Pauli::Z, logical_z.iter().map(|&q| q as usize));
    Pauli::from_bits(!frame.commutes_with(&lz), !frame.commutes_with(&lx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mech(instruction: usize, paulis: Vec<(u32, Pauli)>) -> ErrorMechanism {
        ErrorMechanism {
            probability: 0.1,
            instruction,
            channel: 0,
            paulis,
        }
    }

    #[test]
    fn identity_mechanism_has_empty_signature() {
        let c = Circuit::parse("RESET_Z 0\nTICK\nMEASURE_Z 0\nDETECTOR rec[-1]").unwrap();
        let p = propagate_mechanism(&c, &mech(0, vec![])).unwrap();
        assert!(p.detectors.is_zero());
        assert!(p.final_frame.weight() == 0);
    }

    #[test]
    fn cx_propagation() {
        let c = Circuit::parse(
            "RESET_Z 0 1\nTICK\nCX 0 1\nTICK\nMEASURE_Z 0 1\nDETECTOR rec[-1]\nDETECTOR rec[-2]\nOBSERVABLE(0) rec[-1] rec[-2]",
        )
        .unwrap();
        let p = propagate_mechanism(&c, &mech(0, vec![(0, Pauli::X)])).unwrap();
        assert_eq!(p.detector_list(), vec![0, 1]);
        assert!(p.observables.is_zero());
        let p = propagate_mechanism(&c, &mech(0, vec![(1, Pauli::X)])).unwrap();
        assert_eq!(p.detector_list(), vec![0]);
        assert!(p.observables.get(0));
        assert!(propagate_mechanism(&c, &mech(99, vec![])).is_err());
        assert!(propagate_mechanism(&c, &mech(0, vec![(5, Pauli::X)])).is_err());
    }

    #[test]
    fn logical_action_from_frame() {
        let mut f = PauliString::identity(3);
        f.set(1, Pauli::X);
        assert_eq!(logical_action(&f, &[0, 1], &[1, 2]), Pauli::X);
        f.set(1, Pauli::Y);
        assert_eq!(logical_action(&f, &[0, 1], &[1, 2]), Pauli::Y);
    }
}
