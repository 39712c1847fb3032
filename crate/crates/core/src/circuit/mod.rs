//! Circuit instruction set, validation and the text format.

mod build;
mod schedule;
mod text;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeLayout, QubitId};

pub use build::{
    build_injection_circuit, build_memory_circuit, build_subround, build_validation_patch, DetectorKind, DetectorMeta,
    InjectionCircuit, MemoryCircuit,
};

/// Basis of a single-qubit measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    pub fn symbol(self) -> char {
        match self {
            Basis::X => 'X',
            Basis::Y => 'Y',
            Basis::Z => 'Z',
        }
    }

    pub fn parse(s: &str) -> Result<Basis> {
        match s.trim() {
            "X" | "x" => Ok(Basis::X),
            "Y" | "y" => Ok(Basis::Y),
            "Z" | "z" => Ok(Basis::Z),
            other => Err(Error::InvalidArgument(format!("unknown basis `{other}`"))),
        }
    }
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Which Pauli a classical flip channel applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FlipAxis {
    /// Bit flip; corrupts Z-basis preparation and readout.
    X,
    /// Phase flip; corrupts X- and Y-basis readout and X-basis preparation.
    Z,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    ResetZ(Vec<u32>),
    ResetX(Vec<u32>),
    H(Vec<u32>),
    /// Control/target pairs.
    Cx(Vec<(u32, u32)>),
    Measure {
        basis: Basis,
        targets: Vec<u32>,
    },
    /// Prepares `U3(theta, phi, 0)|0>` on one qubit.
    PrepArb {
        qubit: u32,
        theta: f64,
        phi: f64,
    },
    Tick,
    Noise1 {
        p: f64,
        targets: Vec<u32>,
    },
    Noise2 {
        p: f64,
        pairs: Vec<(u32, u32)>,
    },
    Flip {
        axis: FlipAxis,
        p: f64,
        targets: Vec<u32>,
    },
    /// Absolute measurement-record indices.
    Detector {
        expected: bool,
        records: Vec<usize>,
    },
    Observable {
        id: usize,
        records: Vec<usize>,
    },
}

impl Instruction {
    pub fn is_noise(&self) -> bool {
        matches!(
            self,
            Instruction::Noise1 { .. } | Instruction::Noise2 { .. } | Instruction::Flip { .. }
        )
    }

    pub fn is_annotation(&self) -> bool {
        matches!(
            self,
            Instruction::Tick | Instruction::Detector { .. } | Instruction::Observable { .. }
        )
    }

    /// Qubits touched by a gate, reset, measurement or preparation.
    pub fn operated_qubits(&self) -> Vec<u32> {
        match self {
            Instruction::ResetZ(t) | Instruction::ResetX(t) | Instruction::H(t) => t.clone(),
            Instruction::Measure { targets, .. } => targets.clone(),
            Instruction::Cx(pairs) => pairs.iter().flat_map(|&(a, b)| [a, b]).collect(),
            Instruction::PrepArb { qubit, .. } => vec![*qubit],
            _ => Vec::new(),
        }
    }

    fn all_qubits(&self) -> Vec<u32> {
        match self {
            Instruction::Noise1 { targets, .. } | Instruction::Flip { targets, .. } => targets.clone(),
            Instruction::Noise2 { pairs, .. } => pairs.iter().flat_map(|&(a, b)| [a, b]).collect(),
            other => other.operated_qubits(),
        }
    }
}

/// Ordered instruction list over `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Circuit {
    num_qubits: usize,
    instructions: Vec<Instruction>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetectorDef {
    pub id: usize,
    pub records: Vec<usize>,
    pub expected: bool,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            instructions: Vec::new(),
        }
    }

    pub fn from_instructions(num_qubits: usize, instructions: Vec<Instruction>) -> Result<Self> {
        let c = Circuit {
            num_qubits,
            instructions,
        };
        c.validate(None)?;
        Ok(c)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn push(&mut self, inst: Instruction) {
        for q in inst.all_qubits() {
            self.num_qubits = self.num_qubits.max(q as usize + 1);
        }
        self.instructions.push(inst);
    }

    pub fn measurement_count(&self) -> usize {
        self.instructions
            .iter()
            .map(|i| match i {
                Instruction::Measure { targets, .. } => targets.len(),
                _ => 0,
            })
            .sum()
    }

    pub fn detectors(&self) -> Vec<DetectorDef> {
        self.instructions
            .iter()
            .filter_map(|i| match i {
                Instruction::Detector { expected, records } => Some((records, *expected)),
                _ => None,
            })
            .enumerate()
            .map(|(id, (records, expected))| DetectorDef {
                id,
                records: records.clone(),
                expected,
            })
            .collect()
    }

    pub fn num_detectors(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| matches!(i, Instruction::Detector { .. }))
            .count()
    }

    /// Record lists per observable id.
    pub fn observables(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for i in &self.instructions {
            if let Instruction::Observable { id, records } = i {
                if out.len() <= *id {
                    out.resize(id + 1, Vec::new());
                }
                // Repeated declarations accumulate by parity.
                for &r in records {
                    if let Some(pos) = out[*id].iter().position(|&x| x == r) {
                        out[*id].remove(pos);
                    } else {
                        out[*id].push(r);
                    }
                }
            }
        }
        out
    }

    pub fn num_observables(&self) -> usize {
        self.observables().len()
    }

    pub fn has_noise(&self) -> bool {
        self.instructions.iter().any(Instruction::is_noise)
    }

    /// Same circuit with all noise channels removed.
    pub fn without_noise(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            instructions: self.instructions.iter().filter(|i| !i.is_noise()).cloned().collect(),
        }
    }

    /// Same circuit with detectors and observables removed.
    pub fn without_annotations(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            instructions: self
                .instructions
                .iter()
                .filter(|i| !matches!(i, Instruction::Detector { .. } | Instruction::Observable { .. }))
                .cloned()
                .collect(),
        }
    }

    /// Groups of instruction indices separated by `TICK`.
    pub fn layers(&self) -> Vec<Vec<usize>> {
        let mut layers = vec![Vec::new()];
        for (i, inst) in self.instructions.iter().enumerate() {
            if matches!(inst, Instruction::Tick) {
                layers.push(Vec::new());
            } else {
                layers.last_mut().unwrap().push(i);
            }
        }
        layers
    }

    /// Structural checks. With a layout, two-qubit gates must follow its edges.
    pub fn validate(&self, layout: Option<&LatticeLayout>) -> Result<()> {
        let mut measured = 0usize;
        let mut prep_count = 0usize;
        let mut in_layer: HashSet<u32> = HashSet::new();
        for (idx, inst) in self.instructions.iter().enumerate() {
            let here = |msg: String| Error::Validation(format!("instruction {idx}: {msg}"));
            for q in inst.all_qubits() {
                if q as usize >= self.num_qubits {
                    return Err(here(format!("qubit {q} out of range")));
                }
            }
            let check_p = |p: f64| {
                if (0.0..=1.0).contains(&p) {
                    Ok(())
                } else {
                    Err(here(format!("probability {p} outside [0, 1]")))
                }
            };
            match inst {
                Instruction::Tick => in_layer.clear(),
                Instruction::Cx(pairs) | Instruction::Noise2 { pairs, .. } => {
                    if let Instruction::Noise2 { p, .. } = inst {
                        check_p(*p)?;
                    }
                    for &(a, b) in pairs {
                        if a == b {
                            return Err(here(format!("two-qubit operation on {a} with itself")));
                        }
                        if let (Some(l), Instruction::Cx(_)) = (layout, inst) {
                            if !l.has_edge(QubitId(a as usize), QubitId(b as usize)) {
                                return Err(here(format!("CX {a} {b} is not a lattice edge")));
                            }
                        }
                    }
                }
                Instruction::Noise1 { p, .. } | Instruction::Flip { p, .. } => check_p(*p)?,
                Instruction::PrepArb { theta, phi, .. } => {
                    prep_count += 1;
                    if prep_count > 1 {
                        return Err(here("more than one PREP_ARB".into()));
                    }
                    if !theta.is_finite() || !phi.is_finite() {
                        return Err(here("non-finite PREP_ARB angle".into()));
                    }
                }
                Instruction::Measure { targets, .. } => measured += targets.len(),
                Instruction::Detector { records, .. } | Instruction::Observable { records, .. } => {
                    if let Some(&r) = records.iter().find(|&&r| r >= measured) {
                        return Err(here(format!("record {r} does not exist yet")));
                    }
                }
                _ => {}
            }
            if !inst.is_noise() {
                for q in inst.operated_qubits() {
                    if !in_layer.insert(q) {
                        return Err(here(format!("qubit {q} used twice in one layer")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        text::serialize(self)
    }

    pub fn parse(src: &str) -> Result<Circuit> {
        text::parse(src)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_layout, CodeDistance};

    #[test]
    fn layer_discipline_is_enforced() {
        let c = Circuit::from_instructions(2, vec![Instruction::H(vec![0]), Instruction::Cx(vec![(0, 1)])]);
        assert!(matches!(c, Err(Error::Validation(_))));
        let c = Circuit::from_instructions(
            2,
            vec![
                Instruction::H(vec![0]),
                Instruction::Tick,
                Instruction::Cx(vec![(0, 1)]),
            ],
        );
        assert!(c.is_ok());
    }

    #[test]
    fn records_must_exist() {
        let c = Circuit::from_instructions(
            1,
            vec![Instruction::Detector {
                expected: false,
                records: vec![0],
            }],
        );
        assert!(c.is_err());
    }

    #[test]
    fn cx_off_lattice_is_rejected() {
        let l = build_layout(CodeDistance::new(3).unwrap());
        let c = Circuit::parse("QUBITS 25\nCX 0 2\n").unwrap();
        assert!(!l.has_edge(QubitId(0), QubitId(2)));
        assert!(matches!(c.validate(Some(&l)), Err(Error::Validation(_))));
    }
}
