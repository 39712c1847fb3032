//! Circuit-level Pauli noise.

use serde::{Deserialize, Serialize};

use crate::circuit::{Basis, Circuit, FlipAxis, Instruction};
use crate::error::{Error, Result};
use crate::pauli::Pauli;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Single-qubit depolarizing after every 1q gate and preparation.
    pub p1: f64,
    /// Two-qubit depolarizing after every CX.
    pub p2: f64,
    /// Classical flip before measurement and after reset.
    pub p_spam: f64,
    /// Single-qubit depolarizing on idling qubits, per layer.
    pub p_idle: f64,
}

impl NoiseModel {
    pub fn uniform(p: f64) -> Self {
        NoiseModel {
            p1: p,
            p2: p,
            p_spam: p,
            p_idle: p,
        }
    }

    pub fn noiseless() -> Self {
        Self::uniform(0.0)
    }

    /// Readout and two-qubit error rates of the reference device, with the
    /// single-qubit and idle rates set to a tenth of the two-qubit rate.
    pub fn calibrated_preset() -> Self {
        let p2 = 2.9e-3;
        NoiseModel {
            p1: p2 / 10.0,
            p2,
            p_spam: 1.6e-2,
            p_idle: p2 / 10.0,
        }
    }

    /// Every rate multiplied by `factor` (clamped to 1).
    pub fn scaled(&self, factor: f64) -> Self {
        let s = |p: f64| (p * factor).min(1.0);
        NoiseModel {
            p1: s(self.p1),
            p2: s(self.p2),
            p_spam: s(self.p_spam),
            p_idle: s(self.p_idle),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p1", self.p1),
            ("p2", self.p2),
            ("p_spam", self.p_spam),
            ("p_idle", self.p_idle),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: NoiseModel = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("noise model serializes")
    }
}

/// Qubits holding live state in each layer but not operated on there.
fn idle_qubits(circuit: &Circuit) -> Vec<Vec<u32>> {
    let layers = circuit.layers();
    let n = circuit.num_qubits();
    // For every qubit, (layer, starts a fresh state) of each operation.
    let mut touches: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n];
    for (li, layer) in layers.iter().enumerate() {
        for &i in layer {
            let inst = &circuit.instructions()[i];
            let fresh = matches!(
                inst,
                Instruction::ResetZ(_) | Instruction::ResetX(_) | Instruction::PrepArb { .. }
            );
            for q in inst.operated_qubits() {
                touches[q as usize].push((li, fresh));
            }
        }
    }
    let mut idle = vec![Vec::new(); layers.len()];
    for (q, t) in touches.iter().enumerate() {
        for w in t.windows(2) {
            let ((a, _), (b, fresh)) = (w[0], w[1]);
            if !fresh {
                for slot in idle.iter_mut().take(b).skip(a + 1) {
                    slot.push(q as u32);
                }
            }
        }
    }
    idle
}

/// Inserts the noise channels of `model` into a noiseless circuit.
///
/// Idle noise acts on a qubit in a layer when it carries state from an earlier
/// operation into a later one that is not a reset; qubits waiting for a reset
/// or not yet initialized are not considered idle.
pub fn apply_noise(circuit: &Circuit, model: &NoiseModel) -> Result<Circuit> {
    model.validate()?;
    if circuit.has_noise() {
        return Err(Error::InvalidArgument("circuit already contains noise".into()));
    }
    let idle = idle_qubits(circuit);
    let mut out = Circuit::new(circuit.num_qubits());
    let mut layer = 0usize;
    let flush_idle = |out: &mut Circuit, layer: usize| {
        if model.p_idle > 0.0 && !idle[layer].is_empty() {
            out.push(Instruction::Noise1 {
                p: model.p_idle,
                targets: idle[layer].clone(),
            });
        }
    };
    for inst in circuit.instructions() {
        match inst {
            Instruction::Tick => {
                flush_idle(&mut out, layer);
                layer += 1;
                out.push(Instruction::Tick);
                continue;
            }
            Instruction::Measure { basis, targets } if model.p_spam > 0.0 => {
                out.push(Instruction::Flip {
                    axis: if *basis == Basis::Z { FlipAxis::X } else { FlipAxis::Z },
                    p: model.p_spam,
                    targets: targets.clone(),
                });
            }
            Instruction::Detector { .. } | Instruction::Observable { .. } => {
                // Annotations trail the last layer; idle noise goes first.
                if layer == idle.len() - 1 {
                    flush_idle(&mut out, layer);
                    layer += 1;
                }
            }
            _ => {}
        }
        out.push(inst.clone());
        match inst {
            Instruction::ResetZ(t) | Instruction::ResetX(t) if model.p_spam > 0.0 => {
                out.push(Instruction::Flip {
                    axis: if matches!(inst, Instruction::ResetZ(_)) {
                        FlipAxis::X
                    } else {
                        FlipAxis::Z
                    },
                    p: model.p_spam,
                    targets: t.clone(),
                });
            }
            Instruction::H(t) if model.p1 > 0.0 => out.push(Instruction::Noise1 {
                p: model.p1,
                targets: t.clone(),
            }),
            Instruction::PrepArb { qubit, .. } if model.p1 > 0.0 => out.push(Instruction::Noise1 {
                p: model.p1,
                targets: vec![*qubit],
            }),
            Instruction::Cx(pairs) if model.p2 > 0.0 => out.push(Instruction::Noise2 {
                p: model.p2,
                pairs: pairs.clone(),
            }),
            _ => {}
        }
    }
    if layer < idle.len() {
        flush_idle(&mut out, layer);
    }
    Ok(out)
}

/// One alternative of a noise channel: a Pauli product applied right after
/// instruction `instruction`.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorMechanism {
    pub probability: f64,
    pub instruction: usize,
    /// Index of the channel within the instruction (target or pair index).
    pub channel: usize,
    pub paulis: Vec<(u32, Pauli)>,
}

impl ErrorMechanism {
    pub fn describe(&self) -> String {
        let terms: Vec<String> = self
            .paulis
            .iter()
            .map(|(q, p)| format!("{}{}", p.symbol(), q))
            .collect();
        format!("instruction {} [{}]", self.instruction, terms.join(" "))
    }
}

/// All Pauli alternatives of every noise channel, in circuit order.
pub fn enumerate_mechanisms(circuit: &Circuit) -> Vec<ErrorMechanism> {
    let mut out = Vec::new();
    for (idx, inst) in circuit.instructions().iter().enumerate() {
        match inst {
            Instruction::Noise1 { p, targets } if *p > 0.0 => {
                for (ch, &q) in targets.iter().enumerate() {
                    for pauli in Pauli::NON_IDENTITY {
                        out.push(ErrorMechanism {
                            probability: p / 3.0,
                            instruction: idx,
                            channel: ch,
                            paulis: vec![(q, pauli)],
                        });
                    }
                }
            }
            Instruction::Noise2 { p, pairs } if *p > 0.0 => {
                for (ch, &(a, b)) in pairs.iter().enumerate() {
                    for pa in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
                        for pb in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
                            if pa == Pauli::I && pb == Pauli::I {
                                continue;
                            }
                            let paulis = [(a, pa), (b, pb)].into_iter().filter(|(_, p)| *p != Pauli::I).collect();
                            out.push(ErrorMechanism {
                                probability: p / 15.0,
                                instruction: idx,
                                channel: ch,
                                paulis,
                            });
                        }
                    }
                }
            }
            Instruction::Flip { axis, p, targets } if *p > 0.0 => {
                let pauli = match axis {
                    FlipAxis::X => Pauli::X,
                    FlipAxis::Z => Pauli::Z,
                };
                for (ch, &q) in targets.iter().enumerate() {
                    out.push(ErrorMechanism {
                        probability: *p,
                        instruction: idx,
                        channel: ch,
                        paulis: vec![(q, pauli)],
                    });
                }
            }
            _ => {}
        }
    }
    out
}
