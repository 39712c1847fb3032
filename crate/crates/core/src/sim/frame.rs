//! Bit-parallel Pauli-frame sampler.
//!
//! Shots are processed in blocks of [`BLOCK_SHOTS`]; within a block each qubit
//! keeps one X word and one Z word per 64 shots. Block `b` draws all of its
//! randomness from a ChaCha8 stream selected by `(seed, b)`, so the output
//! does not depend on how blocks are spread across threads. Noise channels are
//! sampled by geometric skipping over the (target, shot) grid, which costs time
//! proportional to the number of errors rather than the number of shots.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::shots::{InjectionBits, ShotBatch, BLOCK_SHOTS};
use super::tableau::{run_symbolic, verify_detectors, PrepMode};
use crate::bits::BitRow;
use crate::circuit::{Basis, Circuit, FlipAxis, InjectionCircuit, Instruction};
use crate::error::{Error, Result};

const W: usize = BLOCK_SHOTS / 64;

/// Expectation of the Pauli `basis` in `U3(theta, phi, 0)|0>`.
pub fn bloch_expectation(theta: f64, phi: f64, basis: Basis) -> f64 {
    match basis {
        Basis::X => theta.sin() * phi.cos(),
        Basis::Y => theta.sin() * phi.sin(),
        Basis::Z => theta.cos(),
    }
}

struct Sampler<'a> {
    circuit: &'a Circuit,
    /// `ln(1 - p)` per instruction for noise channels.
    log_keep: Vec<f64>,
    measurements: usize,
    detectors: Vec<Vec<usize>>,
    observables: Vec<Vec<usize>>,
}

struct BlockOut {
    shots: usize,
    /// Detector-major: `det * W + word`.
    dets: Vec<u64>,
    obs: Vec<u64>,
    /// Reference logical draws for injection runs.
    reference: Option<[u64; W]>,
}

#[inline]
fn geometric(rng: &mut ChaCha8Rng, log_keep: f64) -> usize {
    if log_keep == f64::NEG_INFINITY {
        return 0;
    }
    // u in (0, 1]
    let u: f64 = 1.0 - rng.random::<f64>();
    let k = (u.ln() / log_keep).floor();
    if k >= usize::MAX as f64 {
        usize::MAX
    } else {
        k as usize
    }
}

impl<'a> Sampler<'a> {
    fn new(circuit: &'a Circuit) -> Self {
        let log_keep = circuit
            .instructions()
            .iter()
            .map(|i| match i {
                Instruction::Noise1 { p, .. } | Instruction::Noise2 { p, .. } | Instruction::Flip { p, .. } => {
                    (1.0 - p).ln()
                }
                _ => 0.0,
            })
            .collect();
        Sampler {
            circuit,
            log_keep,
            measurements: circuit.measurement_count(),
            detectors: circuit.detectors().into_iter().map(|d| d.records).collect(),
            observables: circuit.observables(),
        }
    }

    /// Visits every hit of a channel with `count` targets over `shots` shots.
    fn for_hits(
        rng: &mut ChaCha8Rng,
        log_keep: f64,
        count: usize,
        shots: usize,
        mut f: impl FnMut(&mut ChaCha8Rng, usize, usize),
    ) {
        if log_keep == 0.0 {
            return;
        }
        let total = count * shots;
        let mut pos = geometric(rng, log_keep);
        while pos < total {
            f(rng, pos / shots, pos % shots);
            pos = pos.saturating_add(1).saturating_add(geometric(rng, log_keep));
        }
    }

    fn run_block(&self, seed: u64, block: u64, shots: usize, prep: Option<(f64, Basis)>) -> BlockOut {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block);
        let n = self.circuit.num_qubits();
        let mut xs = vec![0u64; n * W];
        let mut zs = vec![0u64; n * W];
        let mut rec = vec![0u64; self.measurements * W];
        let mut next_rec = 0usize;
        let flip = |v: &mut [u64], q: usize, shot: usize| v[q * W + (shot >> 6)] ^= 1u64 << (shot & 63);

        for (idx, inst) in self.circuit.instructions().iter().enumerate() {
            match inst {
                Instruction::ResetZ(t) | Instruction::ResetX(t) => {
                    for &q in t {
                        let q = q as usize;
                        xs[q * W..(q + 1) * W].fill(0);
                        zs[q * W..(q + 1) * W].fill(0);
                    }
                }
                Instruction::PrepArb { qubit, .. } => {
                    let q = *qubit as usize;
                    xs[q * W..(q + 1) * W].fill(0);
                    zs[q * W..(q + 1) * W].fill(0);
                }
                Instruction::H(t) => {
                    for &q in t {
                        let q = q as usize;
                        for w in 0..W {
                            std::mem::swap(&mut xs[q * W + w], &mut zs[q * W + w]);
                        }
                    }
                }
                Instruction::Cx(pairs) => {
                    for &(c, t) in pairs {
                        let (c, t) = (c as usize, t as usize);
                        for w in 0..W {
                            xs[t * W + w] ^= xs[c * W + w];
                            zs[c * W + w] ^= zs[t * W + w];
                        }
                    }
                }
                Instruction::Measure { basis, targets } => {
                    for &q in targets {
                        let q = q as usize;
                        let out = &mut rec[next_rec * W..(next_rec + 1) * W];
                        for w in 0..W {
                            out[w] = match basis {
                                Basis::Z => xs[q * W + w],
                                Basis::X => zs[q * W + w],
                                Basis::Y => xs[q * W + w] ^ zs[q * W + w],
                            };
                        }
                        next_rec += 1;
                    }
                }
                Instruction::Noise1 { targets, .. } => {
                    Self::for_hits(&mut rng, self.log_keep[idx], targets.len(), shots, |rng, i, s| {
                        let q = targets[i] as usize;
                        match rng.random_range(0..3u8) {
                            0 => flip(&mut xs, q, s),
                            1 => {
                                flip(&mut xs, q, s);
                                flip(&mut zs, q, s);
                            }
                            _ => flip(&mut zs, q, s),
                        }
                    });
                }
                Instruction::Noise2 { pairs, .. } => {
                    Self::for_hits(&mut rng, self.log_keep[idx], pairs.len(), shots, |rng, i, s| {
                        let (a, b) = pairs[i];
                        let k = rng.random_range(1..16u8);
                        // 0 = I, 1 = X, 2 = Y, 3 = Z
                        for (q, p) in [(a as usize, k >> 2), (b as usize, k & 3)] {
                            if p == 1 || p == 2 {
                                flip(&mut xs, q, s);
                            }
                            if p == 2 || p == 3 {
                                flip(&mut zs, q, s);
                            }
                        }
                    });
                }
                Instruction::Flip { axis, targets, .. } => {
                    Self::for_hits(&mut rng, self.log_keep[idx], targets.len(), shots, |_, i, s| {
                        let q = targets[i] as usize;
                        match axis {
                            FlipAxis::X => flip(&mut xs, q, s),
                            FlipAxis::Z => flip(&mut zs, q, s),
                        }
                    });
                }
                _ => {}
            }
        }

        let mut mask = [0u64; W];
        for (w, m) in mask.iter_mut().enumerate() {
            let lo = w * 64;
            *m = if shots >= lo + 64 {
                u64::MAX
            } else if shots > lo {
                (1u64 << (shots - lo)) - 1
            } else {
                0
            };
        }
        let parity = |records: &[Vec<usize>]| {
            let mut out = vec![0u64; records.len() * W];
            for (k, recs) in records.iter().enumerate() {
                for &r in recs {
                    for w in 0..W {
                        out[k * W + w] ^= rec[r * W + w];
                    }
                }
                for w in 0..W {
                    out[k * W + w] &= mask[w];
                }
            }
            out
        };
        let dets = parity(&self.detectors);
        let obs = parity(&self.observables);

        let reference = prep.map(|(expectation, _)| {
            let p_minus = (1.0 - expectation) / 2.0;
            let mut words = [0u64; W];
            for s in 0..shots {
                if rng.random::<f64>() < p_minus {
                    words[s >> 6] |= 1u64 << (s & 63);
                }
            }
            words
        });
        BlockOut {
            shots,
            dets,
            obs,
            reference,
        }
    }

    fn sample(&self, shots: usize, seed: u64, prep: Option<(f64, Basis)>) -> ShotBatch {
        let blocks = shots.div_ceil(BLOCK_SHOTS);
        let outs: Vec<BlockOut> = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let n = (shots - b * BLOCK_SHOTS).min(BLOCK_SHOTS);
                self.run_block(seed, b as u64, n, prep)
            })
            .collect();

        let nd = self.detectors.len();
        let no = self.observables.len();
        let mut batch = ShotBatch::zeros(shots, nd, no, seed);
        let mut injection = prep.map(|_| InjectionBits {
            accepted: BitRow::zeros(shots),
            outcomes: BitRow::zeros(shots),
        });
        for (b, out) in outs.iter().enumerate() {
            let base = b * BLOCK_SHOTS;
            for k in 0..nd {
                for w in 0..W {
                    let mut bits = out.dets[k * W + w];
                    while bits != 0 {
                        let s = base + w * 64 + bits.trailing_zeros() as usize;
                        batch.detector_words_mut(s)[k >> 6] |= 1u64 << (k & 63);
                        bits &= bits - 1;
                    }
                }
            }
            for k in 0..no {
                for w in 0..W {
                    let mut bits = out.obs[k * W + w];
                    while bits != 0 {
                        let s = base + w * 64 + bits.trailing_zeros() as usize;
                        batch.observable_words_mut(s)[k >> 6] |= 1u64 << (k & 63);
                        bits &= bits - 1;
                    }
                }
            }
            if let (Some(inj), Some(reference)) = (&mut injection, out.reference) {
                for s in 0..out.shots {
                    let shot = base + s;
                    let r = (reference[s >> 6] >> (s & 63)) & 1 == 1;
                    inj.outcomes.set(shot, r ^ batch.observable(shot, 0));
                    inj.accepted.set(shot, !batch.any_fired(shot));
                }
            }
        }
        batch.injection = injection;
        batch
    }
}

/// Samples detector bits and observable flips (relative to the noiseless
/// value) of a circuit whose detectors and observables are deterministic.
pub fn frame_sample(circuit: &Circuit, shots: usize, seed: u64) -> Result<ShotBatch> {
    verify_detectors(circuit)?;
    let sym = run_symbolic(circuit, PrepMode::Purified)?;
    for recs in circuit.observables() {
        if !sym.parity(&recs).is_deterministic() {
            return Err(Error::Unsupported(
                "observable is not deterministic; use injected sampling".into(),
            ));
        }
    }
    Ok(Sampler::new(circuit).sample(shots, seed, None))
}

/// Samples an injection circuit. The logical outcome of each shot is a draw
/// from the ideal single-qubit distribution of the measured basis, XORed with
/// the logical flip carried by the frame; a shot is accepted when no detector
/// fires.
pub fn injected_frame_sample(inj: &InjectionCircuit, noisy: &Circuit, shots: usize, seed: u64) -> Result<ShotBatch> {
    if noisy.num_observables() != 1
        || !noisy
            .instructions()
            .iter()
            .any(|i| matches!(i, Instruction::PrepArb { .. }))
    {
        return Err(Error::InvalidArgument("not an injection circuit".into()));
    }
    verify_detectors(noisy)?;
    let e = bloch_expectation(inj.theta, inj.phi, inj.basis);
    Ok(Sampler::new(noisy).sample(shots, seed, Some((e, inj.basis))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_and_forced_flips() {
        let c = Circuit::parse("RESET_Z 0 1\nTICK\nCX 0 1\nTICK\nMEASURE_Z 0 1\nDETECTOR rec[-1]\nDETECTOR rec[-2]")
            .unwrap();
        let b = frame_sample(&c, 3000, 1).unwrap();
        assert!((0..3000).all(|s| !b.any_fired(s)));
        let c = Circuit::parse(
            "RESET_Z 0 1\nTICK\nCX 0 1\nTICK\nFLIP_ERROR(1) 1\nMEASURE_Z 0 1\nDETECTOR rec[-1]\nDETECTOR rec[-2]",
        )
        .unwrap();
        let b = frame_sample(&c, 3000, 1).unwrap();
        assert!((0..3000).all(|s| b.fired(s) == vec![0]));
    }

    #[test]
    fn flip_rate_and_determinism() {
        let c = Circuit::parse("RESET_Z 0\nTICK\nFLIP_ERROR(0.1) 0\nMEASURE_Z 0\nDETECTOR rec[-1]").unwrap();
        let b = frame_sample(&c, 100_000, 9).unwrap();
        let fired = (0..b.shots()).filter(|&s| b.any_fired(s)).count() as f64;
        let sigma = (100_000.0f64 * 0.1 * 0.9).sqrt();
        assert!((fired - 10_000.0).abs() < 5.0 * sigma, "{fired}");
        assert_eq!(b, frame_sample(&c, 100_000, 9).unwrap());
        assert_ne!(b, frame_sample(&c, 100_000, 10).unwrap());
    }

    #[test]
    fn depolarizing_split() {
        // X and Y flip a Z measurement: rate 2p/3.
        let c = Circuit::parse("RESET_Z 0\nTICK\nNOISE_1Q(0.3) 0\nMEASURE_Z 0\nDETECTOR rec[-1]").unwrap();
        let b = frame_sample(&c, 60_000, 3).unwrap();
        let rate = (0..b.shots()).filter(|&s| b.any_fired(s)).count() as f64 / 60_000.0;
        assert!((rate - 0.2).abs() < 5.0 * (0.2f64 * 0.8 / 60_000.0).sqrt(), "{rate}");
        // 8 of 15 two-qubit Paulis flip the first qubit's Z measurement.
        let c = Circuit::parse("RESET_Z 0 1\nTICK\nCX 0 1\nNOISE_2Q(0.3) 0 1\nTICK\nMEASURE_Z 0\nDETECTOR rec[-1]")
            .unwrap();
        let b = frame_sample(&c, 60_000, 4).unwrap();
        let rate = (0..b.shots()).filter(|&s| b.any_fired(s)).count() as f64 / 60_000.0;
        let want = 0.3 * 8.0 / 15.0;
        assert!(
            (rate - want).abs() < 5.0 * (want * (1.0 - want) / 60_000.0).sqrt(),
            "{rate}"
        );
    }
}
