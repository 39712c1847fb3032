//! Cross-checks of the frame sampler against the dense simulators on small
//! injection circuits.

use std::collections::BTreeMap;

use super::dense::{dense_mixed_run, dense_run, record_parities};
use super::frame::injected_frame_sample;
use super::shots::ShotBatch;
use crate::circuit::{Circuit, FlipAxis, InjectionCircuit, Instruction};
use crate::error::{Error, Result};
use crate::noise::{enumerate_mechanisms, ErrorMechanism};
use crate::pauli::Pauli;

/// Fired detectors and whether the logical outcome is the -1 eigenvalue.
pub type OutcomeKey = (Vec<usize>, bool);

const PROB_TOL: f64 = 1e-10;

/// Copy of `noisy` with all noise removed and `mechanism` inserted as
/// certain flips right after its instruction.
pub fn force_mechanism(noisy: &Circuit, mechanism: &ErrorMechanism) -> Result<Circuit> {
    let mut out = Vec::with_capacity(noisy.instructions().len() + 2);
    for (idx, inst) in noisy.instructions().iter().enumerate() {
        if !inst.is_noise() {
            out.push(inst.clone());
        }
        if idx == mechanism.instruction {
            for &(q, p) in &mechanism.paulis {
                let (x, z) = p.bits();
                for (on, axis) in [(x, FlipAxis::X), (z, FlipAxis::Z)] {
                    if on {
                        out.push(Instruction::Flip {
                            axis,
                            p: 1.0,
                            targets: vec![q],
                        });
                    }
                }
            }
        }
    }
    Circuit::from_instructions(noisy.num_qubits(), out)
}

/// Detector set and logical flip of a forced mechanism, as seen by the
/// frame sampler. Every shot must agree.
fn frame_signature(inj: &InjectionCircuit, forced: &Circuit, shots: usize, seed: u64) -> Result<(Vec<usize>, bool)> {
    let b = injected_frame_sample(inj, forced, shots, seed)?;
    let first = (b.fired(0), b.observable(0, 0));
    for s in 1..b.shots() {
        if (b.fired(s), b.observable(s, 0)) != first {
            return Err(Error::Validation(
                "forced mechanism gave shot-dependent signature".into(),
            ));
        }
    }
    Ok(first)
}

/// Fired detectors (relative to their noiseless values) and the probability
/// of a -1 logical outcome, from the exact pure-state simulation.
fn dense_signature(noisy: &Circuit, forced: Option<&[ErrorMechanism]>) -> Result<(Vec<usize>, f64)> {
    let dist = dense_run::<f64>(noisy, forced)?;
    let dets = noisy.detectors();
    let nd = dets.len();
    let mut fired: Option<Vec<usize>> = None;
    let mut p_minus = 0.0;
    for (records, p) in &dist {
        if *p < PROB_TOL {
            continue;
        }
        let par = record_parities(noisy, records);
        let f: Vec<usize> = dets
            .iter()
            .filter(|d| par.get(d.id) != d.expected)
            .map(|d| d.id)
            .collect();
        match &fired {
            None => fired = Some(f),
            Some(prev) if *prev != f => return Err(Error::Validation("dense detectors are not deterministic".into())),
            _ => {}
        }
        if par.get(nd) {
            p_minus += p;
        }
    }
    Ok((fired.unwrap_or_default(), p_minus))
}

#[derive(Clone, Debug, Default)]
pub struct SingleMechanismReport {
    pub checked: usize,
    /// Descriptions of mechanisms where the two simulators disagree.
    pub mismatches: Vec<String>,
}

/// For every single mechanism of `noisy`, compares the frame sampler's
/// detector signature and logical flip with the dense oracle's. The injected
/// state must have a nonzero expectation in the measured basis, otherwise a
/// logical flip is invisible to the oracle.
pub fn compare_single_mechanisms(
    inj: &InjectionCircuit,
    noisy: &Circuit,
    shots: usize,
    seed: u64,
) -> Result<SingleMechanismReport> {
    let (base_dets, p0) = dense_signature(noisy, Some(&[]))?;
    if !base_dets.is_empty() {
        return Err(Error::Validation("noiseless circuit fires detectors".into()));
    }
    if (p0 - 0.5).abs() < 1e-6 {
        return Err(Error::InvalidArgument(
            "logical expectation is zero; flips are unobservable".into(),
        ));
    }
    let mut report = SingleMechanismReport::default();
    for m in enumerate_mechanisms(noisy) {
        let forced = force_mechanism(noisy, &m)?;
        let frame = frame_signature(inj, &forced, shots, seed)?;
        let (dets, p) = dense_signature(noisy, Some(std::slice::from_ref(&m)))?;
        let flip = if (p - p0).abs() < PROB_TOL {
            Some(false)
        } else if (p - (1.0 - p0)).abs() < PROB_TOL {
            Some(true)
        } else {
            None
        };
        report.checked += 1;
        if Some(frame.1) != flip || frame.0 != dets {
            report.mismatches.push(format!(
                "{}: frame {:?}, dense ({dets:?}, P(-1) = {p} vs {p0})",
                m.describe(),
                frame
            ));
        }
    }
    Ok(report)
}

/// Exact distribution of (fired detectors, logical outcome) from the mixed
/// dense simulation.
pub fn dense_outcome_distribution(noisy: &Circuit) -> Result<BTreeMap<OutcomeKey, f64>> {
    let dets = noisy.detectors();
    let nd = dets.len();
    let mut out = BTreeMap::new();
    for (key, p) in dense_mixed_run::<f64>(noisy)? {
        let fired: Vec<usize> = dets
            .iter()
            .filter(|d| key.get(d.id) != d.expected)
            .map(|d| d.id)
            .collect();
        *out.entry((fired, key.get(nd))).or_insert(0.0) += p;
    }
    Ok(out)
}

/// Histogram of (fired detectors, logical outcome) of an injected batch.
pub fn outcome_histogram(batch: &ShotBatch) -> Result<BTreeMap<OutcomeKey, u64>> {
    let inj = batch
        .injection
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("batch has no injection outcomes".into()))?;
    let mut out = BTreeMap::new();
    for s in 0..batch.shots() {
        *out.entry((batch.fired(s), inj.outcomes.get(s))).or_insert(0) += 1;
    }
    Ok(out)
}

/// Pearson statistic and degrees of freedom. Cells with expected count below
/// `min_expected` are pooled into one cell; observed keys missing from
/// `expected` go into the pool too.
pub fn chi_square(
    observed: &BTreeMap<OutcomeKey, u64>,
    expected: &BTreeMap<OutcomeKey, f64>,
    min_expected: f64,
) -> (f64, usize) {
    let n: u64 = observed.values().sum();
    let n = n as f64;
    let mut stat = 0.0;
    let mut cells = 0usize;
    let (mut pool_obs, mut pool_exp) = (0.0, 0.0);
    for (k, &p) in expected {
        let e = p * n;
        let o = *observed.get(k).unwrap_or(&0) as f64;
        if e >= min_expected {
            stat += (o - e).powi(2) / e;
            cells += 1;
        } else {
            pool_obs += o;
            pool_exp += e;
        }
    }
    pool_obs += observed
        .iter()
        .filter(|(k, _)| !expected.contains_key(*k))
        .map(|(_, &o)| o as f64)
        .sum::<f64>();
    if pool_exp > 0.0 {
        stat += (pool_obs - pool_exp).powi(2) / pool_exp;
        cells += 1;
    } else if pool_obs > 0.0 {
        stat = f64::INFINITY;
    }
    (stat, cells.saturating_sub(1))
}

/// Applies a Pauli to the frame of a mechanism-free circuit: convenience for
/// building forced single-qubit errors in tests.
pub fn single_pauli(instruction: usize, qubit: u32, pauli: Pauli) -> ErrorMechanism {
    ErrorMechanism {
        probability: 1.0,
        instruction,
        channel: 0,
        paulis: vec![(qubit, pauli)],
    }
}
