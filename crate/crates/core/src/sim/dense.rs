//! Dense reference simulation for small circuits.
//!
//! Two engines share the circuit semantics of the frame sampler:
//!
//! * [`dense_run`]: state vectors (up to 14 qubits) branching on every
//!   measurement, reset and noise alternative. Returns the exact distribution
//!   of measurement records. Noise channels expand into branches, so this is
//!   meant for noiseless circuits or a handful of forced mechanisms.
//! * [`dense_mixed_run`]: density matrices (up to 8 qubits). Branches are keyed
//!   by the running parities of the detectors and observables rather than the
//!   full record, and branches with equal keys are added together, which keeps
//!   exact noisy simulation cheap.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::Float;

use crate::bits::BitRow;
use crate::circuit::{Basis, Circuit, FlipAxis, Instruction};
use crate::error::{Error, Result};
use crate::noise::ErrorMechanism;
use crate::pauli::{Pauli, PauliString};

pub const PURE_QUBIT_LIMIT: usize = 14;
pub const MIXED_QUBIT_LIMIT: usize = 8;
const BRANCH_LIMIT: usize = 1 << 16;

type C<T> = Complex<T>;

fn c<T: Float>(re: f64, im: f64) -> C<T> {
    Complex::new(T::from(re).unwrap(), T::from(im).unwrap())
}

/// Single-qubit unitary `[[a, b], [c, d]]`.
pub type Mat2<T> = [[C<T>; 2]; 2];

/// `U3(theta, phi, lambda = 0)`.
pub fn u3<T: Float>(theta: f64, phi: f64) -> Mat2<T> {
    let (s, co) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    let e = c::<T>(phi.cos(), phi.sin());
    [[c(co, 0.0), c(-s, 0.0)], [e * c(s, 0.0), e * c(co, 0.0)]]
}

pub fn hadamard<T: Float>() -> Mat2<T> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]
}

fn s_dag<T: Float>() -> Mat2<T> {
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, -1.0)]]
}

fn s_gate<T: Float>() -> Mat2<T> {
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]]
}

fn pauli_mat<T: Float>(p: Pauli) -> Mat2<T> {
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    match p {
        Pauli::I => [[o, z], [z, o]],
        Pauli::X => [[z, o], [o, z]],
        Pauli::Y => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
        Pauli::Z => [[o, z], [z, -o]],
    }
}

/// Rotation taking the `basis` eigenbasis to the computational basis.
fn to_z_basis<T: Float>(basis: Basis) -> Option<Vec<Mat2<T>>> {
    match basis {
        Basis::Z => None,
        Basis::X => Some(vec![hadamard()]),
        Basis::Y => Some(vec![s_dag(), hadamard()]),
    }
}

fn from_z_basis<T: Float>(basis: Basis) -> Option<Vec<Mat2<T>>> {
    match basis {
        Basis::Z => None,
        Basis::X => Some(vec![hadamard()]),
        Basis::Y => Some(vec![hadamard(), s_gate()]),
    }
}

/// Pure state over `n` qubits; qubit `q` is bit `q` of the basis index.
#[derive(Clone, Debug)]
pub struct StateVector<T> {
    n: usize,
    amps: Vec<C<T>>,
}

impl<T: Float> StateVector<T> {
    pub fn zero(n: usize) -> Result<Self> {
        if n > PURE_QUBIT_LIMIT {
            return Err(Error::TooManyQubits {
                needed: n,
                limit: PURE_QUBIT_LIMIT,
            });
        }
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        amps[0] = c(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().fold(T::zero(), |a, x| a + x.norm_sqr())
    }

    pub fn apply1(&mut self, q: usize, m: &Mat2<T>) {
        let bit = 1 << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    pub fn h(&mut self, q: usize) {
        self.apply1(q, &hadamard());
    }

    pub fn s(&mut self, q: usize) {
        self.apply1(q, &s_gate());
    }

    pub fn pauli(&mut self, q: usize, p: Pauli) {
        if p != Pauli::I {
            self.apply1(q, &pauli_mat(p));
        }
    }

    pub fn cx(&mut self, control: usize, target: usize) {
        let (cb, tb) = (1 << control, 1 << target);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    /// Unnormalized projection onto `q = value` in the computational basis.
    fn project(&mut self, q: usize, value: bool) {
        let bit = 1 << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & bit != 0) != value {
                *a = c(0.0, 0.0);
            }
        }
    }

    /// `<psi|P|psi>` for a Hermitian Pauli string (real part).
    pub fn expectation(&self, p: &PauliString) -> T {
        let mut other = self.clone();
        for q in 0..self.n {
            other.pauli(q, p.get(q));
        }
        let mut acc = c::<T>(0.0, 0.0);
        for (a, b) in self.amps.iter().zip(&other.amps) {
            acc = acc + a.conj() * b;
        }
        let sign = match p.phase() & 3 {
            0 => c(1.0, 0.0),
            1 => c(0.0, 1.0),
            2 => c(-1.0, 0.0),
            _ => c(0.0, -1.0),
        };
        (acc * sign).re
    }
}

/// Checks that a forced mechanism list refers to real locations.
fn check_forced(circuit: &Circuit, forced: &[ErrorMechanism]) -> Result<()> {
    for m in forced {
        if m.instruction >= circuit.instructions().len() {
            return Err(Error::InvalidArgument(format!(
                "{} is past the end of the circuit",
                m.describe()
            )));
        }
        if m.paulis.iter().any(|(q, _)| *q as usize >= circuit.num_qubits()) {
            return Err(Error::InvalidArgument(format!(
                "{} acts on a missing qubit",
                m.describe()
            )));
        }
    }
    Ok(())
}

/// Pauli alternatives of a noise instruction: (probability, [(qubit, pauli)]).
fn channel_alternatives(inst: &Instruction) -> Vec<Vec<(f64, Vec<(u32, Pauli)>)>> {
    let paulis = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    match inst {
        Instruction::Noise1 { p, targets } => targets
            .iter()
            .map(|&q| {
                let mut alts = vec![(1.0 - p, vec![])];
                for pa in Pauli::NON_IDENTITY {
                    alts.push((p / 3.0, vec![(q, pa)]));
                }
                alts
            })
            .collect(),
        Instruction::Noise2 { p, pairs } => pairs
            .iter()
            .map(|&(a, b)| {
                let mut alts = vec![(1.0 - p, vec![])];
                for pa in paulis {
                    for pb in paulis {
                        if pa == Pauli::I && pb == Pauli::I {
                            continue;
                        }
                        alts.push((p / 15.0, vec![(a, pa), (b, pb)]));
                    }
                }
                alts
            })
            .collect(),
        Instruction::Flip { axis, p, targets } => {
            let pa = match axis {
                FlipAxis::X => Pauli::X,
                FlipAxis::Z => Pauli::Z,
            };
            targets
                .iter()
                .map(|&q| vec![(1.0 - p, vec![]), (*p, vec![(q, pa)])])
                .collect()
        }
        _ => Vec::new(),
    }
}

struct Branch<T> {
    weight: T,
    state: StateVector<T>,
    records: Vec<bool>,
}

fn split_branches<T: Float>(branches: Vec<Branch<T>>, q: usize) -> Vec<(Branch<T>, bool)> {
    let mut out = Vec::with_capacity(branches.len() * 2);
    let eps = T::from(1e-14).unwrap();
    for b in branches {
        for value in [false, true] {
            let mut s = b.state.clone();
            s.project(q, value);
            let p = s.norm_sqr();
            if p > eps {
                let scale = T::one() / p.sqrt();
                for a in &mut s.amps {
                    *a = *a * scale;
                }
                out.push((
                    Branch {
                        weight: b.weight * p,
                        state: s,
                        records: b.records.clone(),
                    },
                    value,
                ));
            }
        }
    }
    out
}

/// Exact distribution of measurement records of a circuit with at most 14
/// qubits. With `forced`, noise instructions are skipped and the given
/// mechanisms are applied right after their instructions; without it, every
/// noise channel is expanded exactly.
pub fn dense_run<T: Float>(circuit: &Circuit, forced: Option<&[ErrorMechanism]>) -> Result<BTreeMap<BitRow, T>> {
    let n = circuit.num_qubits();
    if let Some(f) = forced {
        check_forced(circuit, f)?;
    }
    let mut branches = vec![Branch {
        weight: T::one(),
        state: StateVector::zero(n)?,
        records: Vec::with_capacity(circuit.measurement_count()),
    }];
    for (idx, inst) in circuit.instructions().iter().enumerate() {
        match inst {
            Instruction::ResetZ(t) | Instruction::ResetX(t) => {
                for &q in t {
                    let q = q as usize;
                    branches = split_branches(branches, q)
                        .into_iter()
                        .map(|(mut b, v)| {
                            if v {
                                b.state.pauli(q, Pauli::X);
                            }
                            b
                        })
                        .collect();
                    if matches!(inst, Instruction::ResetX(_)) {
                        for b in &mut branches {
                            b.state.h(q);
                        }
                    }
                }
            }
            Instruction::PrepArb { qubit, theta, phi } => {
                let q = *qubit as usize;
                branches = split_branches(branches, q)
                    .into_iter()
                    .map(|(mut b, v)| {
                        if v {
                            b.state.pauli(q, Pauli::X);
                        }
                        b.state.apply1(q, &u3(*theta, *phi));
                        b
                    })
                    .collect();
            }
            Instruction::H(t) => {
                for b in &mut branches {
                    for &q in t {
                        b.state.h(q as usize);
                    }
                }
            }
            Instruction::Cx(pairs) => {
                for b in &mut branches {
                    for &(ctl, tgt) in pairs {
                        b.state.cx(ctl as usize, tgt as usize);
                    }
                }
            }
            Instruction::Measure { basis, targets } => {
                for &q in targets {
                    let q = q as usize;
                    if let Some(ms) = to_z_basis::<T>(*basis) {
                        for b in &mut branches {
                            for m in &ms {
                                b.state.apply1(q, m);
                            }
                        }
                    }
                    branches = split_branches(branches, q)
                        .into_iter()
                        .map(|(mut b, v)| {
                            b.records.push(v);
                            b
                        })
                        .collect();
                    if let Some(ms) = from_z_basis::<T>(*basis) {
                        for b in &mut branches {
                            for m in &ms {
                                b.state.apply1(q, m);
                            }
                        }
                    }
                }
            }
            Instruction::Noise1 { .. } | Instruction::Noise2 { .. } | Instruction::Flip { .. } if forced.is_none() => {
                for alts in channel_alternatives(inst) {
                    let mut next = Vec::with_capacity(branches.len() * alts.len());
                    for b in &branches {
                        for (p, paulis) in &alts {
                            if *p <= 0.0 {
                                continue;
                            }
                            let mut s = b.state.clone();
                            for &(q, pa) in paulis {
                                s.pauli(q as usize, pa);
                            }
                            next.push(Branch {
                                weight: b.weight * T::from(*p).unwrap(),
                                state: s,
                                records: b.records.clone(),
                            });
                        }
                    }
                    branches = next;
                    if branches.len() > BRANCH_LIMIT {
                        return Err(Error::TooLarge {
                            what: "dense branches",
                            count: branches.len(),
                            limit: BRANCH_LIMIT,
                        });
                    }
                }
            }
            _ => {}
        }
        if let Some(f) = forced {
            for m in f.iter().filter(|m| m.instruction == idx) {
                for b in &mut branches {
                    for &(q, p) in &m.paulis {
                        b.state.pauli(q as usize, p);
                    }
                }
            }
        }
        if branches.len() > BRANCH_LIMIT {
            return Err(Error::TooLarge {
                what: "dense branches",
                count: branches.len(),
                limit: BRANCH_LIMIT,
            });
        }
    }
    let mut dist: BTreeMap<BitRow, T> = BTreeMap::new();
    for b in branches {
        let row = BitRow::from_indices(
            b.records.len(),
            b.records.iter().enumerate().filter(|(_, &v)| v).map(|(i, _)| i),
        );
        let e = dist.entry(row).or_insert(T::zero());
        *e = *e + b.weight;
    }
    Ok(dist)
}

/// Detector and observable parities of one record assignment, as a row with
/// the detectors first.
pub fn record_parities(circuit: &Circuit, records: &BitRow) -> BitRow {
    let dets = circuit.detectors();
    let obs = circuit.observables();
    let nd = dets.len();
    let mut out = BitRow::zeros(nd + obs.len());
    for d in &dets {
        if d.records.iter().fold(false, |a, &r| a ^ records.get(r)) {
            out.set(d.id, true);
        }
    }
    for (k, recs) in obs.iter().enumerate() {
        if recs.iter().fold(false, |a, &r| a ^ records.get(r)) {
            out.set(nd + k, true);
        }
    }
    out
}

/// Density matrix over `n` qubits, row-major, not necessarily normalized.
#[derive(Clone, Debug)]
struct Rho<T> {
    dim: usize,
    m: Vec<C<T>>,
}

impl<T: Float> Rho<T> {
    fn zero_state(n: usize) -> Self {
        let dim = 1 << n;
        let mut m = vec![c(0.0, 0.0); dim * dim];
        m[0] = c(1.0, 0.0);
        Rho { dim, m }
    }

    fn trace(&self) -> T {
        (0..self.dim).fold(T::zero(), |a, i| a + self.m[i * self.dim + i].re)
    }

    fn add(&mut self, other: &Rho<T>) {
        for (a, b) in self.m.iter_mut().zip(&other.m) {
            *a = *a + *b;
        }
    }

    fn scale(&mut self, s: T) {
        for a in &mut self.m {
            *a = *a * s;
        }
    }

    /// `U rho U^dagger` for a single-qubit `U`.
    fn apply1(&mut self, q: usize, u: &Mat2<T>) {
        let bit = 1 << q;
        let d = self.dim;
        // Left multiplication acts on rows.
        for i in 0..d {
            if i & bit == 0 {
                for j in 0..d {
                    let (a, b) = (self.m[i * d + j], self.m[(i | bit) * d + j]);
                    self.m[i * d + j] = u[0][0] * a + u[0][1] * b;
                    self.m[(i | bit) * d + j] = u[1][0] * a + u[1][1] * b;
                }
            }
        }
        // Right multiplication by U^dagger acts on columns with conj(U).
        for j in 0..d {
            if j & bit == 0 {
                for i in 0..d {
                    let (a, b) = (self.m[i * d + j], self.m[i * d + (j | bit)]);
                    self.m[i * d + j] = a * u[0][0].conj() + b * u[0][1].conj();
                    self.m[i * d + (j | bit)] = a * u[1][0].conj() + b * u[1][1].conj();
                }
            }
        }
    }

    fn cx(&mut self, control: usize, target: usize) {
        let (cb, tb) = (1 << control, 1 << target);
        let d = self.dim;
        let perm = |i: usize| if i & cb != 0 { i ^ tb } else { i };
        let old = self.m.clone();
        for i in 0..d {
            for j in 0..d {
                self.m[perm(i) * d + perm(j)] = old[i * d + j];
            }
        }
    }

    /// `P rho P` for a Pauli string given as (qubit, pauli) pairs.
    fn conjugated(&self, paulis: &[(u32, Pauli)]) -> Rho<T> {
        let (mut xmask, mut zmask) = (0usize, 0usize);
        for &(q, p) in paulis {
            let (x, z) = p.bits();
            if x {
                xmask |= 1 << q;
            }
            if z {
                zmask |= 1 << q;
            }
        }
        let d = self.dim;
        let mut out = vec![c(0.0, 0.0); d * d];
        // P = phase * X^x Z^z; the phase cancels between P and P^dagger.
        for i in 0..d {
            let si = (i & zmask).count_ones() & 1;
            for j in 0..d {
                let sj = (j & zmask).count_ones() & 1;
                let v = self.m[i * d + j];
                out[(i ^ xmask) * d + (j ^ xmask)] = if si ^ sj == 1 { -v } else { v };
            }
        }
        Rho { dim: d, m: out }
    }

    fn project(&self, q: usize, value: bool) -> Rho<T> {
        let bit = 1 << q;
        let d = self.dim;
        let mut out = self.clone();
        for i in 0..d {
            for j in 0..d {
                if (i & bit != 0) != value || (j & bit != 0) != value {
                    out.m[i * d + j] = c(0.0, 0.0);
                }
            }
        }
        out
    }
}

/// Exact joint distribution of detector and observable bits (detectors first)
/// for a noisy circuit with at most 8 qubits.
pub fn dense_mixed_run<T: Float>(circuit: &Circuit) -> Result<BTreeMap<BitRow, T>> {
    let n = circuit.num_qubits();
    if n > MIXED_QUBIT_LIMIT {
        return Err(Error::TooManyQubits {
            needed: n,
            limit: MIXED_QUBIT_LIMIT,
        });
    }
    let dets = circuit.detectors();
    let obs = circuit.observables();
    let nd = dets.len();
    let width = nd + obs.len();
    let mut touched: Vec<Vec<usize>> = vec![Vec::new(); circuit.measurement_count()];
    for d in &dets {
        for &r in &d.records {
            touched[r].push(d.id);
        }
    }
    for (k, recs) in obs.iter().enumerate() {
        for &r in recs {
            touched[r].push(nd + k);
        }
    }

    let mut branches: BTreeMap<BitRow, Rho<T>> = BTreeMap::new();
    branches.insert(BitRow::zeros(width), Rho::zero_state(n));
    let mut next_record = 0usize;
    let reset = |rho: &Rho<T>, q: usize| {
        let mut r0 = rho.project(q, false);
        let r1 = rho.project(q, true).conjugated(&[(q as u32, Pauli::X)]);
        r0.add(&r1);
        r0
    };
    for inst in circuit.instructions() {
        match inst {
            Instruction::ResetZ(t) | Instruction::ResetX(t) => {
                for rho in branches.values_mut() {
                    for &q in t {
                        *rho = reset(rho, q as usize);
                        if matches!(inst, Instruction::ResetX(_)) {
                            rho.apply1(q as usize, &hadamard());
                        }
                    }
                }
            }
            Instruction::PrepArb { qubit, theta, phi } => {
                for rho in branches.values_mut() {
                    *rho = reset(rho, *qubit as usize);
                    rho.apply1(*qubit as usize, &u3(*theta, *phi));
                }
            }
            Instruction::H(t) => {
                for rho in branches.values_mut() {
                    for &q in t {
                        rho.apply1(q as usize, &hadamard());
                    }
                }
            }
            Instruction::Cx(pairs) => {
                for rho in branches.values_mut() {
                    for &(a, b) in pairs {
                        rho.cx(a as usize, b as usize);
                    }
                }
            }
            Instruction::Measure { basis, targets } => {
                for &q in targets {
                    let q = q as usize;
                    let mut next: BTreeMap<BitRow, Rho<T>> = BTreeMap::new();
                    for (key, mut rho) in std::mem::take(&mut branches) {
                        if let Some(ms) = to_z_basis::<T>(*basis) {
                            for m in &ms {
                                rho.apply1(q, m);
                            }
                        }
                        for value in [false, true] {
                            let mut part = rho.project(q, value);
                            if let Some(ms) = from_z_basis::<T>(*basis) {
                                for m in &ms {
                                    part.apply1(q, m);
                                }
                            }
                            let mut k = key.clone();
                            if value {
                                for &bit in &touched[next_record] {
                                    k.toggle(bit);
                                }
                            }
                            match next.get_mut(&k) {
                                Some(existing) => existing.add(&part),
                                None => {
                                    next.insert(k, part);
                                }
                            }
                        }
                    }
                    branches = next;
                    next_record += 1;
                }
            }
            Instruction::Noise1 { .. } | Instruction::Noise2 { .. } | Instruction::Flip { .. } => {
                for alts in channel_alternatives(inst) {
                    for rho in branches.values_mut() {
                        let mut acc = rho.clone();
                        acc.scale(T::from(alts[0].0).unwrap());
                        for (p, paulis) in &alts[1..] {
                            let mut term = rho.conjugated(paulis);
                            term.scale(T::from(*p).unwrap());
                            acc.add(&term);
                        }
                        *rho = acc;
                    }
                }
            }
            _ => {}
        }
    }
    let eps = T::from(1e-15).unwrap();
    Ok(branches
        .into_iter()
        .map(|(k, rho)| (k, rho.trace()))
        .filter(|(_, p)| *p > eps)
        .collect())
}
