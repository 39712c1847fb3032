//! Stabilizer tableau with symbolic signs.
//!
//! Each random measurement introduces a fresh boolean variable; every sign in
//! the tableau is an affine function (constant XOR a set of variables) of the
//! variables created so far. A measurement outcome or a parity of outcomes is
//! deterministic exactly when its variable set is empty, which is how detector
//! determinism is decided.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitRow;
use crate::circuit::{Basis, Circuit, Instruction};
use crate::error::{Error, Result};

/// Affine GF(2) expression over the random-outcome variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub constant: bool,
    pub vars: BitRow,
}

impl Expr {
    fn zero(num_vars: usize) -> Self {
        Expr {
            constant: false,
            vars: BitRow::zeros(num_vars),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.vars.is_zero()
    }

    pub fn xor_assign(&mut self, other: &Expr) {
        self.constant ^= other.constant;
        self.vars.xor_assign(&other.vars);
    }

    pub fn eval(&self, assignment: &BitRow) -> bool {
        self.constant ^ self.vars.and_parity(assignment)
    }
}

/// Signed Pauli generators of a stabilizer state plus destabilizers.
#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    xs: Vec<BitRow>,
    zs: Vec<BitRow>,
    signs: Vec<Expr>,
    num_vars: usize,
    next_var: usize,
}

impl Tableau {
    /// `|0...0>` on `n` qubits with room for `var_capacity` random outcomes.
    pub fn new(n: usize, var_capacity: usize) -> Self {
        let mut xs = vec![BitRow::zeros(n); 2 * n];
        let mut zs = vec![BitRow::zeros(n); 2 * n];
        for q in 0..n {
            xs[q].set(q, true);
            zs[n + q].set(q, true);
        }
        Tableau {
            n,
            xs,
            zs,
            signs: vec![Expr::zero(var_capacity); 2 * n],
            num_vars: var_capacity,
            next_var: 0,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn vars_used(&self) -> usize {
        self.next_var
    }

    pub fn h(&mut self, q: usize) {
        for r in 0..2 * self.n {
            let (x, z) = (self.xs[r].get(q), self.zs[r].get(q));
            if x && z {
                self.signs[r].constant ^= true;
            }
            self.xs[r].set(q, z);
            self.zs[r].set(q, x);
        }
    }

    pub fn s(&mut self, q: usize) {
        for r in 0..2 * self.n {
            let (x, z) = (self.xs[r].get(q), self.zs[r].get(q));
            if x && z {
                self.signs[r].constant ^= true;
            }
            self.zs[r].set(q, z ^ x);
        }
    }

    pub fn s_dag(&mut self, q: usize) {
        self.s(q);
        self.s(q);
        self.s(q);
    }

    pub fn cx(&mut self, c: usize, t: usize) {
        for r in 0..2 * self.n {
            let (xc, zc) = (self.xs[r].get(c), self.zs[r].get(c));
            let (xt, zt) = (self.xs[r].get(t), self.zs[r].get(t));
            if xc && zt && !(xt ^ zc) {
                self.signs[r].constant ^= true;
            }
            self.xs[r].set(t, xt ^ xc);
            self.zs[r].set(c, zc ^ zt);
        }
    }

    pub fn x(&mut self, q: usize) {
        for r in 0..2 * self.n {
            if self.zs[r].get(q) {
                self.signs[r].constant ^= true;
            }
        }
    }

    /// Applies `X^e` (or `Z^e` when `phase` is set) for a symbolic exponent.
    fn pauli_pow(&mut self, q: usize, e: &Expr, phase: bool) {
        for r in 0..2 * self.n {
            let hit = if phase { self.xs[r].get(q) } else { self.zs[r].get(q) };
            if hit {
                self.signs[r].xor_assign(e);
            }
        }
    }

    /// Row `h` <- row `i` * row `h`.
    fn rowsum(&mut self, h: usize, i: usize) {
        let g = phase_exponent(&self.xs[i], &self.zs[i], &self.xs[h], &self.zs[h]);
        let (src_sign, (src_x, src_z)) = (self.signs[i].clone(), (self.xs[i].clone(), self.zs[i].clone()));
        let dst = &mut self.signs[h];
        dst.xor_assign(&src_sign);
        if g & 3 == 2 {
            dst.constant ^= true;
        }
        self.xs[h].xor_assign(&src_x);
        self.zs[h].xor_assign(&src_z);
    }

    /// Measures `Z_q`, returning the outcome as an expression (1 = -1 eigenvalue).
    pub fn measure_z(&mut self, q: usize) -> Expr {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&r| self.xs[r].get(q)) {
            for i in 0..2 * n {
                if i != p && self.xs[i].get(q) {
                    self.rowsum(i, p);
                }
            }
            self.xs[p - n] = self.xs[p].clone();
            self.zs[p - n] = self.zs[p].clone();
            self.signs[p - n] = self.signs[p].clone();
            self.xs[p].clear();
            self.zs[p].clear();
            self.zs[p].set(q, true);
            let v = self.next_var;
            assert!(v < self.num_vars, "tableau variable capacity exhausted");
            self.next_var += 1;
            let mut e = Expr::zero(self.num_vars);
            e.vars.set(v, true);
            self.signs[p] = e.clone();
            e
        } else {
            let mut sx = BitRow::zeros(n);
            let mut sz = BitRow::zeros(n);
            let mut sign = Expr::zero(self.num_vars);
            for i in 0..n {
                if self.xs[i].get(q) {
                    let g = phase_exponent(&self.xs[n + i], &self.zs[n + i], &sx, &sz);
                    sign.xor_assign(&self.signs[n + i]);
                    if g & 3 == 2 {
                        sign.constant ^= true;
                    }
                    sx.xor_assign(&self.xs[n + i]);
                    sz.xor_assign(&self.zs[n + i]);
                }
            }
            sign
        }
    }

    pub fn measure(&mut self, q: usize, basis: Basis) -> Expr {
        match basis {
            Basis::Z => self.measure_z(q),
            Basis::X => {
                self.h(q);
                let e = self.measure_z(q);
                self.h(q);
                e
            }
            Basis::Y => {
                self.s_dag(q);
                self.h(q);
                let e = self.measure_z(q);
                self.h(q);
                self.s(q);
                e
            }
        }
    }

    pub fn reset(&mut self, q: usize, basis: Basis) {
        let e = self.measure(q, basis);
        match basis {
            Basis::Z => self.pauli_pow(q, &e, false),
            Basis::X => self.pauli_pow(q, &e, true),
            Basis::Y => unreachable!("no Y reset"),
        }
    }
}

/// Exponent of `i` in `(x1,z1) * (x2,z2)`, mod 4.
fn phase_exponent(x1: &BitRow, z1: &BitRow, x2: &BitRow, z2: &BitRow) -> u32 {
    let mut plus = 0u32;
    let mut minus = 0u32;
    for (((&a, &b), &c), &d) in x1.words().iter().zip(z1.words()).zip(x2.words()).zip(z2.words()) {
        let p = (a & b & !c & d) | (a & !b & c & d) | (!a & b & c & !d);
        let m = (a & b & c & !d) | (a & !b & !c & d) | (!a & b & c & d);
        plus += p.count_ones();
        minus += m.count_ones();
    }
    (plus + 4 * 64 * x1.words().len() as u32 - minus) & 3
}

/// How `PREP_ARB` is interpreted by the tableau.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrepMode {
    /// Only stabilizer-state angles are accepted.
    Stabilizer,
    /// The prepared qubit is maximally entangled with an extra reference
    /// qubit, so a parity is deterministic only if it is for every input state.
    Purified,
}

/// Bloch axis reached by `U3(theta, phi, 0)|0>` when it is a stabilizer state.
fn stabilizer_axis(theta: f64, phi: f64) -> Option<(Basis, bool)> {
    let quarter = |a: f64| {
        let k = a / FRAC_PI_2;
        let r = k.round();
        ((k - r).abs() < 1e-9).then_some((r as i64).rem_euclid(4))
    };
    let t = quarter(theta)?;
    let f = quarter(phi)?;
    let (s, c) = ([0.0, 1.0, 0.0, -1.0][t as usize], [1.0, 0.0, -1.0, 0.0][t as usize]);
    let (sf, cf) = ([0.0, 1.0, 0.0, -1.0][f as usize], [1.0, 0.0, -1.0, 0.0][f as usize]);
    let v = [s * cf, s * sf, c];
    let axis = v.iter().position(|x: &f64| x.abs() > 0.5)?;
    let basis = [Basis::X, Basis::Y, Basis::Z][axis];
    Some((basis, v[axis] < 0.0))
}

/// Symbolic result of running a circuit (noise ignored).
#[derive(Clone, Debug)]
pub struct SymbolicRun {
    pub outcomes: Vec<Expr>,
    pub num_vars: usize,
}

impl SymbolicRun {
    pub fn parity(&self, records: &[usize]) -> Expr {
        let mut e = Expr::zero(self.num_vars);
        for &r in records {
            e.xor_assign(&self.outcomes[r]);
        }
        e
    }
}

pub fn run_symbolic(circuit: &Circuit, mode: PrepMode) -> Result<SymbolicRun> {
    let has_prep = circuit
        .instructions()
        .iter()
        .any(|i| matches!(i, Instruction::PrepArb { .. }));
    let n = circuit.num_qubits();
    let reference = n;
    let total = n + usize::from(mode == PrepMode::Purified && has_prep);
    let capacity = circuit
        .instructions()
        .iter()
        .map(|i| match i {
            Instruction::Measure { targets, .. } | Instruction::ResetZ(targets) | Instruction::ResetX(targets) => {
                targets.len()
            }
            Instruction::PrepArb { .. } => 2,
            _ => 0,
        })
        .sum::<usize>()
        + 1;
    let mut t = Tableau::new(total, capacity);
    let mut outcomes = Vec::with_capacity(circuit.measurement_count());
    for inst in circuit.instructions() {
        match inst {
            Instruction::ResetZ(qs) => qs.iter().for_each(|&q| t.reset(q as usize, Basis::Z)),
            Instruction::ResetX(qs) => qs.iter().for_each(|&q| t.reset(q as usize, Basis::X)),
            Instruction::H(qs) => qs.iter().for_each(|&q| t.h(q as usize)),
            Instruction::Cx(pairs) => pairs.iter().for_each(|&(a, b)| t.cx(a as usize, b as usize)),
            Instruction::Measure { basis, targets } => {
                for &q in targets {
                    outcomes.push(t.measure(q as usize, *basis));
                }
            }
            &Instruction::PrepArb { qubit, theta, phi } => {
                let q = qubit as usize;
                t.reset(q, Basis::Z);
                match mode {
                    PrepMode::Purified => {
                        t.reset(reference, Basis::Z);
                        t.h(reference);
                        t.cx(reference, q);
                    }
                    PrepMode::Stabilizer => {
                        let (axis, negative) = stabilizer_axis(theta, phi).ok_or_else(|| {
                            Error::Unsupported(format!("PREP_ARB({theta}, {phi}) is not a stabilizer state"))
                        })?;
                        if negative {
                            t.x(q);
                        }
                        match axis {
                            Basis::Z => {}
                            Basis::X => t.h(q),
                            Basis::Y => {
                                t.h(q);
                                t.s(q);
                            }
                        }
                    }
                }
            }
            _ => {}
        }
    }
    Ok(SymbolicRun {
        outcomes,
        num_vars: capacity,
    })
}

/// Concrete outcomes of one noiseless run plus determinism flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableauRun {
    pub outcomes: Vec<bool>,
    pub deterministic: Vec<bool>,
    pub detector_values: Vec<bool>,
    pub detector_deterministic: Vec<bool>,
    pub observable_values: Vec<bool>,
    pub observable_deterministic: Vec<bool>,
}

/// Samples one noiseless execution; random outcomes are drawn from `seed`.
pub fn tableau_run(circuit: &Circuit, seed: u64) -> Result<TableauRun> {
    let sym = run_symbolic(circuit, PrepMode::Stabilizer)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = BitRow::zeros(sym.num_vars);
    for v in 0..sym.num_vars {
        assignment.set(v, rng.random());
    }
    let outcomes = sym.outcomes.iter().map(|e| e.eval(&assignment)).collect();
    let deterministic = sym.outcomes.iter().map(Expr::is_deterministic).collect();
    let dets: Vec<Expr> = circuit.detectors().iter().map(|d| sym.parity(&d.records)).collect();
    let obs: Vec<Expr> = circuit.observables().iter().map(|r| sym.parity(r)).collect();
    Ok(TableauRun {
        outcomes,
        deterministic,
        detector_values: circuit
            .detectors()
            .iter()
            .zip(&dets)
            .map(|(d, e)| e.eval(&assignment) ^ d.expected)
            .collect(),
        detector_deterministic: dets.iter().map(Expr::is_deterministic).collect(),
        observable_values: obs.iter().map(|e| e.eval(&assignment)).collect(),
        observable_deterministic: obs.iter().map(Expr::is_deterministic).collect(),
    })
}

/// Checks every detector is deterministic with the declared parity, in the
/// purified sense when the circuit contains `PREP_ARB`.
pub fn verify_detectors(circuit: &Circuit) -> Result<()> {
    let sym = run_symbolic(circuit, PrepMode::Purified)?;
    for d in circuit.detectors() {
        let e = sym.parity(&d.records);
        if !e.is_deterministic() || e.constant != d.expected {
            return Err(Error::NonDeterministicDetector(d.id));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(src: &str) -> TableauRun {
        tableau_run(&Circuit::parse(src).unwrap(), 7).unwrap()
    }

    #[test]
    fn bell_pair_correlations() {
        let r = run("H 0\nTICK\nCX 0 1\nTICK\nMEASURE_Z 0 1\nDETECTOR rec[-1] rec[-2]");
        assert_eq!(r.deterministic, vec![false, false]);
        assert_eq!(r.outcomes[0], r.outcomes[1]);
        assert_eq!(r.detector_deterministic, vec![true]);
        assert_eq!(r.detector_values, vec![false]);
        let r = run("H 0\nTICK\nCX 0 1\nTICK\nMEASURE_X 0 1\nDETECTOR rec[-1] rec[-2]");
        assert_eq!(r.detector_deterministic, vec![true]);
        assert_eq!(r.detector_values, vec![false]);
        // XX * ZZ = -YY on a Bell pair
        let r = run("H 0\nTICK\nCX 0 1\nTICK\nMEASURE_Y 0 1\nDETECTOR(1) rec[-1] rec[-2]");
        assert_eq!(r.detector_deterministic, vec![true]);
        assert_eq!(r.detector_values, vec![false]);
    }

    #[test]
    fn resets_and_basis_measurements() {
        let r = run("RESET_X 0\nTICK\nMEASURE_X 0\nTICK\nMEASURE_Z 0\nTICK\nRESET_Z 0\nTICK\nMEASURE_Z 0");
        assert_eq!(r.outcomes[0], false);
        assert_eq!(r.deterministic, vec![true, false, true]);
        assert_eq!(r.outcomes[2], false);
    }

    #[test]
    fn stabilizer_preparations() {
        let pi = std::f64::consts::PI;
        for (theta, phi, basis, value) in [
            (0.0, 0.0, "Z", false),
            (pi, 0.0, "Z", true),
            (pi / 2.0, 0.0, "X", false),
            (pi / 2.0, pi, "X", true),
            (pi / 2.0, pi / 2.0, "Y", false),
            (pi / 2.0, 3.0 * pi / 2.0, "Y", true),
        ] {
            let r = run(&format!("PREP_ARB 0 {theta} {phi}\nTICK\nMEASURE_{basis} 0"));
            assert!(r.deterministic[0], "{theta} {phi}");
            assert_eq!(r.outcomes[0], value, "{theta} {phi} {basis}");
        }
        let c = Circuit::parse("PREP_ARB 0 0.3 0\nTICK\nMEASURE_Z 0").unwrap();
        assert!(matches!(tableau_run(&c, 0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn purified_prep_is_never_deterministic_alone() {
        let c = Circuit::parse("PREP_ARB 0 0 0\nTICK\nMEASURE_Z 0").unwrap();
        let s = run_symbolic(&c, PrepMode::Purified).unwrap();
        assert!(!s.outcomes[0].is_deterministic());
        let s = run_symbolic(&c, PrepMode::Stabilizer).unwrap();
        assert!(s.outcomes[0].is_deterministic());
    }

    #[test]
    fn cx_phase_kickback() {
        let pi = std::f64::consts::PI;
        let r = run(&format!(
            "RESET_X 0\nPREP_ARB 1 {pi} 0\nTICK\nH 1\nTICK\nCX 0 1\nTICK\nMEASURE_X 0 1"
        ));
        assert_eq!(r.deterministic, vec![true, true]);
        assert_eq!(r.outcomes, vec![true, true]);
    }
}
