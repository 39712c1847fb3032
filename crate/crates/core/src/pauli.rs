//! Pauli operators in binary symplectic form.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::BitRow;

/// Single-qubit Pauli.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// `(x, z)` components.
    #[inline]
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    #[inline]
    pub fn anticommutes(self, other: Pauli) -> bool {
        let (ax, az) = self.bits();
        let (bx, bz) = other.bits();
        (ax && bz) ^ (az && bx)
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Product `self * other` ignoring phase.
    pub fn mul_ignoring_phase(self, other: Pauli) -> Pauli {
        let (ax, az) = self.bits();
        let (bx, bz) = other.bits();
        Pauli::from_bits(ax ^ bx, az ^ bz)
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Multi-qubit Pauli operator `i^phase * X^xs Z^zs`, with each qubit's factor
/// written in the Hermitian convention (`Y` stored as `x = z = 1`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    xs: BitRow,
    zs: BitRow,
    /// Power of `i` multiplying the tensor product of Hermitian single-qubit factors.
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            xs: BitRow::zeros(n),
            zs: BitRow::zeros(n),
            phase: 0,
        }
    }

    pub fn from_sparse(n: usize, factors: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        let mut p = Self::identity(n);
        for (q, pauli) in factors {
            p.set(q, pauli);
        }
        p
    }

    /// Uniform-type operator such as `Z_a Z_b Z_c`.
    pub fn uniform(n: usize, pauli: Pauli, support: impl IntoIterator<Item = usize>) -> Self {
        Self::from_sparse(n, support.into_iter().map(|q| (q, pauli)))
    }

    pub fn num_qubits(&self) -> usize {
        self.xs.len()
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.xs.get(q), self.zs.get(q))
    }

    pub fn set(&mut self, q: usize, pauli: Pauli) {
        let (x, z) = pauli.bits();
        self.xs.set(q, x);
        self.zs.set(q, z);
    }

    pub fn xs(&self) -> &BitRow {
        &self.xs
    }

    pub fn zs(&self) -> &BitRow {
        &self.zs
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn weight(&self) -> usize {
        let mut support = self.xs.clone();
        for (w, z) in support.words_mut().iter_mut().zip(self.zs.words()) {
            *w |= *z;
        }
        support.count_ones()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.num_qubits())
            .filter(|&q| self.xs.get(q) || self.zs.get(q))
            .collect()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        !(self.xs.and_parity(&other.zs) ^ self.zs.and_parity(&other.xs))
    }

    /// Symplectic row `[x | z]` of length `2n`.
    pub fn symplectic_row(&self) -> BitRow {
        let n = self.num_qubits();
        BitRow::from_indices(2 * n, self.xs.iter_ones().chain(self.zs.iter_ones().map(|q| q + n)))
    }

    /// `self * other`, tracking the phase exactly.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        let n = self.num_qubits();
        let mut phase = (self.phase + other.phase) as i32;
        for q in 0..n {
            phase += single_product_phase(self.get(q), other.get(q));
        }
        let mut xs = self.xs.clone();
        xs.xor_assign(&other.xs);
        let mut zs = self.zs.clone();
        zs.xor_assign(&other.zs);
        PauliString {
            xs,
            zs,
            phase: phase.rem_euclid(4) as u8,
        }
    }
}

/// Exponent `k` such that `a * b = i^k * (a·b)` for single-qubit Hermitian Paulis.
fn single_product_phase(a: Pauli, b: Pauli) -> i32 {
    use Pauli::*;
    match (a, b) {
        (X, Y) | (Y, Z) | (Z, X) => 1,
        (Y, X) | (Z, Y) | (X, Z) => -1,
        _ => 0,
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = ["+", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{sign}")?;
        for q in 0..self.num_qubits() {
            write!(f, "{}", self.get(q).symbol())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
        (proptest::collection::vec(0u8..4, n), 0u8..4).prop_map(move |(ps, phase)| {
            let mut p = PauliString::from_sparse(
                n,
                ps.into_iter()
                    .enumerate()
                    .map(|(q, k)| (q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][k as usize])),
            );
            p.phase = phase;
            p
        })
    }

    #[test]
    fn xz_is_minus_i_y() {
        let x = PauliString::from_sparse(1, [(0, Pauli::X)]);
        let z = PauliString::from_sparse(1, [(0, Pauli::Z)]);
        let xz = x.mul(&z);
        assert_eq!(xz.get(0), Pauli::Y);
        assert_eq!(xz.phase(), 3);
    }

    proptest! {
        #[test]
        fn multiplication_is_associative(a in arb_pauli_string(6), b in arb_pauli_string(6), c in arb_pauli_string(6)) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn commutation_matches_product_order(a in arb_pauli_string(5), b in arb_pauli_string(5)) {
            let ab = a.mul(&b);
            let ba = b.mul(&a);
            let same = ab == ba;
            prop_assert_eq!(a.commutes_with(&b), same);
        }
    }
}
