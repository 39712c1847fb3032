//! Single-qubit direct-inversion tomography, fidelity and bootstrap errors.

use num_complex::Complex;
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::circuit::Basis;
use crate::error::{Error, Result};

/// A qubit state `ρ = (I + x X + y Y + z Z) / 2`, stored as its Bloch vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix2<T> {
    pub bloch: [T; 3],
}

pub type DensityMatrix = DensityMatrix2<f64>;

pub type Matrix2<T> = [[Complex<T>; 2]; 2];

fn tol<T: Float>() -> T {
    T::epsilon().sqrt()
}

fn norm<T: Float>(r: &[T; 3]) -> T {
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

impl<T: Float> DensityMatrix2<T> {
    /// Rejects Bloch vectors longer than one.
    pub fn new(bloch: [T; 3]) -> Result<Self> {
        let n = norm(&bloch);
        if !(n <= T::one() + tol()) {
            return Err(Error::NonPhysical(n.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(DensityMatrix2 { bloch })
    }

    /// The state `U3(θ, φ, 0)|0⟩ = cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
    pub fn pure(theta: T, phi: T) -> Self {
        DensityMatrix2 {
            bloch: [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()],
        }
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix2 { bloch: [T::zero(); 3] }
    }

    pub fn purity_radius(&self) -> T {
        norm(&self.bloch)
    }

    pub fn is_pure(&self) -> bool {
        (self.purity_radius() - T::one()).abs() <= tol()
    }

    pub fn expectation(&self, basis: Basis) -> T {
        match basis {
            Basis::X => self.bloch[0],
            Basis::Y => self.bloch[1],
            Basis::Z => self.bloch[2],
        }
    }

    /// Matrix form with `⟨0|ρ|0⟩ = (1 + z)/2`.
    pub fn matrix(&self) -> Matrix2<T> {
        let half = T::one() / (T::one() + T::one());
        let [x, y, z] = self.bloch;
        [
            [
                Complex::new(half * (T::one() + z), T::zero()),
                Complex::new(half * x, -half * y),
            ],
            [
                Complex::new(half * x, half * y),
                Complex::new(half * (T::one() - z), T::zero()),
            ],
        ]
    }
}

/// Accepted-shot outcome counts of one logical basis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisCounts {
    /// Shots taken before post-selection.
    pub shots: u64,
    pub up: u64,
    pub down: u64,
}

impl BasisCounts {
    pub fn accepted(&self) -> u64 {
        self.up + self.down
    }

    pub fn acceptance(&self) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.accepted() as f64 / self.shots as f64
        }
    }

    pub fn expectation(&self) -> Option<f64> {
        let n = self.accepted();
        (n > 0).then(|| (self.up as f64 - self.down as f64) / n as f64)
    }
}

/// Per-basis counts, indexed X, Y, Z.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TomographyCounts {
    pub bases: [BasisCounts; 3],
}

impl TomographyCounts {
    pub fn get(&self, b: Basis) -> &BasisCounts {
        &self.bases[basis_index(b)]
    }

    pub fn get_mut(&mut self, b: Basis) -> &mut BasisCounts {
        &mut self.bases[basis_index(b)]
    }

    /// Accepted fraction pooled over the three bases.
    pub fn acceptance(&self) -> f64 {
        let shots: u64 = self.bases.iter().map(|c| c.shots).sum();
        let acc: u64 = self.bases.iter().map(|c| c.accepted()).sum();
        if shots == 0 {
            0.0
        } else {
            acc as f64 / shots as f64
        }
    }
}

pub fn basis_index(b: Basis) -> usize {
    match b {
        Basis::X => 0,
        Basis::Y => 1,
        Basis::Z => 2,
    }
}

/// Direct-inversion estimate: the raw Bloch vector and the state after
/// radially clipping it to the unit ball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tomography {
    pub raw: [f64; 3],
    pub state: DensityMatrix,
}

pub fn tomography(counts: &TomographyCounts) -> Result<Tomography> {
    let mut raw = [0.0; 3];
    for b in Basis::ALL {
        raw[basis_index(b)] = counts.get(b).expectation().ok_or(Error::NoAcceptedShots(b.symbol()))?;
    }
    Ok(Tomography {
        raw,
        state: project(raw),
    })
}

/// Radial projection onto the Bloch ball.
pub fn project<T: Float>(r: [T; 3]) -> DensityMatrix2<T> {
    let n = norm(&r);
    let bloch = if n > T::one() { r.map(|v| v / n) } else { r };
    DensityMatrix2 { bloch }
}

/// `F = ⟨ψ|ρ|ψ⟩ = (1 + r_ψ · r_ρ)/2` for a pure ideal state.
pub fn fidelity<T: Float>(ideal: &DensityMatrix2<T>, exp: &DensityMatrix2<T>) -> Result<T> {
    if !ideal.is_pure() {
        return Err(Error::InvalidArgument("ideal state must be pure".into()));
    }
    let n = exp.purity_radius();
    if !(n <= T::one() + tol()) {
        return Err(Error::NonPhysical(n.to_f64().unwrap_or(f64::NAN)));
    }
    let dot = (0..3).fold(T::zero(), |acc, i| acc + ideal.bloch[i] * exp.bloch[i]);
    let half = T::one() / (T::one() + T::one());
    Ok(clamp01(half * (T::one() + dot)))
}

fn clamp01<T: Float>(v: T) -> T {
    v.max(T::zero()).min(T::one())
}

fn mul<T: Float>(a: &Matrix2<T>, b: &Matrix2<T>) -> Matrix2<T> {
    let mut out = [[Complex::new(T::zero(), T::zero()); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Square root of a 2×2 positive semidefinite Hermitian matrix:
/// `√M = (M + s I) / t` with `s = √det M`, `t = √(tr M + 2s)`. A determinant
/// at rounding level is taken as zero: the square root would otherwise turn
/// an O(ε) error into an O(√ε) one for (nearly) rank-one inputs.
pub fn sqrt_psd<T: Float>(m: &Matrix2<T>) -> Matrix2<T> {
    let trace = (m[0][0] + m[1][1]).re;
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).re;
    let floor = T::from(64.0).unwrap() * T::epsilon() * trace * trace;
    let s = if det <= floor { T::zero() } else { det.sqrt() };
    let t = (trace + s + s).sqrt();
    if t == T::zero() {
        return [[Complex::new(T::zero(), T::zero()); 2]; 2];
    }
    let mut out = *m;
    out[0][0] = out[0][0] + s;
    out[1][1] = out[1][1] + s;
    out.map(|row| row.map(|v| v / t))
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²` evaluated with explicit matrix roots.
pub fn fidelity_general<T: Float>(rho: &DensityMatrix2<T>, sigma: &DensityMatrix2<T>) -> T {
    let r = sqrt_psd(&rho.matrix());
    let inner = mul(&mul(&r, &sigma.matrix()), &r);
    let root = sqrt_psd(&inner);
    let tr = (root[0][0] + root[1][1]).re;
    clamp01(tr * tr)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub value: f64,
    pub std_err: f64,
    pub resamples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub fidelity: FidelityEstimate,
    /// Standard errors of the three expectation values.
    pub expectation_err: [f64; 3],
}

/// Parametric bootstrap: each basis's up-count is redrawn from a binomial
/// with its empirical up fraction, and the statistics are recomputed.
pub fn bootstrap(
    counts: &TomographyCounts,
    ideal: &DensityMatrix,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    if resamples < 2 {
        return Err(Error::InvalidArgument("bootstrap needs at least two resamples".into()));
    }
    let point = tomography(counts)?;
    let value = fidelity(ideal, &point.state)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dists: Vec<(u64, Binomial)> = counts
        .bases
        .iter()
        .map(|c| {
            let n = c.accepted();
            let q = c.up as f64 / n as f64;
            (n, Binomial::new(n, q).expect("valid binomial"))
        })
        .collect();
    let mut fids = Vec::with_capacity(resamples);
    let mut exps = vec![Vec::with_capacity(resamples); 3];
    for _ in 0..resamples {
        let mut r = [0.0; 3];
        for (i, (n, dist)) in dists.iter().enumerate() {
            let up = dist.sample(&mut rng);
            r[i] = (2.0 * up as f64 - *n as f64) / *n as f64;
            exps[i].push(r[i]);
        }
        fids.push(fidelity(ideal, &project(r))?);
    }
    Ok(BootstrapResult {
        fidelity: FidelityEstimate {
            value,
            std_err: sample_sd(&fids),
            resamples,
        },
        expectation_err: [sample_sd(&exps[0]), sample_sd(&exps[1]), sample_sd(&exps[2])],
    })
}

fn sample_sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// `value ± err` with the error rounded to one significant digit and the
/// value to the same decimal place.
pub fn format_pm(value: f64, err: f64) -> String {
    if !(err > 0.0) || !err.is_finite() {
        return format!("{value:.4} ± 0");
    }
    let places = (-err.log10().floor()).max(0.0) as usize;
    let r = 10f64.powi(places as i32);
    let e = (err * r).round() / r;
    // Rounding can carry into the next digit (0.096 -> 0.1).
    let places = if e > 0.0 {
        (-e.log10().floor()).max(0.0) as usize
    } else {
        places
    };
    format!("{value:.places$} ± {e:.places$}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn counts(x: (u64, u64), y: (u64, u64), z: (u64, u64)) -> TomographyCounts {
        let c = |(up, down): (u64, u64)| BasisCounts {
            shots: up + down,
            up,
            down,
        };
        TomographyCounts {
            bases: [c(x), c(y), c(z)],
        }
    }

    #[test]
    fn direct_inversion() {
        let t = tomography(&counts((500, 500), (500, 500), (1000, 0))).unwrap();
        assert_eq!(t.state.bloch, [0.0, 0.0, 1.0]);
        let m = t.state.matrix();
        assert_eq!((m[0][0].re, m[1][1].re), (1.0, 0.0));
        let t = tomography(&counts((750, 250), (500, 500), (500, 500))).unwrap();
        assert_eq!(t.raw[0], 0.5);
        assert!(matches!(
            tomography(&counts((1, 0), (0, 0), (1, 0))),
            Err(Error::NoAcceptedShots('Y'))
        ));
    }

    #[test]
    fn projection_clips_radially() {
        let t = tomography(&counts((1000, 0), (1000, 0), (500, 500))).unwrap();
        let s = 0.5f64.sqrt();
        assert!((t.state.bloch[0] - s).abs() < 1e-15 && (t.state.bloch[1] - s).abs() < 1e-15);
        assert_eq!(t.raw, [1.0, 1.0, 0.0]);
        assert!(matches!(
            fidelity(&DensityMatrix::pure(0.0, 0.0), &DensityMatrix2 { bloch: t.raw }),
            Err(Error::NonPhysical(_))
        ));
    }

    #[test]
    fn fidelity_cases() {
        let zero = DensityMatrix::pure(0.0, 0.0);
        let one = DensityMatrix::pure(PI, 0.0);
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity(&zero, &one).unwrap() < 1e-15);
        let h = DensityMatrix::pure(PI / 4.0, 0.0);
        assert!((fidelity(&h, &DensityMatrix::maximally_mixed()).unwrap() - 0.5).abs() < 1e-15);
        assert!(fidelity(&DensityMatrix::maximally_mixed(), &h).is_err());
    }

    #[test]
    fn pure_reduction_matches_general_formula() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let ideal = DensityMatrix::pure(rng.random::<f64>() * PI, rng.random::<f64>() * 2.0 * PI);
            let r: f64 = rng.random::<f64>().sqrt();
            let dir = DensityMatrix::pure(rng.random::<f64>() * PI, rng.random::<f64>() * 2.0 * PI);
            let exp = DensityMatrix::new(dir.bloch.map(|v| v * r)).unwrap();
            let a = fidelity(&ideal, &exp).unwrap();
            let b = fidelity_general(&ideal, &exp);
            let c = fidelity_general(&exp, &ideal);
            assert!((a - b).abs() < 1e-12 && (a - c).abs() < 1e-12, "{a} {b} {c}");
        }
        // Mixed-mixed values in f32 against the closed form tr(ρσ) + 2√(det ρ det σ).
        let p = DensityMatrix2::<f32> {
            bloch: [0.3, 0.1, -0.2],
        };
        let q = DensityMatrix2::<f32> {
            bloch: [-0.1, 0.4, 0.5],
        };
        let tr = 0.5 * (1.0 + (0.3 * -0.1 + 0.1 * 0.4 + -0.2 * 0.5));
        let det = |r: [f32; 3]| 0.25 * (1.0 - (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]));
        let want = tr + 2.0 * (det(p.bloch) * det(q.bloch)).sqrt();
        assert!((fidelity_general(&p, &q) - want).abs() < 1e-5);
    }

    #[test]
    fn u3_state_convention() {
        // U3(π/2, π/2, 0)|0⟩ = (|0⟩ + i|1⟩)/√2 has ⟨Y⟩ = 1 and off-diagonal ⟨1|ρ|0⟩ = i/2.
        let s = DensityMatrix::pure(PI / 2.0, PI / 2.0);
        assert!((s.expectation(Basis::Y) - 1.0).abs() < 1e-15);
        assert!((s.matrix()[1][0].im - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bootstrap_errors() {
        let ideal = DensityMatrix::pure(0.0, 0.0);
        let b = bootstrap(&counts((0, 100), (100, 0), (100, 0)), &ideal, 200, 1).unwrap();
        assert!(b.fidelity.std_err < 1e-12);
        assert_eq!(b.expectation_err, [0.0; 3]);
        assert!(bootstrap(&counts((1, 1), (1, 1), (1, 1)), &ideal, 1, 1).is_err());
        // Standard error scales like 1/√N.
        let h = DensityMatrix::pure(PI / 4.0, 0.0);
        let errs: Vec<f64> = [1_000u64, 10_000, 100_000]
            .iter()
            .map(|&n| {
                let q = |e: f64| ((1.0 + e) / 2.0 * n as f64).round() as u64;
                let c = |e: f64| (q(e), n - q(e));
                let r = 0.5f64.sqrt() * 0.9;
                bootstrap(&counts(c(r), c(0.0), c(r)), &h, 1000, 7)
                    .unwrap()
                    .fidelity
                    .std_err
            })
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio / 10f64.sqrt() - 1.0).abs() < 0.15, "{errs:?}");
        }
    }

    #[test]
    fn pm_formatting() {
        assert_eq!(format_pm(0.880_62, 0.000_21), "0.8806 ± 0.0002");
        assert_eq!(format_pm(0.882, 0.006), "0.882 ± 0.006");
        assert_eq!(format_pm(1.0, 0.0), "1.0000 ± 0");
    }
}
