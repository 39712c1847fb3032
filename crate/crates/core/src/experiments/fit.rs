//! Scaling fit `p_L = C / Λ^(a (d+1)/2)` with `Λ = p_th / p`.
//!
//! For a fixed threshold the model is linear in `(ln C, a)`:
//! `ln p_L = ln C - a · (d+1)/2 · ln(p_th / p)`, so the weighted least-squares
//! solution and its covariance are closed-form.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::memory::SweepResult;
use crate::error::{Error, Result};
use crate::lattice::PauliKind;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitPoint<T> {
    pub d: u32,
    pub p: T,
    pub p_l: T,
    /// Standard error of `p_l`; `None` gives the point unit weight in log space.
    pub sigma: Option<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitParams<T> {
    pub c: T,
    pub a: T,
    pub p_th: T,
    /// Covariance of `(ln C, a)`.
    pub cov: [[T; 2]; 2],
    /// Weighted residual sum of squares.
    pub chi2: T,
    pub points: usize,
    /// `|a|` is below twice its standard error (or exactly zero): the data
    /// show no scaling with distance.
    pub non_scaling: bool,
}

impl<T: Float> FitParams<T> {
    pub fn a_err(&self) -> T {
        self.cov[1][1].sqrt()
    }

    pub fn c_err(&self) -> T {
        self.c * self.cov[0][0].sqrt()
    }

    /// `Λ` at physical error rate `p`.
    pub fn lambda(&self, p: T) -> T {
        self.p_th / p
    }

    pub fn predict(&self, d: u32, p: T) -> T {
        let k = T::from(d + 1).unwrap() / (T::one() + T::one());
        self.c / self.lambda(p).powf(self.a * k)
    }
}

/// Weighted least squares of the scaling law on the given points.
pub fn fit_points<T: Float>(points: &[FitPoint<T>], p_th: T) -> Result<FitParams<T>> {
    let usable: Vec<&FitPoint<T>> = points
        .iter()
        .filter(|pt| pt.p_l > T::zero() && pt.p > T::zero())
        .collect();
    let mut ds: Vec<u32> = usable.iter().map(|pt| pt.d).collect();
    ds.sort_unstable();
    ds.dedup();
    if ds.len() < 2 {
        return Err(Error::Underdetermined(format!(
            "need rows at two or more distances, have {}",
            ds.len()
        )));
    }
    let two = T::one() + T::one();
    // Normal equations for y = b0 + b1 x with x = -k ln Λ.
    let (mut s, mut sx, mut sxx, mut sy, mut sxy) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    let rows: Vec<(T, T, T)> = usable
        .iter()
        .map(|pt| {
            let k = T::from(pt.d + 1).unwrap() / two;
            let x = -k * (p_th / pt.p).ln();
            let y = pt.p_l.ln();
            let w = match pt.sigma {
                Some(sig) if sig > T::zero() => {
                    let sl = sig / pt.p_l;
                    T::one() / (sl * sl)
                }
                _ => T::one(),
            };
            (x, y, w)
        })
        .collect();
    for &(x, y, w) in &rows {
        s = s + w;
        sx = sx + w * x;
        sxx = sxx + w * x * x;
        sy = sy + w * y;
        sxy = sxy + w * x * y;
    }
    let det = s * sxx - sx * sx;
    if !(det > T::epsilon() * s * sxx) {
        return Err(Error::Underdetermined("points do not separate the parameters".into()));
    }
    let b1 = (s * sxy - sx * sy) / det;
    let b0 = (sy - b1 * sx) / s;
    let chi2 = rows.iter().fold(T::zero(), |acc, &(x, y, w)| {
        let r = y - b0 - b1 * x;
        acc + w * r * r
    });
    let cov = [[sxx / det, -sx / det], [-sx / det, s / det]];
    let a_err = cov[1][1].sqrt();
    Ok(FitParams {
        c: b0.exp(),
        a: b1,
        p_th,
        cov,
        chi2,
        points: rows.len(),
        non_scaling: b1.abs() <= two * a_err || b1.abs() < T::epsilon().sqrt(),
    })
}

/// Fits the sweep rows of one memory basis with `p < p_th`.
pub fn fit_scaling(sweep: &SweepResult, basis: PauliKind, p_th: f64) -> Result<FitParams<f64>> {
    let points: Vec<FitPoint<f64>> = sweep
        .rows
        .iter()
        .filter(|r| r.basis == basis && r.p < p_th)
        .map(|r| FitPoint {
            d: r.d,
            p: r.p,
            p_l: r.p_l,
            sigma: (r.std_err > 0.0).then_some(r.std_err),
        })
        .collect();
    fit_points(&points, p_th)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::memory::synthetic_sweep;

    #[test]
    fn exact_recovery() {
        let grid = [0.0005, 0.001, 0.0015, 0.002];
        let s = synthetic_sweep(PauliKind::Z, &[3, 5, 7], &grid, 0.1, 0.8, 0.0031);
        let f = fit_scaling(&s, PauliKind::Z, 0.0031).unwrap();
        assert!((f.c - 0.1).abs() < 1e-6 && (f.a - 0.8).abs() < 1e-6, "{f:?}");
        assert!(f.chi2 < 1e-12);
        assert!(!f.non_scaling);
        assert!((f.predict(5, 0.001) - s.rows_for(PauliKind::Z, 5)[1].p_l).abs() < 1e-12);
    }

    #[test]
    fn works_in_f32() {
        let pts: Vec<FitPoint<f32>> = [3u32, 5]
            .iter()
            .flat_map(|&d| {
                [0.001f32, 0.002].map(move |p| FitPoint {
                    d,
                    p,
                    p_l: 0.05 * (p / 0.004f32).powf((d as f32 + 1.0) / 2.0),
                    sigma: None,
                })
            })
            .collect();
        let f = fit_points(&pts, 0.004f32).unwrap();
        assert!((f.a - 1.0).abs() < 1e-3 && (f.c - 0.05).abs() < 1e-3);
    }

    #[test]
    fn flat_and_degenerate() {
        let pts: Vec<FitPoint<f64>> = [3u32, 5, 7]
            .iter()
            .flat_map(|&d| {
                [0.001, 0.002].map(move |p| FitPoint {
                    d,
                    p,
                    p_l: 0.01,
                    sigma: Some(1e-3),
                })
            })
            .collect();
        let f = fit_points(&pts, 0.004).unwrap();
        assert!(f.a.abs() < 1e-9 && f.non_scaling);
        let one_d: Vec<_> = pts.iter().copied().filter(|p| p.d == 3).collect();
        assert!(matches!(fit_points(&one_d, 0.004), Err(Error::Underdetermined(_))));
    }

    #[test]
    fn covariance_matches_scatter() {
        // Perturb exact curves with known log-space noise and check that the
        // spread of fitted slopes matches the reported standard error.
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sig = 0.05;
        let mut slopes = Vec::new();
        let mut reported = 0.0;
        for _ in 0..400 {
            let pts: Vec<FitPoint<f64>> = [3u32, 5, 7]
                .iter()
                .flat_map(|&d| [0.0005, 0.001, 0.002].map(move |p| (d, p)))
                .map(|(d, p)| {
                    let exact = 0.1 * (p / 0.003f64).powf(0.9 * (d as f64 + 1.0) / 2.0);
                    let u: f64 = rng.random::<f64>() - 0.5;
                    // Uniform noise with standard deviation `sig` in log space.
                    let noisy = exact * (u * sig * 12f64.sqrt()).exp();
                    FitPoint {
                        d,
                        p,
                        p_l: noisy,
                        sigma: Some(sig * noisy),
                    }
                })
                .collect();
            let f = fit_points(&pts, 0.003).unwrap();
            reported = f.a_err();
            slopes.push(f.a);
        }
        let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
        let sd = (slopes.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / 399.0).sqrt();
        assert!((mean - 0.9).abs() < 3.0 * sd / 20.0);
        assert!((sd / reported - 1.0).abs() < 0.15, "{sd} vs {reported}");
    }
}
