//! Memory experiments, threshold sweeps and crossing estimates.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::derive_seed;
use crate::circuit::build_memory_circuit;
use crate::decoder::{build_dem, Matcher, MatchingGraph};
use crate::error::{Error, Result};
use crate::lattice::{build_layout, CodeDistance, PauliKind};
use crate::noise::{apply_noise, NoiseModel};
use crate::sim::frame::frame_sample;

/// One (basis, d, p) cell of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Memory basis: the prepared and measured logical operator.
    pub basis: PauliKind,
    pub d: u32,
    pub p: f64,
    pub rounds: usize,
    pub shots: usize,
    pub failures: usize,
    pub p_shot: f64,
    pub p_l: f64,
    pub std_err: f64,
}

impl SweepRow {
    /// The logical error a memory experiment is sensitive to: a Z-basis
    /// memory fails on logical X errors and vice versa.
    pub fn error_type(&self) -> PauliKind {
        self.basis.other()
    }
}

/// Per-round logical error rate from a per-shot failure probability, and its
/// binomial standard error propagated through the same conversion.
pub fn per_round(failures: usize, shots: usize, rounds: usize) -> (f64, f64, f64) {
    let n = shots as f64;
    let ps = failures as f64 / n;
    let r = rounds as f64;
    let base = (1.0 - 2.0 * ps).max(0.0);
    let pl = (1.0 - base.powf(1.0 / r)) / 2.0;
    let sigma_shot = (ps * (1.0 - ps) / n).sqrt();
    let deriv = if base > 0.0 { base.powf(1.0 / r - 1.0) / r } else { 0.0 };
    (ps, pl, sigma_shot * deriv)
}

/// Circuit, sampler input and decoder for one memory configuration.
pub struct MemorySetup {
    pub basis: PauliKind,
    pub d: u32,
    pub p: f64,
    pub rounds: usize,
    noisy: crate::circuit::Circuit,
    matcher: Matcher,
}

impl MemorySetup {
    pub fn new(d: u32, basis: PauliKind, model: &NoiseModel, rounds: usize) -> Result<Self> {
        let layout = build_layout(CodeDistance::new(d as i64)?);
        let mc = build_memory_circuit(&layout, basis, rounds)?;
        let noisy = apply_noise(&mc.circuit, model)?;
        let dem = build_dem(&noisy)?;
        let matcher = Matcher::new(&MatchingGraph::from_dem(&dem));
        Ok(MemorySetup {
            basis,
            d,
            p: model.p2,
            rounds,
            noisy,
            matcher,
        })
    }

    pub fn run(&self, shots: usize, seed: u64) -> Result<SweepRow> {
        if shots == 0 {
            return Err(Error::InvalidArgument("zero shots".into()));
        }
        let batch = frame_sample(&self.noisy, shots, seed)?;
        let predicted = self.matcher.decode_batch(&batch)?;
        let failures = predicted
            .iter()
            .enumerate()
            .filter(|&(s, &pred)| (pred & 1 == 1) != batch.observable(s, 0))
            .count();
        let (p_shot, p_l, std_err) = per_round(failures, shots, self.rounds);
        Ok(SweepRow {
            basis: self.basis,
            d: self.d,
            p: self.p,
            rounds: self.rounds,
            shots,
            failures,
            p_shot,
            p_l,
            std_err,
        })
    }
}

pub fn run_memory_experiment(
    d: u32,
    basis: PauliKind,
    p: f64,
    rounds: usize,
    shots: usize,
    seed: u64,
) -> Result<SweepRow> {
    MemorySetup::new(d, basis, &NoiseModel::uniform(p), rounds)?.run(shots, seed)
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub distances: Vec<u32>,
    pub p_grid: Vec<f64>,
    pub shots: usize,
    pub bases: Vec<PauliKind>,
    /// Rounds per experiment; `None` means rounds = d.
    pub rounds: Option<usize>,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Crossing estimate for one memory basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub basis: PauliKind,
    pub error_type: PauliKind,
    /// Average of the pairwise intersections, if any pair crosses.
    pub p_th: Option<f64>,
    pub pairwise: Vec<PairCrossing>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCrossing {
    pub d_small: u32,
    pub d_large: u32,
    pub p: Option<f64>,
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        let mut ds = self.distances.clone();
        ds.sort_unstable();
        ds.dedup();
        if ds.len() < 2 {
            return Err(Error::InvalidArgument("a sweep needs at least two distances".into()));
        }
        if self.p_grid.is_empty() || self.bases.is_empty() || self.shots == 0 {
            return Err(Error::InvalidArgument("empty sweep grid".into()));
        }
        if self.p_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument("p outside [0, 1]".into()));
        }
        Ok(())
    }
}

/// Runs every (basis, d, p) cell. Each cell's seed depends only on the master
/// seed and the cell's coordinates.
pub fn threshold_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &basis in &cfg.bases {
        for &d in &cfg.distances {
            for &p in &cfg.p_grid {
                let rounds = cfg.rounds.unwrap_or(d as usize);
                let setup = MemorySetup::new(d, basis, &NoiseModel::uniform(p), rounds)?;
                let seed = derive_seed(cfg.seed, &[basis_tag(basis), d as u64, p.to_bits()]);
                rows.push(setup.run(cfg.shots, seed)?);
            }
        }
    }
    Ok(SweepResult { rows })
}

fn basis_tag(b: PauliKind) -> u64 {
    match b {
        PauliKind::X => 1,
        PauliKind::Z => 3,
    }
}

/// Where two curves, sampled on the same grid, cross in log-log coordinates:
/// the first grid interval on which `log a - log b` changes sign from
/// positive to non-positive, linearly interpolated in `log p`.
pub fn log_log_crossing(ps: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ps
        .iter()
        .zip(a.iter().zip(b))
        .filter(|&(&p, (&x, &y))| p > 0.0 && x > 0.0 && y > 0.0)
        .map(|(&p, (&x, &y))| (p.ln(), x.ln() - y.ln()))
        .collect();
    pts.windows(2).find_map(|w| {
        let ((l0, f0), (l1, f1)) = (w[0], w[1]);
        if f0 > 0.0 && f1 <= 0.0 {
            let t = f0 / (f0 - f1);
            Some((l0 + t * (l1 - l0)).exp())
        } else {
            None
        }
    })
}

impl SweepResult {
    pub fn rows_for(&self, basis: PauliKind, d: u32) -> Vec<&SweepRow> {
        let mut v: Vec<&SweepRow> = self.rows.iter().filter(|r| r.basis == basis && r.d == d).collect();
        v.sort_by(|a, b| a.p.total_cmp(&b.p));
        v
    }

    pub fn distances(&self, basis: PauliKind) -> Vec<u32> {
        let mut ds: Vec<u32> = self.rows.iter().filter(|r| r.basis == basis).map(|r| r.d).collect();
        ds.sort_unstable();
        ds.dedup();
        ds
    }

    /// Pairwise crossings of the per-round curves, averaged.
    pub fn crossing(&self, basis: PauliKind) -> Crossing {
        let ds = self.distances(basis);
        let mut pairwise = Vec::new();
        for (i, &da) in ds.iter().enumerate() {
            for &db in &ds[i + 1..] {
                let ra = self.rows_for(basis, da);
                let rb = self.rows_for(basis, db);
                // Only grid points present for both distances.
                let mut ps = Vec::new();
                let mut ya = Vec::new();
                let mut yb = Vec::new();
                for r in &ra {
                    if let Some(s) = rb.iter().find(|s| s.p == r.p) {
                        ps.push(r.p);
                        ya.push(r.p_l);
                        yb.push(s.p_l);
                    }
                }
                pairwise.push(PairCrossing {
                    d_small: da,
                    d_large: db,
                    p: log_log_crossing(&ps, &ya, &yb),
                });
            }
        }
        let found: Vec<f64> = pairwise.iter().filter_map(|c| c.p).collect();
        let p_th = (!found.is_empty()).then(|| found.iter().sum::<f64>() / found.len() as f64);
        Crossing {
            basis,
            error_type: basis.other(),
            p_th,
            pairwise,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "basis",
            "error_type",
            "d",
            "p",
            "rounds",
            "shots",
            "failures",
            "p_shot",
            "p_L",
            "err",
        ])?;
        for r in &self.rows {
            out.write_record([
                format!("{:?}", r.basis),
                format!("{:?}", r.error_type()),
                r.d.to_string(),
                r.p.to_string(),
                r.rounds.to_string(),
                r.shots.to_string(),
                r.failures.to_string(),
                format!("{:.8e}", r.p_shot),
                format!("{:.8e}", r.p_l),
                format!("{:.8e}", r.std_err),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Exact curves `p_L = C (p / p_th)^(a (d+1)/2)` on a grid, for checking the
/// crossing estimator and the fit.
pub fn synthetic_sweep(basis: PauliKind, distances: &[u32], p_grid: &[f64], c: f64, a: f64, p_th: f64) -> SweepResult {
    let mut rows = Vec::new();
    for &d in distances {
        for &p in p_grid {
            let k = (d as f64 + 1.0) / 2.0;
            let p_l = c * (p / p_th).powf(a * k);
            rows.push(SweepRow {
                basis,
                d,
                p,
                rounds: d as usize,
                shots: 0,
                failures: 0,
                p_shot: 0.0,
                p_l,
                std_err: 0.0,
            });
        }
    }
    SweepResult { rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_round_inverts_composition() {
        // Five rounds at 1% each compose to (1 - 0.98^5)/2 per shot.
        let ps: f64 = (1.0 - 0.98f64.powi(5)) / 2.0;
        let failures = (ps * 1e9).round() as usize;
        let (_, pl, err) = per_round(failures, 1_000_000_000, 5);
        assert!((pl - 0.01).abs() < 1e-8);
        assert!(err > 0.0);
        assert_eq!(per_round(0, 100, 3).1, 0.0);
    }

    #[test]
    fn synthetic_crossing_recovered() {
        let grid = [0.002, 0.003, 0.004, 0.005, 0.006];
        let s = synthetic_sweep(PauliKind::Z, &[3, 5, 7], &grid, 0.05, 0.8, 0.0037);
        let c = s.crossing(PauliKind::Z);
        let p = c.p_th.unwrap();
        assert!((p / 0.0037 - 1.0).abs() < 0.02, "{p}");
        assert_eq!(c.pairwise.len(), 3);
    }

    #[test]
    fn no_crossing_reported() {
        let grid = [0.002, 0.003, 0.004, 0.005];
        let s = synthetic_sweep(PauliKind::X, &[3, 5], &grid, 0.05, 1.0, 0.01);
        assert_eq!(s.crossing(PauliKind::X).p_th, None);
    }

    #[test]
    fn noiseless_memory_never_fails() {
        let r = run_memory_experiment(3, PauliKind::Z, 0.0, 3, 2000, 5).unwrap();
        assert_eq!((r.failures, r.p_l), (0, 0.0));
        assert!(run_memory_experiment(3, PauliKind::Z, 0.0, 3, 0, 5).is_err());
    }
}
