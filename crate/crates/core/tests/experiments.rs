use std::f64::consts::PI;

use hhqec::experiments::injection::{distance3_layout, eigenstates, reference_acceptance_rows};
use hhqec::experiments::memory::MemorySetup;
use hhqec::experiments::{
    acceptance_table, magic_state_report, run_injection_grid, run_injection_point, threshold_sweep, GridConfig,
    InjectionPoint, SweepConfig,
};
use hhqec::lattice::PauliKind;
use hhqec::noise::NoiseModel;

#[test]
fn noiseless_grid_reproduces_bloch_surfaces() {
    let shots = 4000;
    let grid = run_injection_grid(&GridConfig {
        thetas: vec![0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI],
        phis: vec![0.0, PI / 3.0, 5.0 * PI / 4.0],
        shots,
        noise: NoiseModel::noiseless(),
        seed: 5,
        resamples: 200,
    })
    .unwrap();
    let tol = 4.0 / (shots as f64).sqrt();
    assert_eq!(grid.acceptance(), 1.0);
    for p in &grid.points {
        let a = p.analysis.as_ref().unwrap();
        let want = p.ideal().bloch;
        for i in 0..3 {
            assert!((a.raw_bloch[i] - want[i]).abs() < tol, "{p:?}");
        }
        assert!((a.fidelity.value - 1.0).abs() < 6.0 / (shots as f64).sqrt());
    }
}

#[test]
fn grid_output_is_reproducible() {
    let cfg = GridConfig {
        thetas: vec![PI / 4.0],
        phis: vec![0.0, PI / 2.0],
        shots: 3000,
        noise: NoiseModel::uniform(2e-3),
        seed: 8,
        resamples: 50,
    };
    let a = run_injection_grid(&cfg).unwrap();
    let b = run_injection_grid(&cfg).unwrap();
    let csv = |g: &hhqec::experiments::InjectionGrid| {
        let mut v = Vec::new();
        g.write_counts_csv(&mut v).unwrap();
        g.write_fidelity_csv(&mut v).unwrap();
        v
    };
    assert_eq!(csv(&a), csv(&b));
}

#[test]
fn acceptance_falls_with_noise() {
    let layout = distance3_layout();
    let rates: Vec<f64> = [1e-3, 3e-3, 1e-2]
        .iter()
        .map(|&p| {
            run_injection_point(&layout, PI / 2.0, 0.0, &NoiseModel::uniform(p), 20_000, 2)
                .unwrap()
                .acceptance()
        })
        .collect();
    assert!(rates[0] < 1.0);
    assert!(rates[0] > rates[1] && rates[1] > rates[2], "{rates:?}");
}

#[test]
fn eigenstates_are_injected_best() {
    let layout = distance3_layout();
    let noise = NoiseModel::uniform(3e-3);
    let fid = |theta: f64| {
        let counts = run_injection_point(&layout, theta, 0.0, &noise, 100_000, 4).unwrap();
        let mut pt = InjectionPoint {
            theta,
            phi: 0.0,
            counts,
            analysis: None,
        };
        pt.analyze(200, 1).unwrap();
        pt.analysis.unwrap().fidelity
    };
    let mid = fid(PI / 2.0);
    for theta in [0.0, PI] {
        let f = fid(theta);
        assert!(
            f.value + 3.0 * f.std_err.max(mid.std_err) >= mid.value,
            "{f:?} vs {mid:?}"
        );
    }
}

#[test]
fn acceptance_table_shape() {
    let rows = acceptance_table(&NoiseModel::calibrated_preset(), 5000, 3).unwrap();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!(r.rates.iter().all(|&x| x > 0.0 && x < 1.0));
    }
    let refs = reference_acceptance_rows();
    assert!(refs.iter().all(|r| r.reference));
    assert_eq!(refs[0].label, eigenstates()[0].0);
}

#[test]
fn noiseless_magic_states_pass_distillation() {
    let r = magic_state_report(&NoiseModel::noiseless(), 5000, 1, 100, true).unwrap();
    assert_eq!(r.entries.len(), 2);
    for e in &r.entries {
        assert_eq!(e.above_threshold, Some(true));
        assert!((e.fidelity.unwrap().value - 1.0).abs() < 6.0 / 5000f64.sqrt());
    }
    assert!(r.reference.iter().any(|row| row.value == "0.8806 ± 0.0002"));
}

#[test]
fn logical_z_errors_dominate_below_threshold() {
    // X-basis memory is limited by logical Z errors, Z-basis memory by
    // logical X errors.
    let shots = 60_000;
    let z = MemorySetup::new(5, PauliKind::X, &NoiseModel::uniform(2e-3), 5)
        .unwrap()
        .run(shots, 1)
        .unwrap();
    let x = MemorySetup::new(5, PauliKind::Z, &NoiseModel::uniform(2e-3), 5)
        .unwrap()
        .run(shots, 1)
        .unwrap();
    let sigma = (z.std_err.powi(2) + x.std_err.powi(2)).sqrt();
    assert!(z.p_l - x.p_l > 3.0 * sigma, "{} vs {}", z.p_l, x.p_l);
}

#[test]
fn sweep_is_deterministic_and_has_zero_row() {
    let cfg = SweepConfig {
        distances: vec![3, 5],
        p_grid: vec![0.0, 0.004],
        shots: 2000,
        bases: vec![PauliKind::Z],
        rounds: None,
        seed: 12,
    };
    let a = threshold_sweep(&cfg).unwrap();
    assert_eq!(a.rows.len(), 4);
    assert!(a.rows.iter().filter(|r| r.p == 0.0).all(|r| r.p_l == 0.0));
    let (mut x, mut y) = (Vec::new(), Vec::new());
    a.write_csv(&mut x).unwrap();
    threshold_sweep(&cfg).unwrap().write_csv(&mut y).unwrap();
    assert_eq!(x, y);
    assert!(threshold_sweep(&SweepConfig {
        distances: vec![3],
        ..cfg
    })
    .is_err());
}
