use hhqec::circuit::{build_validation_patch, Basis};
use hhqec::noise::{apply_noise, NoiseModel};
use hhqec::sim::dense::MIXED_QUBIT_LIMIT;
use hhqec::sim::frame::injected_frame_sample;
use hhqec::sim::validation::{chi_square, compare_single_mechanisms, dense_outcome_distribution, outcome_histogram};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const THETA: f64 = 1.1;
const PHI: f64 = 0.7;

#[test]
fn validation_patch_fits_the_mixed_oracle() {
    let inj = build_validation_patch(THETA, PHI, Basis::Y).unwrap();
    assert!(inj.circuit.num_qubits() <= MIXED_QUBIT_LIMIT);
    assert!(inj.circuit.num_detectors() >= 2);
}

#[test]
fn every_single_mechanism_agrees() {
    for basis in Basis::ALL {
        let inj = build_validation_patch(THETA, PHI, basis).unwrap();
        let noisy = apply_noise(&inj.circuit, &NoiseModel::uniform(0.01)).unwrap();
        let r = compare_single_mechanisms(&inj, &noisy, 256, 1).unwrap();
        assert!(r.checked > 100, "{basis:?}: only {} mechanisms", r.checked);
        assert!(r.mismatches.is_empty(), "{basis:?}: {:#?}", r.mismatches);
    }
}

#[test]
fn multi_error_distribution_passes_chi_square() {
    for (k, basis) in Basis::ALL.into_iter().enumerate() {
        let inj = build_validation_patch(THETA, PHI, basis).unwrap();
        let noisy = apply_noise(&inj.circuit, &NoiseModel::uniform(0.02)).unwrap();
        let expected = dense_outcome_distribution(&noisy).unwrap();
        let total: f64 = expected.values().sum();
        assert!((total - 1.0).abs() < 1e-10);
        let batch = injected_frame_sample(&inj, &noisy, 100_000, 40 + k as u64).unwrap();
        let observed = outcome_histogram(&batch).unwrap();
        let (stat, dof) = chi_square(&observed, &expected, 5.0);
        assert!(dof >= 4);
        let p = 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(stat);
        assert!(p > 1e-3, "{basis:?}: chi2 = {stat} with {dof} dof, p = {p}");
        // Total variation distance as a second, coarser view.
        let tv: f64 = expected
            .iter()
            .map(|(key, &q)| (q - *observed.get(key).unwrap_or(&0) as f64 / 1e5).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.01, "{basis:?}: tv = {tv}");
    }
}
