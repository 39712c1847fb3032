//! Threshold sweeps, scaling fits and injection analysis built on the
//! simulator and decoder.

pub mod fit;
pub mod injection;
pub mod memory;
pub mod tomography;

pub use fit::{fit_points, fit_scaling, FitParams, FitPoint};
pub use injection::{
    acceptance_table, first_order_infidelity, magic_state_report, run_injection_grid, run_injection_point, GridConfig,
    InjectionGrid, InjectionPoint, MagicReport,
};
pub use memory::{run_memory_experiment, threshold_sweep, Crossing, SweepConfig, SweepResult, SweepRow};
pub use tomography::{
    bootstrap, fidelity, fidelity_general, tomography, DensityMatrix, DensityMatrix2, FidelityEstimate,
    TomographyCounts,
};

/// Derives an independent seed from a master seed and a job key (SplitMix64
/// finalizer applied to each key word in turn).
pub fn derive_seed(seed: u64, key: &[u64]) -> u64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    key.iter().fold(mix(seed), |acc, &k| mix(acc ^ mix(k)))
}
