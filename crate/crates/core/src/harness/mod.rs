//! Estimators, parameter sweeps, the stretched-tail deviation check and
//! persistence helpers.
//!
//! The asymptotic exponents are only reported next to desk-scale estimates;
//! nothing here asserts convergence.

mod config;
mod density;
mod estimate;
mod ldp;
mod manifest;
mod stats;

pub use config::{ConfigError, SweepCell, SweepConfig, DEFAULT_BURN_IN, DEFAULT_THIN};
pub use density::{cutpoint_density_experiment, CutpointDensity};
pub use estimate::{
    estimate_exponent, mcmc_expectations, predicted_exponent, staircase_sweep, sweep, write_csv, ChainAverages,
    ExponentEstimate, SweepError, CSV_HEADER, SPLIT_THRESHOLD,
};
pub use ldp::{
    exponential_sum_tail, ldp_check, stretched_mean, Estimator, LdpConfig, LdpError, LdpRow,
};
pub use manifest::{Manifest, MANIFEST_FILE};
pub use stats::{batch_means, MeanSe};

/// Seed of chain `chain` in cell `cell`, a fixed function of the base seed.
pub fn derive_seed(base: u64, cell: u64, chain: u64) -> u64 {
    // splitmix64 finalizer over a packed index
    let mut z = base ^ (cell << 20 | chain).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
