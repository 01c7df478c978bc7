use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cutpoints::count_sigma_cutpoints;
use crate::gibbs::sample_reference_with;
use crate::graph::{ModelParams, ParamsError};
use crate::scalar::PathExponent;

/// Distribution of the 1-cutpoint density under the reference measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutpointDensity {
    pub n: usize,
    pub gamma: f64,
    pub c1: f64,
    /// Count of 1-cutpoints divided by `N`, one per sample.
    pub densities: Vec<f64>,
    pub mean: f64,
    /// Fraction of samples with density below `c1`.
    pub fraction_below: f64,
}

/// Sample `samples` reference graphs and record their 1-cutpoint densities.
///
/// The interesting regime is `γ < 1`, where the density tends to zero; other
/// positive `γ` are accepted so the trend can be followed across regimes.
pub fn cutpoint_density_experiment(
    gamma: f64,
    n: usize,
    samples: usize,
    c1: f64,
    seed: u64,
) -> Result<CutpointDensity, ParamsError> {
    let params = ModelParams::new(n, gamma, 0.0, PathExponent::Finite(1.0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let densities: Vec<f64> = (0..samples)
        .map(|_| {
            let g = sample_reference_with(&params, &mut rng);
            count_sigma_cutpoints(&g, 1) as f64 / n as f64
        })
        .collect();
    let mean = densities.iter().sum::<f64>() / samples.max(1) as f64;
    let below = densities.iter().filter(|&&d| d < c1).count();
    Ok(CutpointDensity {
        n,
        gamma,
        c1,
        mean,
        fraction_below: below as f64 / samples.max(1) as f64,
        densities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suppressed_edges_give_full_density() {
        let d = cutpoint_density_experiment(50.0, 128, 5, 0.01, 3).unwrap();
        assert!(d.densities.iter().all(|&x| x == 127.0 / 128.0));
        assert_eq!(d.fraction_below, 0.0);
    }

    #[test]
    fn small_gamma_is_sparse_in_cutpoints() {
        let d = cutpoint_density_experiment(0.05, 256, 5, 0.5, 3).unwrap();
        assert!(d.mean < 0.05, "{}", d.mean);
        assert_eq!(d.fraction_below, 1.0);
    }
}
