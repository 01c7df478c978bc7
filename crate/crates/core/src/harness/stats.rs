use serde::Serialize;

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

impl MeanSe {
    /// `|mean - target| ≤ k·se`, with a rounding allowance for `se = 0`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se + 1e-12 * target.abs().max(1.0)
    }

    /// Standardized distance to `target`.
    pub fn z(&self, target: f64) -> f64 {
        (self.mean - target) / self.se
    }
}

/// Batch-means estimate from per-batch averages of equal-size batches.
pub fn batch_means(batches: &[f64]) -> MeanSe {
    let b = batches.len();
    if b == 0 {
        return MeanSe { mean: f64::NAN, se: f64::NAN };
    }
    let mean = batches.iter().sum::<f64>() / b as f64;
    if b == 1 {
        return MeanSe { mean, se: f64::INFINITY };
    }
    let var = batches.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
    MeanSe { mean, se: (var / b as f64).sqrt() }
}
