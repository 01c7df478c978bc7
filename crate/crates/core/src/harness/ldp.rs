use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::derive_seed;

/// Trials per independently seeded work unit.
const CHUNK: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    /// Hit frequency of the event under the original law.
    Naive,
    /// Exponential tilt to the threshold mean with likelihood-ratio weights;
    /// only available for `γ = 1`.
    Tilted,
    /// `Tilted` when `γ = 1`, `Naive` otherwise.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdpConfig {
    pub gamma: f64,
    pub theta: f64,
    pub m: f64,
    pub n_grid: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub estimator: Estimator,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LdpError {
    #[error("gamma must lie in (0, 1], got {0}")]
    Gamma(f64),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("the tilted estimator needs gamma = 1")]
    TiltNeedsExponential,
}

/// One row of the deviation table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdpRow {
    pub n: usize,
    pub trials: u64,
    pub estimator: Estimator,
    /// Trials in which the event occurred, under whichever law was sampled.
    pub hits: u64,
    /// Estimate of `P[Σ X_i ≥ (E X + m) N]`, in `[0, 1]`.
    pub probability: f64,
    pub std_error: f64,
    /// `-ln(probability) / N^γ`; a lower bound when `lower_bound` is set.
    pub rate: f64,
    /// No hits: `rate` comes from the rule-of-three bound `p ≤ 3/trials`.
    pub lower_bound: bool,
}

/// `E X = Γ(1 + 1/γ) θ^{-1/γ}` for `P[X > r] = exp(-θ r^γ)`.
pub fn stretched_mean(gamma: f64, theta: f64) -> f64 {
    libm::tgamma(1.0 + 1.0 / gamma) * theta.powf(-1.0 / gamma)
}

/// `P[Σ_{i<N} X_i ≥ a]` for i.i.d. exponential(θ) variables, via the
/// Poisson identity `P[Gamma(N, θ) ≥ a] = P[Poisson(θa) ≤ N-1]`, in log space.
pub fn exponential_sum_tail(n: usize, theta: f64, a: f64) -> f64 {
    let lambda = theta * a;
    if lambda <= 0.0 {
        return 1.0;
    }
    let ln_l = lambda.ln();
    let mut terms = Vec::with_capacity(n);
    let mut ln_fact = 0.0;
    for k in 0..n {
        if k > 0 {
            ln_fact += (k as f64).ln();
        }
        terms.push(k as f64 * ln_l - lambda - ln_fact);
    }
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()).exp().min(1.0)
}

fn validate(cfg: &LdpConfig) -> Result<Estimator, LdpError> {
    if !(cfg.gamma > 0.0 && cfg.gamma <= 1.0) {
        return Err(LdpError::Gamma(cfg.gamma));
    }
    if !(cfg.theta > 0.0) {
        return Err(LdpError::NonPositive("theta"));
    }
    if !(cfg.m > 0.0) {
        return Err(LdpError::NonPositive("m"));
    }
    if cfg.trials == 0 {
        return Err(LdpError::NonPositive("trials"));
    }
    if cfg.n_grid.iter().any(|&n| n == 0) {
        return Err(LdpError::NonPositive("n"));
    }
    match cfg.estimator {
        Estimator::Tilted if cfg.gamma != 1.0 => Err(LdpError::TiltNeedsExponential),
        Estimator::Auto if cfg.gamma == 1.0 => Ok(Estimator::Tilted),
        Estimator::Auto => Ok(Estimator::Naive),
        e => Ok(e),
    }
}

/// Sums `(hits, Σ w, Σ w²)` over `trials` trials of one work unit.
fn run_chunk(cfg: &LdpConfig, est: Estimator, n: usize, trials: u64, seed: u64) -> (u64, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = (stretched_mean(cfg.gamma, cfg.theta) + cfg.m) * n as f64;
    let (mut hits, mut sw, mut sw2) = (0u64, 0.0, 0.0);
    match est {
        Estimator::Naive => {
            let inv_g = 1.0 / cfg.gamma;
            for _ in 0..trials {
                let mut s = 0.0;
                for _ in 0..n {
                    let u: f64 = 1.0 - rng.gen::<f64>();
                    s += (-u.ln() / cfg.theta).powf(inv_g);
                }
                if s >= a {
                    hits += 1;
                }
            }
            (hits, hits as f64, hits as f64)
        }
        Estimator::Tilted | Estimator::Auto => {
            // sample exponential(λ) with mean a/N; weight (θ/λ)^N e^{-(θ-λ)S}
            let lambda = n as f64 / a;
            let ln_ratio = n as f64 * (cfg.theta / lambda).ln();
            for _ in 0..trials {
                let mut s = 0.0;
                for _ in 0..n {
                    let u: f64 = 1.0 - rng.gen::<f64>();
                    s -= u.ln();
                }
                let s = s / lambda;
                if s >= a {
                    hits += 1;
                    let w = (ln_ratio - (cfg.theta - lambda) * s).exp();
                    sw += w;
                    sw2 += w * w;
                }
            }
            (hits, sw, sw2)
        }
    }
}

/// Monte Carlo estimate of `P[Σ X_i ≥ (E X + m) N]` for each `N`, with
/// `P[X > r] = exp(-θ r^γ)` sampled by inverse transform.
///
/// Results depend only on the configuration: trials are split into fixed
/// chunks with derived seeds, whatever the thread count.
pub fn ldp_check(cfg: &LdpConfig) -> Result<Vec<LdpRow>, LdpError> {
    let est = validate(cfg)?;
    Ok(cfg
        .n_grid
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let chunks = cfg.trials.div_ceil(CHUNK);
            let parts: Vec<(u64, f64, f64)> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let t = CHUNK.min(cfg.trials - c * CHUNK);
                    run_chunk(cfg, est, n, t, derive_seed(cfg.seed, i as u64, c))
                })
                .collect();
            let hits: u64 = parts.iter().map(|p| p.0).sum();
            let sw: f64 = parts.iter().map(|p| p.1).sum();
            let sw2: f64 = parts.iter().map(|p| p.2).sum();
            let t = cfg.trials as f64;
            let probability = (sw / t).clamp(0.0, 1.0);
            let var = (sw2 / t - probability * probability).max(0.0);
            let std_error = (var / t).sqrt();
            let scale = (n as f64).powf(cfg.gamma);
            let (rate, lower_bound) = if hits == 0 {
                ((t / 3.0).ln() / scale, true)
            } else {
                (-probability.ln() / scale, false)
            };
            LdpRow { n, trials: cfg.trials, estimator: est, hits, probability, std_error, rate, lower_bound }
        })
        .collect())
}
