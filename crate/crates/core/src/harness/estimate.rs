use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ConfigError, SweepCell, SweepConfig};
use super::derive_seed;
use super::stats::{batch_means, MeanSe};
use crate::constructions::{critical_exponent, theoretical_exponent};
use crate::gibbs::{ChainError, ChainState};
use crate::graph::ModelParams;
use crate::scalar::PathExponent;

/// Split-chain disagreement, in standard errors, above which a cell is flagged.
pub const SPLIT_THRESHOLD: f64 = 5.0;

pub const CSV_HEADER: [&str; 9] = ["n", "gamma", "b", "p", "estimate", "stderr", "prediction", "seed", "manifest_hash"];

/// Batches per chain for the standard error.
const BATCHES_PER_CHAIN: usize = 10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("staircase sweeps need gamma = 1, got {0}")]
    NotCritical(f64),
}

/// Estimate of `log H_p / log N` for one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentEstimate {
    pub n: usize,
    pub gamma: f64,
    pub b: f64,
    pub p: PathExponent<f64>,
    pub mean_log_ratio: f64,
    pub std_error: f64,
    pub predicted: Option<f64>,
    /// Seed of the cell's first chain; the others follow from `derive_seed`.
    pub seed: u64,
    pub chains: usize,
    pub samples: usize,
    /// First-half versus second-half disagreement in standard errors.
    pub split_z: f64,
    pub flagged: bool,
}

/// The closed-form exponent for `(γ, b, p)`: the critical staircase at
/// `γ = 1` and the two-regime formula otherwise.
pub fn predicted_exponent(gamma: f64, b: f64, p: &PathExponent<f64>) -> Option<f64> {
    if gamma == 1.0 {
        critical_exponent(b, p)
    } else {
        theoretical_exponent(gamma, b).ok()
    }
}

fn chain_samples(params: ModelParams<f64>, seed: u64, config: &SweepConfig) -> Result<Vec<f64>, ChainError> {
    let mut state = ChainState::new(params, seed);
    let ln_n = (params.n as f64).ln();
    for _ in 0..config.burn_in {
        state.step_audited()?;
    }
    let mut out = Vec::with_capacity(((config.steps - config.burn_in) / config.thin) as usize);
    for _ in config.burn_in..config.steps {
        state.step_audited()?;
        if (state.step_count() - config.burn_in) % config.thin == 0 {
            out.push(state.h_p().ln() / ln_n);
        }
    }
    Ok(out)
}

fn batch_averages(samples: &[f64], batches: usize) -> Vec<f64> {
    let batches = batches.min(samples.len()).max(1);
    let size = samples.len() / batches;
    if size == 0 {
        return Vec::new();
    }
    samples.chunks_exact(size).take(batches).map(|c| c.iter().sum::<f64>() / size as f64).collect()
}

/// Run the configured chains for one cell and summarize them.
pub fn estimate_exponent(cell: &SweepCell, config: &SweepConfig) -> Result<ExponentEstimate, SweepError> {
    config.validate()?;
    let params = cell.params;
    let idx = cell.index as u64;
    let per_chain: Vec<Vec<f64>> = (0..config.chains_per_cell)
        .into_par_iter()
        .map(|c| chain_samples(params, derive_seed(config.seed_base, idx, c as u64), config))
        .collect::<Result<_, _>>()?;
    let mut all = Vec::new();
    let (mut first, mut second) = (Vec::new(), Vec::new());
    for s in &per_chain {
        let b = batch_averages(s, BATCHES_PER_CHAIN);
        let half = b.len() / 2;
        first.extend_from_slice(&b[..half]);
        second.extend_from_slice(&b[half..]);
        all.extend(b);
    }
    let est = batch_means(&all);
    let (h1, h2) = (batch_means(&first), batch_means(&second));
    let split_se = (h1.se.powi(2) + h2.se.powi(2)).sqrt();
    let split_z = if split_se > 0.0 {
        (h1.mean - h2.mean).abs() / split_se
    } else if h1.mean == h2.mean {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(ExponentEstimate {
        n: params.n,
        gamma: params.gamma,
        b: params.b,
        p: params.p,
        mean_log_ratio: est.mean,
        std_error: est.se,
        predicted: predicted_exponent(params.gamma, params.b, &params.p),
        seed: derive_seed(config.seed_base, idx, 0),
        chains: config.chains_per_cell,
        samples: per_chain.iter().map(Vec::len).sum(),
        split_z,
        flagged: split_z.is_nan() || split_z > SPLIT_THRESHOLD,
    })
}

/// Every cell of `config`, in grid order. Cells run in parallel.
pub fn sweep(config: &SweepConfig) -> Result<Vec<ExponentEstimate>, SweepError> {
    let cells = config.cells()?;
    cells.par_iter().map(|c| estimate_exponent(c, config)).collect()
}

/// `sweep` restricted to the critical case `γ = 1`.
pub fn staircase_sweep(config: &SweepConfig) -> Result<Vec<ExponentEstimate>, SweepError> {
    if config.gamma != 1.0 {
        return Err(SweepError::NotCritical(config.gamma));
    }
    sweep(config)
}

/// CSV with a fixed header; missing predictions are written as `none`.
pub fn write_csv<W: Write>(out: W, rows: &[ExponentEstimate], manifest_hash: &str) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.gamma.to_string(),
            r.b.to_string(),
            r.p.to_string(),
            r.mean_log_ratio.to_string(),
            r.std_error.to_string(),
            r.predicted.map_or_else(|| "none".to_string(), |v| v.to_string()),
            r.seed.to_string(),
            manifest_hash.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Chain means of `H_p`, long-edge count and cost with batch-means errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainAverages {
    pub h_p: MeanSe,
    pub edges: MeanSe,
    pub cost: MeanSe,
    pub acceptance: f64,
}

/// Average the observables over every step after `burn_in`.
pub fn mcmc_expectations(
    params: ModelParams<f64>,
    steps: u64,
    burn_in: u64,
    seed: u64,
    batches: usize,
) -> Result<ChainAverages, ChainError> {
    if steps == 0 || batches == 0 {
        return Err(ChainError::NoSteps);
    }
    let mut state = ChainState::new(params, seed);
    for _ in 0..burn_in {
        state.step_audited()?;
    }
    let size = (steps / batches as u64).max(1);
    let mut sums = [Vec::with_capacity(batches), Vec::with_capacity(batches), Vec::with_capacity(batches)];
    let mut acc = [0.0f64; 3];
    for i in 1..=size * batches as u64 {
        state.step_audited()?;
        acc[0] += state.h_p();
        acc[1] += state.graph().num_long_edges() as f64;
        acc[2] += state.cost();
        if i % size == 0 {
            for (s, a) in sums.iter_mut().zip(acc.iter_mut()) {
                s.push(*a / size as f64);
                *a = 0.0;
            }
        }
    }
    let [h, e, c] = sums;
    Ok(ChainAverages {
        h_p: batch_means(&h),
        edges: batch_means(&e),
        cost: batch_means(&c),
        acceptance: state.acceptance_rate(),
    })
}
