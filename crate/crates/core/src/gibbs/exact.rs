use std::collections::BTreeMap;

use serde::Serialize;

use super::{energy, ln_one_minus_exp_neg, ChainState};
use crate::distance::apsp;
use crate::graph::{Edge, Graph, ModelParams};
use crate::scalar::{CompensatedSum, Real};

/// Largest number of non-ground pairs enumerated exhaustively.
pub const MAX_PAIRS: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExactError {
    #[error("N = {n} has {pairs} non-ground pairs, more than {max}")]
    TooLarge { n: usize, pairs: usize, max: usize },
}

#[derive(Debug, Clone)]
pub struct ExactState {
    /// Bit `i` set iff the `i`-th candidate pair is present.
    pub mask: u32,
    pub graph: Graph,
    /// `ln` of the unnormalized Gibbs weight `P_ref(g) exp(-N^b H_p(g))`.
    pub log_weight: f64,
    pub h_p: f64,
    pub energy: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactSummary {
    pub n: usize,
    pub states: usize,
    /// `Z = E_ref[exp(-N^b H_p)]`.
    pub partition_value: f64,
    pub log_partition: f64,
    /// Gibbs means of `h_p`, `edges`, `cost` and `energy`.
    pub expectations: BTreeMap<String, f64>,
}

/// Non-ground pairs in lexicographic order.
pub fn candidate_pairs(n: usize) -> Vec<Edge> {
    let mut out = Vec::new();
    for x in 0..n {
        for y in x + 2..n {
            out.push(Edge::new(x, y));
        }
    }
    out
}

fn check_size(n: usize) -> Result<Vec<Edge>, ExactError> {
    let pairs = candidate_pairs(n);
    if pairs.len() > MAX_PAIRS {
        return Err(ExactError::TooLarge { n, pairs: pairs.len(), max: MAX_PAIRS });
    }
    Ok(pairs)
}

/// Every graph on `N` vertices with its Gibbs weight.
pub fn exact_states<T: Real>(params: &ModelParams<T>) -> Result<Vec<ExactState>, ExactError> {
    let pairs = check_size(params.n)?;
    // ln P_ref(empty) = Σ ln(1 - q_e); each present edge adds its log-odds
    let base: CompensatedSum<T> = pairs
        .iter()
        .map(|e| ln_one_minus_exp_neg(T::of_usize(e.len()).powf(params.gamma)))
        .collect();
    let base = base.value();
    let gamma = params.gamma;
    let mut states = Vec::with_capacity(1 << pairs.len());
    for mask in 0u32..(1u32 << pairs.len()) {
        let edges = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e);
        let graph = Graph::with_edges(params.n, edges).expect("distinct long edges");
        let cache = apsp(&graph, params.p);
        let u = energy(&graph, &cache, params);
        let h = cache.h_p();
        let log_weight = base - u;
        states.push(ExactState {
            mask,
            log_weight: log_weight.to_f64_lossy(),
            h_p: h.to_f64_lossy(),
            energy: u.to_f64_lossy(),
            cost: graph.cost(gamma).to_f64_lossy(),
            graph,
        });
    }
    Ok(states)
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Partition function and Gibbs expectations by exhaustive enumeration.
pub fn enumerate_exact<T: Real>(params: &ModelParams<T>) -> Result<ExactSummary, ExactError> {
    let states = exact_states(params)?;
    let log_z = log_sum_exp(states.iter().map(|s| s.log_weight));
    let mut acc: BTreeMap<&str, CompensatedSum<f64>> = BTreeMap::new();
    for s in &states {
        let w = (s.log_weight - log_z).exp();
        for (key, v) in [
            ("h_p", s.h_p),
            ("edges", s.graph.num_long_edges() as f64),
            ("cost", s.cost),
            ("energy", s.energy),
        ] {
            acc.entry(key).or_default().add(w * v);
        }
    }
    Ok(ExactSummary {
        n: params.n,
        states: states.len(),
        partition_value: log_z.exp(),
        log_partition: log_z,
        expectations: acc.into_iter().map(|(k, v)| (k.to_string(), v.value())).collect(),
    })
}

/// Normalized Gibbs probabilities, in state order.
pub fn gibbs_probabilities(states: &[ExactState]) -> Vec<f64> {
    let log_z = log_sum_exp(states.iter().map(|s| s.log_weight));
    states.iter().map(|s| (s.log_weight - log_z).exp()).collect()
}

/// The Metropolis kernel as a dense row-stochastic matrix over
/// `exact_states`, using the same `ΔU` as the chain.
pub fn transition_matrix<T: Real>(params: &ModelParams<T>) -> Result<(Vec<ExactState>, Vec<Vec<f64>>), ExactError> {
    let pairs = check_size(params.n)?;
    let states = exact_states(params)?;
    let m = pairs.len();
    let mut matrix = vec![vec![0.0; states.len()]; states.len()];
    for (i, s) in states.iter().enumerate() {
        if m == 0 {
            matrix[i][i] = 1.0;
            continue;
        }
        let chain = ChainState::from_graph(*params, s.graph.clone(), 0);
        let mut stay = CompensatedSum::default();
        stay.add(1.0);
        for (bit, &e) in pairs.iter().enumerate() {
            let du = chain.delta_energy(e).to_f64_lossy();
            let p = (-du).exp().min(1.0) / m as f64;
            let j = (s.mask ^ (1 << bit)) as usize;
            matrix[i][j] = p;
            stay.add(-p);
        }
        matrix[i][i] = stay.value();
    }
    Ok((states, matrix))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::PathExponent;

    fn params(n: usize, gamma: f64, b: f64, p: PathExponent<f64>) -> ModelParams<f64> {
        ModelParams::new(n, gamma, b, p).unwrap()
    }

    #[test]
    fn partition_n3() {
        let s = enumerate_exact(&params(3, 1.0, 0.0, PathExponent::Finite(1.0))).unwrap();
        assert_eq!(s.states, 2);
        // oracle: (1-e^-2) e^{-8/9} + e^-2 e^{-6/9}
        let z = (1.0 - (-2.0f64).exp()) * (-8.0f64 / 9.0).exp() + (-2.0f64).exp() * (-6.0f64 / 9.0).exp();
        assert!((s.partition_value - z).abs() < 1e-12);
        assert!((s.partition_value - 0.424_957_743).abs() < 1e-9);
    }

    #[test]
    fn b_zero_tilt_free_limit() {
        // with N^b small relative to edge costs the mean edge count tracks the reference
        let s = enumerate_exact(&params(5, 1.0, -30.0, PathExponent::Finite(1.0))).unwrap();
        let expected: f64 = super::super::expected_edge_count(5, 1.0);
        assert!((s.expectations["edges"] - expected).abs() < 1e-9);
        assert!((s.partition_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn too_large_is_rejected() {
        assert!(enumerate_exact(&params(8, 1.0, 0.0, PathExponent::Infinite)).is_err());
        assert_eq!(candidate_pairs(7).len(), 15);
    }

    #[test]
    fn gibbs_is_stationary() {
        let pr = params(5, 0.7, 0.5, PathExponent::Finite(2.0));
        let (states, p) = transition_matrix(&pr).unwrap();
        let pi = gibbs_probabilities(&states);
        for row in &p {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&x| x >= 0.0));
        }
        for j in 0..states.len() {
            let v: f64 = (0..states.len()).map(|i| pi[i] * p[i][j]).sum();
            assert!((v - pi[j]).abs() < 1e-12);
        }
    }
}
