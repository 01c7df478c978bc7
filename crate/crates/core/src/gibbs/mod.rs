//! Reference measure, Gibbs energy, a Metropolis edge-flip chain and exact
//! enumeration for tiny `N`.
//!
//! Under the reference measure each pair at distance `ℓ ≥ 2` is present
//! independently with probability `exp(-ℓ^γ)`. The Gibbs measure reweights
//! by `exp(-N^b H_p)`, which on the graph level is `exp(-U(g))` with
//! `U(g) = N^b H_p(g) + Σ_e (|e|^γ + ln(1 - exp(-|e|^γ)))`.

mod chain;
mod exact;

pub use chain::{
    run_chain, write_jsonl, ChainError, ChainHeader, ChainRecord, ChainState, StepOutcome,
    AUDIT_INTERVAL, AUDIT_TOLERANCE,
};
pub use exact::{
    candidate_pairs, enumerate_exact, exact_states, gibbs_probabilities, transition_matrix, ExactError, ExactState,
    ExactSummary, MAX_PAIRS,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distance::DistanceCache;
use crate::graph::{Edge, Graph, ModelParams};
use crate::scalar::{CompensatedSum, Real};

/// `ln(1 - exp(-x))` for `x > 0`, accurate at both ends.
pub fn ln_one_minus_exp_neg<T: Real>(x: T) -> T {
    if x > T::LN_2() {
        (-(-x).exp()).ln_1p()
    } else {
        (-(-x).exp_m1()).ln()
    }
}

/// Log-odds of presence `-ℓ^γ - ln(1 - exp(-ℓ^γ))`.
pub fn edge_log_odds<T: Real>(length: usize, gamma: T) -> T {
    -edge_energy(length, gamma)
}

/// Energy contribution `ℓ^γ + ln(1 - exp(-ℓ^γ))` of one long edge.
pub fn edge_energy<T: Real>(length: usize, gamma: T) -> T {
    let x = T::of_usize(length).powf(gamma);
    x + ln_one_minus_exp_neg(x)
}

/// Presence probability `exp(-ℓ^γ)`; flushes to zero for huge `ℓ^γ`.
pub fn presence_probability<T: Real>(length: usize, gamma: T) -> T {
    (-T::of_usize(length).powf(gamma)).exp()
}

/// `U(g) = N^b H_p(g) + Σ_e (|e|^γ + ln(1 - exp(-|e|^γ)))`.
pub fn energy<T: Real>(graph: &Graph, cache: &DistanceCache<T>, params: &ModelParams<T>) -> T {
    let edges: CompensatedSum<T> = graph.long_edges().map(|e| edge_energy(e.len(), params.gamma)).collect();
    params.n_pow_b() * crate::distance::avg_path_length(cache, params.p) + edges.value()
}

/// A draw from the reference measure, reproducible from `seed`.
pub fn sample_reference<T: Real>(params: &ModelParams<T>, seed: u64) -> Graph {
    sample_reference_with(params, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Reference sample from a caller-supplied generator.
///
/// Pairs of equal length are scanned with geometric skips, so the cost is
/// proportional to the number of edges drawn plus `N`.
pub fn sample_reference_with<T: Real, R: Rng + ?Sized>(params: &ModelParams<T>, rng: &mut R) -> Graph {
    let n = params.n;
    let mut edges = Vec::new();
    for len in 2..n {
        let q = presence_probability::<T>(len, params.gamma).to_f64_lossy();
        if q <= 0.0 {
            continue;
        }
        let log_miss = (-q).ln_1p();
        let slots = n - len;
        let mut x = 0usize;
        loop {
            let u: f64 = 1.0 - rng.gen::<f64>();
            let skip = (u.ln() / log_miss).floor();
            if !(skip < (slots - x) as f64) {
                break;
            }
            x += skip as usize;
            edges.push(Edge::new(x, x + len));
            x += 1;
            if x >= slots {
                break;
            }
        }
    }
    Graph::with_edges(n, edges).expect("sampled pairs are distinct long edges")
}

/// `Σ_{ℓ=2}^{N-1} (N - ℓ) exp(-ℓ^γ)`, the mean long-edge count.
pub fn expected_edge_count<T: Real>(n: usize, gamma: T) -> T {
    (2..n).map(|l| T::of_usize(n - l) * presence_probability(l, gamma)).sum()
}
