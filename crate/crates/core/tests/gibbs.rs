use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spatial_gibbs::gibbs::{
    enumerate_exact, expected_edge_count, gibbs_probabilities, sample_reference, sample_reference_with,
    transition_matrix, ChainState, ExactError,
};
use spatial_gibbs::{Edge, ModelParams, PathExponent};

fn params(n: usize, gamma: f64, b: f64, p: PathExponent<f64>) -> ModelParams {
    ModelParams::new(n, gamma, b, p).unwrap()
}

#[test]
fn partition_examples() {
    let z2 = enumerate_exact(&params(2, 1.0, 0.0, PathExponent::Finite(1.0))).unwrap();
    assert!((z2.partition_value - (-0.5f64).exp()).abs() < 1e-15);
    let z0 = enumerate_exact(&params(3, 1.0, 0.0, PathExponent::Finite(1.0))).unwrap();
    let z5 = enumerate_exact(&params(3, 1.0, -5.0, PathExponent::Finite(1.0))).unwrap();
    assert!(z5.partition_value > z0.partition_value);
    assert!(z0.partition_value > 0.0);
    assert!(matches!(
        enumerate_exact(&params(8, 1.0, 0.0, PathExponent::Finite(1.0))),
        Err(ExactError::TooLarge { pairs: 21, .. })
    ));
}

#[test]
fn detailed_balance_on_four_vertices() {
    for (gamma, b, p) in [(1.0, 0.0, PathExponent::Finite(1.0)), (0.5, 0.5, PathExponent::Infinite)] {
        let (states, m) = transition_matrix(&params(4, gamma, b, p)).unwrap();
        assert_eq!(states.len(), 8);
        let pi = gibbs_probabilities(&states);
        for i in 0..8 {
            for j in 0..8 {
                assert!((pi[i] * m[i][j] - pi[j] * m[j][i]).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn energy_audit_after_a_million_steps() {
    let mut s = ChainState::new(params(12, 0.8, 0.5, PathExponent::Finite(2.0)), 21);
    for _ in 0..1_000_000 {
        s.metropolis_step();
    }
    let fresh = s.recompute_energy();
    assert!((fresh - s.energy()).abs() <= 1e-9 * fresh.abs());
}

#[test]
fn add_remove_deltas_negate() {
    let s = ChainState::new(params(9, 1.3, 0.2, PathExponent::Infinite), 0);
    let e = Edge::new(1, 7);
    let d_add = s.delta_energy(e);
    let mut g = s.graph().clone();
    g.insert(e).unwrap();
    let t = ChainState::from_graph(*s.params(), g, 0);
    assert_eq!(d_add, -t.delta_energy(e));
}

#[test]
fn reference_edge_count_mean() {
    let pr = params(64, 1.0, 0.0, PathExponent::Finite(1.0));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let counts: Vec<f64> =
        (0..10_000).map(|_| sample_reference_with(&pr, &mut rng).num_long_edges() as f64).collect();
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (counts.len() - 1) as f64;
    let se = (var / counts.len() as f64).sqrt();
    let expected: f64 = expected_edge_count(64, 1.0);
    assert!((mean - expected).abs() <= 3.0 * se, "{mean} vs {expected} ± {se}");
}

#[test]
fn reference_indicators_are_uncorrelated() {
    let pr = params(16, 0.7, 0.0, PathExponent::Finite(1.0));
    let (e1, e2) = (Edge::new(0, 2), Edge::new(5, 8));
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 100_000;
    let pairs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let g = sample_reference_with(&pr, &mut rng);
            (f64::from(u8::from(g.contains(e1))), f64::from(u8::from(g.contains(e2))))
        })
        .collect();
    let m1 = pairs.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let m2 = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let prods: Vec<f64> = pairs.iter().map(|p| (p.0 - m1) * (p.1 - m2)).collect();
    let cov = prods.iter().sum::<f64>() / n as f64;
    let var = prods.iter().map(|x| (x - cov).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!(cov.abs() <= 3.0 * (var / n as f64).sqrt());
}

#[test]
fn large_gamma_reference_is_empty() {
    let pr = params(64, 8.0, 0.0, PathExponent::Finite(1.0));
    assert_eq!(sample_reference(&pr, 1).num_long_edges(), 0);
}
