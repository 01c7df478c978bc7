use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spatial_gibbs::cutpoints::{
    cutpoint_sequence, h1_lower_bound_cutpoints, h1_lower_bound_local, interval_distance_sum, is_local_cutpoint,
    is_sigma_cutpoint, local_cutpoints, reach, ReachTable,
};
use spatial_gibbs::distance::apsp;
use spatial_gibbs::gibbs::sample_reference_with;
use spatial_gibbs::harness::cutpoint_density_experiment;
use spatial_gibbs::{Edge, Graph, ModelParams, PathExponent};

fn small_graph() -> impl Strategy<Value = Graph> {
    (3usize..=12).prop_flat_map(|n| {
        prop::collection::btree_set((0..n, 0..n), 0..n).prop_map(move |pairs| {
            let edges: std::collections::BTreeSet<Edge> =
                pairs.into_iter().filter(|(a, b)| a.abs_diff(*b) >= 2).map(|(a, b)| Edge::new(a, b)).collect();
            Graph::with_edges(n, edges).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn cutpoint_iff_reach_below_sigma(g in small_graph()) {
        let table = ReachTable::new(&g);
        for x in 0..g.n() {
            prop_assert_eq!(table.get(x), reach(&g, x));
            for sigma in 1..=g.n() {
                prop_assert_eq!(is_sigma_cutpoint(&g, x, sigma), reach(&g, x) < sigma);
            }
        }
    }

    #[test]
    fn local_report_matches_definition(g in small_graph(), a in 0usize..12, len in 1usize..12) {
        let n = g.n();
        let a = a % (n - 1);
        let b = (a + len).min(n - 1);
        let rep = local_cutpoints(&g, (a, b)).unwrap();
        let direct: Vec<usize> = (a..=b).filter(|&x| is_local_cutpoint(&g, (a, b), x)).collect();
        prop_assert_eq!(rep.points, direct);
    }
}

/// Reference graphs at `γ ∈ {1.5, 2}`, `N = 512`.
fn corpus(count: usize, seed: u64) -> Vec<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let gamma = if i % 2 == 0 { 1.5 } else { 2.0 };
            let params = ModelParams::new(512, gamma, 0.0, PathExponent::Finite(1.0)).unwrap();
            sample_reference_with(&params, &mut rng)
        })
        .collect()
}

#[test]
fn lower_bound_lemmas_hold_on_a_small_corpus() {
    let mut checks = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for g in corpus(40, 5) {
        let cache = apsp::<f64>(&g, PathExponent::Finite(1.0));
        let h1 = cache.h_p();
        for sigma in [1, 2, 4, 8] {
            let rep = cutpoint_sequence(&g, sigma).unwrap();
            let t = rep.t_count;
            for t1 in (1..t).step_by((t / 6).max(1)) {
                for t2 in (t1 + 1..=t).step_by((t / 6).max(1)) {
                    assert!(h1_lower_bound_cutpoints(&rep, t1, t2).unwrap() <= h1 * (1.0 + 1e-12));
                    checks += 1;
                }
            }
        }
        for _ in 0..20 {
            let a = rng.gen_range(0..500);
            let b = rng.gen_range(a + 1..512);
            let rep = local_cutpoints(&g, (a, b)).unwrap();
            let sum = interval_distance_sum(&cache, (a, b), (a, b)) as f64;
            assert!(h1_lower_bound_local(rep.t_count()) <= sum);
            checks += 1;
        }
    }
    assert!(checks > 1000);
}

#[test]
fn cutpoint_density_soft_check() {
    let d = cutpoint_density_experiment(0.5, 1024, 200, 0.01, 1).unwrap();
    // the bound is asymptotic, so this is reported rather than asserted
    eprintln!("gamma=0.5 N=1024: mean density {:.4}, fraction below 0.01: {:.3}", d.mean, d.fraction_below);
    assert_eq!(d.densities.len(), 200);
    let sparse = cutpoint_density_experiment(0.05, 1024, 20, 0.01, 2).unwrap();
    assert!(sparse.mean < d.mean);
}
