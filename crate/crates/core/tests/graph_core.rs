use proptest::prelude::*;
use spatial_gibbs::distance::{
    add_edge_incremental, apsp, avg_path_length, distance_histogram, exact_diameter, h_from_hist,
    remove_edge_recompute,
};
use spatial_gibbs::{Edge, Graph, PathExponent};

fn floyd_warshall(g: &Graph) -> Vec<Vec<u32>> {
    let n = g.n();
    let inf = u32::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for x in 0..n {
        d[x][x] = 0;
        for y in g.neighbors(x) {
            d[x][y] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (3..=max_n).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..2 * n).prop_map(move |pairs| {
            let edges: Vec<Edge> = pairs
                .into_iter()
                .filter(|(a, b)| a.abs_diff(*b) >= 2)
                .map(|(a, b)| Edge::new(a, b))
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            Graph::with_edges(n, edges).unwrap()
        })
    })
}

fn exponent() -> impl Strategy<Value = PathExponent<f64>> {
    prop_oneof![
        Just(PathExponent::Finite(1.0)),
        (1.0f64..6.0).prop_map(PathExponent::Finite),
        Just(PathExponent::Infinite)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn apsp_matches_floyd_warshall(g in graph_strategy(64)) {
        let c = apsp::<f64>(&g, PathExponent::Finite(1.0));
        let fw = floyd_warshall(&g);
        for x in 0..g.n() {
            for y in 0..g.n() {
                prop_assert_eq!(c.get(x, y), fw[x][y]);
            }
        }
        prop_assert!(c.is_consistent());
        prop_assert!(c.satisfies_metric_bounds());
        prop_assert_eq!(c.diameter(), exact_diameter(&g));
        prop_assert_eq!(c.histogram(), &distance_histogram(&g)[..]);
    }

    #[test]
    fn add_then_remove_is_identity(g in graph_strategy(40), a in 0usize..40, b in 0usize..40, p in exponent()) {
        let n = g.n();
        let e = Edge::new(a % n, b % n);
        prop_assume!(e.is_long() && !g.contains(e));
        let mut graph = g.clone();
        let mut cache = apsp::<f64>(&graph, p);
        let before = cache.clone();
        add_edge_incremental(&mut cache, &mut graph, e).unwrap();
        prop_assert!(cache.same_as(&apsp(&graph, p)));
        // adding never lengthens a distance nor raises any H_p
        for x in 0..n {
            for y in 0..n {
                prop_assert!(cache.get(x, y) <= before.get(x, y));
            }
        }
        for q in [PathExponent::Finite(1.0), PathExponent::Finite(2.5), PathExponent::Infinite] {
            prop_assert!(avg_path_length(&cache, q) <= avg_path_length(&before, q) + 1e-12);
        }
        remove_edge_recompute(&mut cache, &mut graph, e).unwrap();
        prop_assert_eq!(&graph, &g);
        prop_assert!(cache.same_as(&before));
    }

    #[test]
    fn h_p_is_ordered(g in graph_strategy(48), p in 1.0f64..8.0) {
        let hist = distance_histogram(&g);
        let n = g.n();
        let h1: f64 = h_from_hist(&hist, n, &PathExponent::Finite(1.0));
        let hp: f64 = h_from_hist(&hist, n, &PathExponent::Finite(p));
        let hinf: f64 = h_from_hist(&hist, n, &PathExponent::Infinite);
        prop_assert!(h1 <= hp * (1.0 + 1e-12));
        prop_assert!(hp <= hinf * (1.0 + 1e-12));
    }
}

#[test]
fn ground_h1_closed_form() {
    for n in (2..=1000).step_by(37).chain([1000]) {
        let g = Graph::new(n).unwrap();
        let h: f64 = h_from_hist(&distance_histogram(&g), n, &PathExponent::Finite(1.0));
        let direct: u64 = (0..n as u64).flat_map(|x| (0..n as u64).map(move |y| x.abs_diff(y))).sum();
        let nn = n as f64;
        assert!((h - direct as f64 / (nn * nn)).abs() < 1e-12 * h);
        assert!((h - (nn * nn - 1.0) / (3.0 * nn)).abs() < 1e-12 * h);
    }
}

#[test]
fn ordering_on_a_thousand_graphs() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for _ in 0..1000 {
        let n = rng.gen_range(3..80);
        let m = rng.gen_range(0..n);
        let mut g = Graph::new(n).unwrap();
        for _ in 0..m {
            let e = Edge::new(rng.gen_range(0..n), rng.gen_range(0..n));
            if e.is_long() && !g.contains(e) {
                g.insert(e).unwrap();
            }
        }
        let hist = distance_histogram(&g);
        let p = rng.gen_range(1.0..10.0);
        let h1: f64 = h_from_hist(&hist, n, &PathExponent::Finite(1.0));
        let hp: f64 = h_from_hist(&hist, n, &PathExponent::Finite(p));
        let hinf: f64 = h_from_hist(&hist, n, &PathExponent::Infinite);
        assert!(h1 <= hp * (1.0 + 1e-12) && hp <= hinf * (1.0 + 1e-12));
    }
}
