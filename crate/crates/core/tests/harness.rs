use spatial_gibbs::constructions::{critical_exponent, theoretical_exponent};
use spatial_gibbs::harness::{
    estimate_exponent, exponential_sum_tail, ldp_check, predicted_exponent, Estimator, LdpConfig, SweepConfig,
};
use spatial_gibbs::PathExponent;

#[test]
fn predictions_follow_the_closed_forms() {
    for p in [PathExponent::Finite(1.0), PathExponent::Finite(3.0), PathExponent::Infinite] {
        for i in -20..=40 {
            let b = f64::from(i) / 20.0;
            assert_eq!(predicted_exponent(1.0, b, &p), critical_exponent(b, &p));
            for gamma in [0.5, 1.5, 2.0] {
                assert_eq!(predicted_exponent(gamma, b, &p), Some(theoretical_exponent(gamma, b).unwrap()));
            }
        }
    }
}

#[test]
fn estimates_carry_predictions() {
    let cfg = SweepConfig {
        n_grid: vec![32],
        gamma: 2.0,
        b_grid: vec![2.5],
        p: PathExponent::Finite(1.0),
        chains_per_cell: 2,
        steps: 4_000,
        burn_in: 1_000,
        thin: 10,
        seed_base: 3,
    };
    let cells = cfg.cells().unwrap();
    let e = estimate_exponent(&cells[0], &cfg).unwrap();
    assert_eq!(e.predicted, Some(0.0));
    assert!(e.std_error >= 0.0);
    assert!(e.mean_log_ratio > 0.0 && e.mean_log_ratio <= 1.0 + 1e-9);
}

#[test]
fn ldp_probabilities_are_valid_and_monotone_in_m() {
    let mut previous: Option<Vec<f64>> = None;
    for m in [0.25, 0.5, 1.0, 2.0] {
        let cfg = LdpConfig {
            gamma: 0.5,
            theta: 1.0,
            m,
            n_grid: vec![10, 20],
            trials: 20_000,
            seed: 11,
            estimator: Estimator::Naive,
        };
        let rows = ldp_check(&cfg).unwrap();
        let probs: Vec<f64> = rows.iter().map(|r| r.probability).collect();
        for r in &rows {
            assert!((0.0..=1.0).contains(&r.probability));
            assert!(r.rate > 0.0);
        }
        if let Some(prev) = &previous {
            for (i, r) in rows.iter().enumerate() {
                // soft: allow two standard errors of slack
                assert!(r.probability <= prev[i] + 2.0 * r.std_error.max(1e-12) + 1e-12);
            }
        }
        previous = Some(probs);
    }
}

#[test]
fn tilted_estimate_tracks_exact_tail() {
    let cfg = LdpConfig {
        gamma: 1.0,
        theta: 2.0,
        m: 0.5,
        n_grid: vec![20, 60],
        trials: 50_000,
        seed: 4,
        estimator: Estimator::Tilted,
    };
    for r in ldp_check(&cfg).unwrap() {
        let exact = exponential_sum_tail(r.n, 2.0, (0.5 + 0.5) * r.n as f64);
        assert!((r.probability / exact - 1.0).abs() < 0.05, "{r:?} {exact}");
    }
}
