mod common;

use arbcheck_core::model::MarketModel;
use arbcheck_core::simulate::{simulate_exit, wilson, DriftMode, SimConfig, SimEstimate, Z95};
use proptest::prelude::*;

fn brownian() -> MarketModel {
    MarketModel::from_sources(1, 1.0, vec![0.0], vec![1.0], &["0"], &[&["1"]], &[]).unwrap()
}

fn run(paths: usize, steps: usize, radii: Vec<f64>, seed: u64, bridge: bool) -> SimEstimate {
    let cfg = SimConfig {
        steps_per_unit_time: steps,
        paths,
        radii,
        master_seed: seed,
        drift_mode: DriftMode::Q,
        bridge_correction: bridge,
        threads: None,
    };
    simulate_exit(&brownian(), &cfg).unwrap()
}

fn sigma(k: u64, n: u64) -> f64 {
    let (lo, hi) = wilson(k, n, Z95);
    (hi - lo) / (2.0 * Z95)
}

#[test]
fn oracle_matches_known_values() {
    // 4Φ̄(4) dominates at a = 4; at a = 2 the second reflection term matters.
    let p4 = common::brownian_exit_probability(4.0, 1.0);
    assert!((p4 - 1.2668e-4).abs() < 1e-7, "{p4}");
    let p2 = common::brownian_exit_probability(2.0, 1.0);
    assert!((p2 - 0.09102).abs() < 1e-4, "{p2}");
    assert!((common::brownian_exit_probability(2.0, 4.0) - common::brownian_exit_probability(1.0, 1.0)).abs() < 1e-15);
}

#[test]
fn brownian_calibration_and_step_halving() {
    let oracle = common::brownian_exit_probability(2.0, 1.0);
    let fine = run(100_000, 4096, vec![2.0], 11, false);
    let r = &fine.per_radius[0];
    let s = sigma(r.exit_count, r.paths);
    assert!((r.p_hat - oracle).abs() <= 3.0 * s, "p_hat {} vs oracle {oracle} (sigma {s})", r.p_hat);

    let coarse = run(100_000, 2048, vec![2.0], 11, false);
    let c = &coarse.per_radius[0];
    let width = r.ci.1 - r.ci.0;
    assert!((c.p_hat - r.p_hat).abs() < 3.0 * width, "h-halving moved p_hat by {}", (c.p_hat - r.p_hat).abs());
}

#[test]
fn bridge_correction_removes_the_grid_bias() {
    let oracle = common::brownian_exit_probability(2.0, 1.0);
    let coarse = run(40_000, 16, vec![2.0], 5, false).per_radius[0].clone();
    let bridged = run(40_000, 16, vec![2.0], 5, true).per_radius[0].clone();
    let s = sigma(bridged.exit_count, bridged.paths);
    assert!((bridged.p_hat - oracle).abs() <= 3.0 * s, "bridged {} vs {oracle}", bridged.p_hat);
    assert!(oracle - coarse.p_hat > 3.0 * s, "16 grid points should undercount: {}", coarse.p_hat);
}

#[test]
fn doubling_paths_shrinks_the_interval_by_root_two() {
    let small = run(10_000, 64, vec![2.0], 3, false).per_radius[0].clone();
    let large = run(20_000, 64, vec![2.0], 3, false).per_radius[0].clone();
    let ratio = (large.ci.1 - large.ci.0) / (small.ci.1 - small.ci.0);
    let want = std::f64::consts::FRAC_1_SQRT_2;
    assert!((ratio / want - 1.0).abs() <= 0.2, "width ratio {ratio}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn shared_paths_give_monotone_exit_counts(
        seed in any::<u64>(),
        mut radii in prop::collection::btree_set(1u32..40, 1..6),
    ) {
        let radii: Vec<f64> = std::mem::take(&mut radii).into_iter().map(|r| r as f64 / 10.0).collect();
        let est = run(2_000, 32, radii, seed, false);
        for w in est.per_radius.windows(2) {
            prop_assert!(w[0].exit_count >= w[1].exit_count);
        }
        for r in &est.per_radius {
            prop_assert!(r.ci.0 <= r.p_hat && r.p_hat <= r.ci.1);
            prop_assert!((0.0..=1.0).contains(&r.p_hat));
        }
    }
}
