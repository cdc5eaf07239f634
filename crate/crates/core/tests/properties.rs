//! Randomized invariants: isometries, round trips, metric axioms, quantile
//! consistency, and full-pipeline determinism.

use proptest::prelude::*;
use spdwave_core::harness::{coverage_study, CurveSpec, NoiseSpec, StudyConfig};
use spdwave_core::{
    backward_transform, bootstrap_quantile, chi2_cdf, chi2_quantile, eta_inv, eta_vec,
    forward_transform, le_distance, weighted_ave, Multiplier, RefinementOrder, SpdMat, SymMat,
};

fn sym_strategy(dim: usize, amp: f64) -> impl Strategy<Value = SymMat> {
    let q = dim * (dim + 1) / 2;
    proptest::collection::vec(-amp..amp, q)
        .prop_map(move |upper| SymMat::new(dim, upper).unwrap())
}

fn spd_strategy(dim: usize, amp: f64) -> impl Strategy<Value = SpdMat> {
    sym_strategy(dim, amp).prop_map(|a| a.exp().unwrap())
}

proptest! {
    #[test]
    fn eta_is_an_isometric_bijection(
        dim in 2usize..=3,
        seed_a in proptest::collection::vec(-2.0..2.0f64, 6),
        seed_b in proptest::collection::vec(-2.0..2.0f64, 6),
    ) {
        let q = dim * (dim + 1) / 2;
        let a = SymMat::new(dim, seed_a[..q].to_vec()).unwrap();
        let b = SymMat::new(dim, seed_b[..q].to_vec()).unwrap();
        // round trip
        let back = eta_inv(&eta_vec(&a));
        prop_assert!(back.sub(&a).frob_norm() < 1e-12);
        // norm and inner product preservation
        let va = eta_vec(&a);
        let vb = eta_vec(&b);
        prop_assert!((va.norm() - a.frob_norm()).abs() < 1e-12);
        let dot: f64 = va.values().iter().zip(vb.values()).map(|(x, y)| x * y).sum();
        prop_assert!((dot - a.frob_inner(&b)).abs() < 1e-10);
    }

    #[test]
    fn log_exp_round_trip(s in spd_strategy(3, 1.5)) {
        let back = s.log().exp().unwrap();
        prop_assert!(le_distance(&s, &back).unwrap() < 1e-10);
    }

    #[test]
    fn transform_round_trip(
        j in 3usize..=5,
        n in prop_oneof![Just(1usize), Just(3), Just(5)],
        seeds in proptest::collection::vec(-1.5..1.5f64, 32 * 3),
    ) {
        let order = RefinementOrder::from_n(n).unwrap();
        let data: Vec<SpdMat> = (0..1usize << j)
            .map(|k| SymMat::new(2, seeds[3 * k..3 * k + 3].to_vec()).unwrap().exp().unwrap())
            .collect();
        let rec = backward_transform(&forward_transform(&data, &order).unwrap()).unwrap();
        for (a, b) in data.iter().zip(&rec) {
            prop_assert!(le_distance(a, b).unwrap() < 1e-9);
        }
    }

    #[test]
    fn distance_is_a_metric(
        a in spd_strategy(2, 1.5),
        b in spd_strategy(2, 1.5),
        c in spd_strategy(2, 1.5),
    ) {
        let dab = le_distance(&a, &b).unwrap();
        let dba = le_distance(&b, &a).unwrap();
        let dac = le_distance(&a, &c).unwrap();
        let dcb = le_distance(&c, &b).unwrap();
        prop_assert!((dab - dba).abs() < 1e-12);
        prop_assert!(le_distance(&a, &a).unwrap() < 1e-12);
        prop_assert!(dab <= dac + dcb + 1e-10);
    }

    #[test]
    fn mean_of_identical_matrices_is_identity_operation(
        s in spd_strategy(3, 1.0),
        w in 0.05..0.95f64,
    ) {
        let ave = weighted_ave(&[s.clone(), s.clone()], &[w, 1.0 - w]).unwrap();
        prop_assert!(le_distance(&ave, &s).unwrap() < 1e-10);
    }

    #[test]
    fn chi2_quantile_inverts_the_cdf(dof in 1usize..=12, p in 0.01..0.99f64) {
        let x = chi2_quantile(dof, p).unwrap();
        prop_assert!((chi2_cdf(dof, x) - p).abs() < 1e-9);
    }

    #[test]
    fn bootstrap_quantile_is_monotone_and_in_range(
        mut dists in proptest::collection::vec(0.0..10.0f64, 5..40),
        lo in 0.05..0.45f64,
        hi in 0.5..0.95f64,
    ) {
        // arguments are miscoverage levels: smaller alpha, larger radius
        let q_lo = bootstrap_quantile(&dists, lo).unwrap();
        let q_hi = bootstrap_quantile(&dists, hi).unwrap();
        prop_assert!(q_lo >= q_hi);
        dists.sort_by(f64::total_cmp);
        prop_assert!(q_lo >= dists[0] && q_lo <= dists[dists.len() - 1]);
    }
}

/// Identical configurations produce bitwise-identical reports regardless of
/// how many worker threads execute the study.
#[test]
fn study_is_deterministic_across_thread_counts() {
    let cfg = StudyConfig {
        curve: CurveSpec::C3,
        noise: NoiseSpec::default_for(&CurveSpec::C3),
        j: 6,
        j0: 4,
        j0_star: 4,
        order: RefinementOrder::from_n(3).unwrap(),
        b: 12,
        k: 4,
        alphas: vec![0.9, 0.95],
        boundary_trim: 8,
        seed: 424_242,
        volume_samples: 500,
        volume_stride: 16,
        multiplier: Multiplier::Gaussian,
    };
    let runs: Vec<String> = [1usize, 2, 8]
        .iter()
        .map(|&threads| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let report = pool.install(|| coverage_study(&cfg)).unwrap();
            serde_json::to_string(&report).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}
