//! Randomized algebraic properties of the dense kernel, the sampling
//! machinery, and the serialization formats.

use proptest::prelude::*;

use schwarz::{
    build_sweep_operator, csv_number, random_dominant_system, random_rhs, rhs_from_json,
    rhs_to_json, sample_rng, system_from_json, system_to_json, Matrix, SweepOrdering, Vector,
};

fn random_matrix(seed: u64, rows: usize, cols: usize) -> Matrix {
    let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    Matrix::from_fn(rows, cols, |_, _| next())
}

fn dominant_matrix(seed: u64, n: usize) -> Matrix {
    let mut a = random_matrix(seed, n, n);
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
        a[(i, i)] = off + 1.0 + a[(i, i)].abs();
    }
    a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inf_norm_is_submultiplicative(seed in any::<u64>(), n in 1usize..8, k in 1usize..8, m in 1usize..8) {
        let a = random_matrix(seed, n, k);
        let b = random_matrix(seed.wrapping_add(1), k, m);
        let prod = a.mul(&b).inf_norm();
        prop_assert!(prod <= a.inf_norm() * b.inf_norm() * (1.0 + 1e-14));
    }

    #[test]
    fn inf_norm_bounds_matvec(seed in any::<u64>(), n in 1usize..10) {
        let a = random_matrix(seed, n, n);
        let x = random_matrix(seed.wrapping_add(2), n, 1);
        let x = Vector::new((0..n).map(|i| x[(i, 0)]).collect()).unwrap();
        prop_assert!(a.mul_vec(&x).inf_norm() <= a.inf_norm() * x.inf_norm() * (1.0 + 1e-14));
    }

    #[test]
    fn two_norm_matches_largest_singular_value(seed in any::<u64>(), n in 1usize..8, m in 1usize..8) {
        let a = random_matrix(seed, n, m);
        let two = a.two_norm().unwrap();
        let sigma = a.singular_values().unwrap()[0];
        let scale = sigma.max(1e-30);
        prop_assert!((two - sigma).abs() <= 1e-9 * scale, "two norm {two}, sigma {sigma}");
    }

    #[test]
    fn two_norm_below_mixed_inf_bound(seed in any::<u64>(), n in 1usize..8, m in 1usize..8) {
        let a = random_matrix(seed, n, m);
        let two = a.two_norm().unwrap();
        let bound = (a.inf_norm() * a.transpose().inf_norm()).sqrt();
        prop_assert!(two <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn lu_solves_dominant_systems(seed in any::<u64>(), n in 1usize..12) {
        let a = dominant_matrix(seed, n);
        let b = random_matrix(seed.wrapping_add(3), n, 1);
        let b = Vector::new((0..n).map(|i| b[(i, 0)]).collect()).unwrap();
        let x = a.lu().unwrap().solve_vec(&b).unwrap();
        let residual = a.mul_vec(&x).sub(&b).inf_norm();
        prop_assert!(residual <= 1e-12 * (a.inf_norm() * x.inf_norm()).max(1.0));
    }

    #[test]
    fn inverse_is_two_sided(seed in any::<u64>(), n in 1usize..10) {
        let a = dominant_matrix(seed, n);
        let inv = a.inverse().unwrap();
        let left = a.mul(&inv).sub(&Matrix::identity(n)).inf_norm();
        let right = inv.mul(&a).sub(&Matrix::identity(n)).inf_norm();
        prop_assert!(left <= 1e-12 * a.inf_norm().max(1.0));
        prop_assert!(right <= 1e-12 * a.inf_norm().max(1.0));
    }

    #[test]
    fn system_json_round_trips_bit_exactly(seed in any::<u64>(), max_n in 1usize..4, max_m in 1usize..4) {
        let mut rng = sample_rng(seed);
        let sys = random_dominant_system(&mut rng, max_n, max_m).unwrap();
        let back = system_from_json(&system_to_json(&sys)).unwrap();
        let diff = sys
            .materialize_dense()
            .unwrap()
            .sub(&back.materialize_dense().unwrap())
            .inf_norm();
        prop_assert!(diff == 0.0, "round trip changed entries by {diff}");
    }

    #[test]
    fn rhs_json_round_trips_bit_exactly(seed in any::<u64>(), len in 1usize..40) {
        let mut rng = sample_rng(seed);
        let b = random_rhs(&mut rng, len);
        let back = rhs_from_json(&rhs_to_json(&b)).unwrap();
        prop_assert!(b.sub(&back).inf_norm() == 0.0);
    }

    #[test]
    fn csv_numbers_parse_back_to_fifteen_digits(x in prop::num::f64::NORMAL) {
        let parsed: f64 = csv_number(x).parse().unwrap();
        prop_assert!((parsed - x).abs() <= 1e-15 * x.abs());
    }

    #[test]
    fn lowrank_apply_matches_materialized_product(seed in any::<u64>()) {
        let mut rng = sample_rng(seed);
        let sys = random_dominant_system(&mut rng, 3, 4).unwrap();
        let x = random_rhs(&mut rng, sys.dim());
        for ordering in [SweepOrdering::T12, SweepOrdering::T21] {
            let t = build_sweep_operator(&sys, ordering).unwrap();
            let dense = t.materialize().unwrap();
            let diff = t.apply(&x).sub(&dense.mul_vec(&x)).inf_norm();
            prop_assert!(diff <= 1e-12 * x.inf_norm().max(1.0));
        }
    }

    #[test]
    fn sampled_systems_have_contractive_sweeps(seed in any::<u64>()) {
        let mut rng = sample_rng(seed);
        let sys = random_dominant_system(&mut rng, 3, 4).unwrap();
        let t = build_sweep_operator(&sys, SweepOrdering::T12).unwrap();
        // Strict row dominance keeps eta <= 0.85, so the kernel contracts.
        prop_assert!(t.convergence_factor(schwarz::NormKind::Inf).unwrap() < 1.0);
    }
}
