mod common;

use common::{binomial, binomial_mass, relative_entropy};
use proptest::prelude::*;
use vrrw_core::ld::{
    binomial_lower_tail, binomial_upper_tail, chernoff_bound, entropy, entropy_approx_check, frozen_prediction, Tail,
};

#[test]
fn integer_binomials_sanity() {
    assert_eq!(binomial(10, 8), 45);
    assert_eq!(binomial(20, 10), 184_756);
    let total: f64 = binomial_mass(20, 0.3, 0..=20);
    assert!((total - 1.0).abs() < 1e-14);
}

#[test]
fn library_tails_match_integer_oracle() {
    for n in 1..=20u64 {
        for p in [0.1, 0.35, 0.5, 0.9] {
            for k in 0..=n {
                let up = binomial_mass(n, p, k..=n);
                let low = binomial_mass(n, p, 0..=k);
                assert!((binomial_upper_tail(n, p, k) - up).abs() < 1e-13, "n={n} p={p} k={k}");
                assert!((binomial_lower_tail(n, p, k) - low).abs() < 1e-13, "n={n} p={p} k={k}");
            }
        }
    }
}

#[test]
fn chernoff_dominates_exact_tails_exhaustively() {
    for n in 1..=20u64 {
        for step in 1..=9 {
            let p = step as f64 / 10.0;
            for k in 1..n {
                let a = k as f64 / n as f64;
                if a >= p {
                    let bound = chernoff_bound(n, p, a, Tail::Upper).unwrap();
                    assert!(binomial_mass(n, p, k..=n) <= bound, "upper n={n} p={p} a={a}");
                }
                if a <= p {
                    let bound = chernoff_bound(n, p, a, Tail::Lower).unwrap();
                    assert!(binomial_mass(n, p, 0..=k) <= bound, "lower n={n} p={p} a={a}");
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn entropy_matches_direct_formula(a in 0.001f64..0.999, p in 0.001f64..0.999) {
        let h = entropy(a, p).unwrap();
        prop_assert!(h >= 0.0);
        prop_assert!((h - relative_entropy(a, p)).abs() <= 1e-12 * (1.0 + h));
        prop_assert!((h - entropy(1.0 - a, 1.0 - p).unwrap()).abs() <= 1e-12 * (1.0 + h));
    }

    #[test]
    fn quadratic_approximation_is_second_order(p in 0.05f64..0.95, delta in 1e-4f64..1e-2) {
        let a = (p + delta).min(0.999);
        let check = entropy_approx_check(a, p).unwrap();
        let d = a - p;
        prop_assert!((check.quadratic - d * d / (2.0 * p * (1.0 - p))).abs() < 1e-15);
        // third-order remainder relative to the quadratic term
        prop_assert!(check.relative_gap < 10.0 * d / (p * (1.0 - p)));
    }

    #[test]
    fn frozen_shares_sum_to_one(alpha in proptest::collection::vec(0.01f64..0.16, 2..6), n in 1.0f64..1e6) {
        let pred = frozen_prediction(&alpha, n).unwrap();
        prop_assert!((pred.shares.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((pred.expected_counts.iter().sum::<f64>() - n).abs() < 1e-9 * n);
    }
}
