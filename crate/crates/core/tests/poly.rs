use std::sync::Arc;

use proptest::prelude::*;

use resent_core::poly::{eval_poly, grad_poly_x, monomial_vector, orbital_derivative_vector, BasisDescriptor, ORDERING_TAG};
use resent_core::{PolyBasis, PolyCoeffs};

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn naive_eval(basis: &PolyBasis, a: &[f64], x: &[f64]) -> f64 {
    basis
        .monomials()
        .zip(a)
        .map(|(e, c)| c * e.iter().zip(x).map(|(&k, &v)| v.powi(k as i32)).product::<f64>())
        .sum()
}

fn case() -> impl Strategy<Value = (usize, usize, bool)> {
    (1usize..=3, 0usize..=4, any::<bool>())
}

fn coeffs_and_point(n: usize, len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(-2.0f64..2.0, len), prop::collection::vec(-1.5f64..1.5, n))
}

#[test]
fn basis_sizes_match_binomials() {
    for n in 1..=4 {
        for d in 0..=5 {
            let with = PolyBasis::new(n, d, true).unwrap();
            let without = PolyBasis::new(n, d, false).unwrap();
            assert_eq!(with.len(), binomial(n + d, n));
            assert_eq!(without.len(), binomial(n + d, n) - 1);
        }
    }
}

#[test]
fn degrees_never_decrease_along_the_basis() {
    let b = PolyBasis::new(3, 4, true).unwrap();
    let degrees: Vec<u32> = b.monomials().map(|e| e.iter().sum()).collect();
    assert!(degrees.windows(2).all(|w| w[0] <= w[1]));
    let mut seen: Vec<Vec<u32>> = b.monomials().map(|e| e.to_vec()).collect();
    seen.sort();
    seen.dedup();
    assert_eq!(seen.len(), b.len());
}

#[test]
fn descriptor_round_trips_through_json() {
    let b = PolyBasis::new(3, 2, false).unwrap();
    let text = serde_json::to_string(&b.descriptor()).unwrap();
    let back: BasisDescriptor = serde_json::from_str(&text).unwrap();
    assert_eq!(back.ordering, ORDERING_TAG);
    assert_eq!(PolyBasis::from_descriptor(&back).unwrap(), b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn evaluation_matches_naive_powers(((n, d, c), (a, x)) in case().prop_flat_map(|(n, d, c)| {
        let len = PolyBasis::new(n, d, c).unwrap().len();
        (Just((n, d, c)), coeffs_and_point(n, len))
    })) {
        let basis = Arc::new(PolyBasis::new(n, d, c).unwrap());
        let poly = PolyCoeffs::new(basis.clone(), a.clone()).unwrap();
        let expected = naive_eval(&basis, &a, &x);
        prop_assert!((eval_poly(&poly, &x).unwrap() - expected).abs() <= 1e-12 * (1.0 + expected.abs()));

        let m = monomial_vector(&basis, &x).unwrap();
        let dot: f64 = m.iter().zip(&a).map(|(u, v)| u * v).sum();
        prop_assert!((dot - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
    }

    #[test]
    fn gradient_and_orbital_derivative_match_differences(
        (a, x) in coeffs_and_point(3, 9),
        f in prop::collection::vec(-3.0f64..3.0, 3),
    ) {
        let basis = Arc::new(PolyBasis::new(3, 2, false).unwrap());
        let poly = PolyCoeffs::new(basis.clone(), a.clone()).unwrap();
        let h = 1e-5;
        let shifted = |t: f64| -> Vec<f64> { x.iter().zip(&f).map(|(xi, fi)| xi + t * fi).collect() };
        let fd = (naive_eval(&basis, &a, &shifted(h)) - naive_eval(&basis, &a, &shifted(-h))) / (2.0 * h);

        let grad = grad_poly_x(&poly, &x).unwrap();
        let along: f64 = grad.iter().zip(&f).map(|(g, v)| g * v).sum();
        prop_assert!((along - fd).abs() < 1e-7 * (1.0 + fd.abs()));

        let rows = orbital_derivative_vector(&basis, &x, &f).unwrap();
        let rdot: f64 = rows.iter().zip(&a).map(|(u, v)| u * v).sum();
        prop_assert!((rdot - fd).abs() < 1e-7 * (1.0 + fd.abs()));
        prop_assert!((poly.orbital_derivative(&x, &f).unwrap() - fd).abs() < 1e-7 * (1.0 + fd.abs()));
    }
}
