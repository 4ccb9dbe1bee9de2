use nalgebra::DMatrix;
use proptest::prelude::*;

use resent_core::spd::{geodesic_point, spd_power};
use resent_core::SpdMatrix;
use resent_testkit::{gen, geometry, oracle};

#[test]
fn randomized_geometry_suites() {
    for report in geometry::all(200, 11) {
        assert!(report.passed(), "{report}");
    }
}

fn spd_strategy(n: usize) -> impl Strategy<Value = SpdMatrix> {
    (any::<u64>(), 1.0f64..1e4).prop_map(move |(seed, cond)| gen::spd(&mut gen::rng(seed), n, cond))
}

fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn geodesic_midpoint_is_symmetric(p in spd_strategy(3), q in spd_strategy(3)) {
        let pq = geodesic_point(&p, &q, 0.5).unwrap();
        let qp = geodesic_point(&q, &p, 0.5).unwrap();
        prop_assert!(rel_diff(pq.as_matrix(), qp.as_matrix()) < 1e-9);
    }

    #[test]
    fn geodesic_matches_cholesky_oracle(p in spd_strategy(3), q in spd_strategy(3), theta in 0.0f64..=1.0) {
        let ours = geodesic_point(&p, &q, theta).unwrap();
        let oracle = oracle::geodesic_cholesky(p.as_matrix(), q.as_matrix(), theta);
        prop_assert!(rel_diff(ours.as_matrix(), &oracle) < 1e-9);
    }

    #[test]
    fn geodesic_determinant_interpolates(p in spd_strategy(2), q in spd_strategy(2), theta in 0.0f64..=1.0) {
        let g = geodesic_point(&p, &q, theta).unwrap();
        let expected = (1.0 - theta) * p.as_matrix().determinant().ln() + theta * q.as_matrix().determinant().ln();
        prop_assert!((g.as_matrix().determinant().ln() - expected).abs() < 1e-9 * (1.0 + expected.abs()));
    }

    #[test]
    fn square_roots_are_consistent(p in spd_strategy(4)) {
        let r = spd_power(&p, 0.5).unwrap().as_matrix().clone();
        let ri = spd_power(&p, -0.5).unwrap().as_matrix().clone();
        prop_assert!(rel_diff(&(&r * &r), p.as_matrix()) < 1e-10);
        prop_assert!(rel_diff(&(&r * &ri), &DMatrix::identity(4, 4)) < 1e-8);
        prop_assert!(rel_diff(&r, &oracle::sqrt_spd(p.as_matrix())) < 1e-10);
    }
}
