use proptest::prelude::*;

use hsym_core::cc::{cc_distance, cc_norm, SolverOptions};
use hsym_core::heis::{dilate, group_inv, group_mul, hnorm, omega, HPoint, NormKind};
use hsym_core::lifting::{catalog, lift_symplectomorphism, LiftOptions};
use hsym_core::report::fmt_f64;

fn point(n: usize) -> impl Strategy<Value = HPoint> {
    (prop::collection::vec(-2.0..2.0f64, 2 * n), -2.0..2.0f64).prop_map(|(x, xbar)| HPoint { x, xbar })
}

fn triple() -> impl Strategy<Value = (HPoint, HPoint, HPoint)> {
    (1usize..=3).prop_flat_map(|n| (point(n), point(n), point(n)))
}

proptest! {
    #[test]
    fn group_is_associative((p, q, r) in triple()) {
        let a = group_mul(&group_mul(&p, &q).unwrap(), &r).unwrap();
        let b = group_mul(&p, &group_mul(&q, &r).unwrap()).unwrap();
        prop_assert!(a.coord_dist(&b) < 1e-13);
    }

    #[test]
    fn inverse_and_center((p, q, _) in triple()) {
        let e = group_mul(&p, &group_inv(&p)).unwrap();
        prop_assert!(e.coord_dist(&HPoint::identity(p.n())) == 0.0);
        // pq and qp differ by the central element ω(x, y)
        let pq = group_mul(&p, &q).unwrap();
        let qp = group_mul(&q, &p).unwrap();
        prop_assert!(((pq.xbar - qp.xbar) - omega(&p.x, &q.x)).abs() < 1e-13);
    }

    #[test]
    fn dilations_are_morphisms((p, q, _) in triple(), eps in 0.1..5.0f64) {
        let a = dilate(eps, &group_mul(&p, &q).unwrap()).unwrap();
        let b = group_mul(&dilate(eps, &p).unwrap(), &dilate(eps, &q).unwrap()).unwrap();
        prop_assert!(a.coord_dist(&b) < 1e-12);
    }

    #[test]
    fn norms_are_homogeneous_and_symmetric(p in point(1), eps in 0.1..10.0f64) {
        for kind in [NormKind::Sum, NormKind::CC] {
            let np = hnorm(&p, kind).unwrap();
            let scaled = hnorm(&dilate(eps, &p).unwrap(), kind).unwrap();
            prop_assert!((scaled - eps * np).abs() <= 1e-9 * (1.0 + eps * np));
            prop_assert!((hnorm(&group_inv(&p), kind).unwrap() - np).abs() <= 1e-12 * (1.0 + np));
        }
    }

    #[test]
    fn cc_distance_is_left_invariant(p in point(1), q in point(1), g in point(1)) {
        let d = cc_distance(&p, &q, SolverOptions::closed_form()).unwrap().length;
        let gp = group_mul(&g, &p).unwrap();
        let gq = group_mul(&g, &q).unwrap();
        let dg = cc_distance(&gp, &gq, SolverOptions::closed_form()).unwrap().length;
        prop_assert!((d - dg).abs() <= 1e-9 * (1.0 + d));
        let back = cc_distance(&q, &p, SolverOptions::closed_form()).unwrap().length;
        prop_assert!((d - back).abs() <= 1e-9 * (1.0 + d));
    }

    #[test]
    fn cc_norm_dominates_the_horizontal_part(p in point(1)) {
        let horiz = p.x.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(cc_norm(&p).unwrap() >= horiz * (1.0 - 1e-12));
    }

    #[test]
    fn shear_lifts_are_cubic(k in -3.0..3.0f64, q in -1.5..1.5f64, p in -1.5..1.5f64) {
        let g = lift_symplectomorphism(&catalog::shear(k), 0.0, Some(&[0.0, 0.0]), &LiftOptions::default()).unwrap();
        prop_assert!((g.vertical(&[q, p]) - k * q.powi(3) / 6.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_lifts_are_constant(theta in -3.0..3.0f64, a in -1.0..1.0f64, x in prop::collection::vec(-2.0..2.0f64, 2)) {
        let g = lift_symplectomorphism(&catalog::rotation(theta), a, None, &LiftOptions::default()).unwrap();
        prop_assert!((g.vertical(&x) - a).abs() < 1e-12);
    }

    #[test]
    fn lifted_maps_invert(x in prop::collection::vec(-1.0..1.0f64, 2), xbar in -1.0..1.0f64, k in -1.0..1.0f64) {
        let g = lift_symplectomorphism(&catalog::sine_shear(k), 0.1, None, &LiftOptions::default()).unwrap();
        let p = HPoint { x, xbar };
        let back = g.apply_inverse(&g.apply(&p)).unwrap();
        prop_assert!(back.coord_dist(&p) < 1e-12);
    }

    #[test]
    fn report_floats_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }
}
