use proptest::prelude::*;

use mhd_evans::contour::build_semicircle;
use mhd_evans::engine::{evaluate_point, EvalOptions, EvansModel};
use mhd_evans::evans_system::{limit_matrix, limit_projector};
use mhd_evans::limits::{hf_radius, re_lambda_bound};
use mhd_evans::linalg::{eigenvalues, C64};
use mhd_evans::{PhysicalParams, ProfileOptions, Side};

fn params() -> impl Strategy<Value = PhysicalParams> {
    (1.0f64..3.0, 1e-3f64..0.95, 0.0f64..4.0, 0.1f64..3.0, 0.1f64..3.0)
        .prop_map(|(g, v, b, m, s)| PhysicalParams::new(g, v, b, m, s).unwrap())
}

fn right_half_plane() -> impl Strategy<Value = C64> {
    (1e-2f64..10.0, -1.5f64..1.5).prop_map(|(r, t)| C64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // for Re lambda > 0 both limit matrices have two eigenvalues on each
    // side of the imaginary axis
    #[test]
    fn limit_matrices_are_hyperbolic(p in params(), l in right_half_plane()) {
        for side in [Side::Plus, Side::Minus] {
            let ev = eigenvalues(&limit_matrix(side, l, &p)).unwrap();
            let neg = ev.iter().filter(|z| z.re < 0.0).count();
            let scale = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert_eq!(neg, 2);
            prop_assert!(ev.iter().all(|z| z.re.abs() > 1e-12 * scale));
        }
    }

    #[test]
    fn projectors_are_rank_two(p in params(), l in right_half_plane()) {
        for side in [Side::Plus, Side::Minus] {
            let pr = limit_projector(side, l, &p).unwrap();
            let a = limit_matrix(side, l, &p);
            let size = pr.norm().max(1.0);
            prop_assert!((pr * pr - pr).norm() < 1e-8 * size * size);
            prop_assert!((pr.trace() - C64::new(2.0, 0.0)).norm() < 1e-8 * size);
            prop_assert!((a * pr - pr * a).norm() < 1e-8 * size * a.norm());
        }
    }

    #[test]
    fn radius_dominates_real_bound(p in params()) {
        let b = hf_radius(&p);
        prop_assert!(b.radius >= re_lambda_bound(&p));
        prop_assert!((b.radius - b.terms[0] - b.terms[1]).abs() < 1e-12 * b.radius);
    }

    #[test]
    fn semicircle_shape(r in 0.5f64..20.0, n in 16usize..200, detour in prop::bool::ANY) {
        let offset = if detour { 1e-3 * r } else { 0.0 };
        let c = build_semicircle(r, n, offset).unwrap();
        prop_assert_eq!(c.points[0], C64::new(r, 0.0));
        for z in &c.points {
            prop_assert!(z.re >= -1e-12 && z.im >= -1e-12);
            prop_assert!(z.norm() <= r * (1.0 + 1e-12));
            prop_assert!(z.norm() >= offset * (1.0 - 1e-12));
        }
        let full = c.full_points();
        prop_assert_eq!(full[0], *full.last().unwrap());
        prop_assert!(!c.evaluation_points().contains(&C64::new(0.0, 0.0)));
    }

    #[test]
    fn too_few_points_is_an_error(r in 0.5f64..20.0, n in 0usize..16) {
        prop_assert!(build_semicircle(r, n, 1e-3 * r).is_err());
        prop_assert_eq!(build_semicircle(r, n, 0.0).is_ok(), n >= 8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn evans_function_is_real_on_the_real_axis(v in 0.05f64..0.9, b in 0.0f64..2.0, l in 0.05f64..5.0) {
        let p = PhysicalParams::new(5.0 / 3.0, v, b, 1.0, 1.0).unwrap();
        let model = EvansModel::finite(&p, &ProfileOptions::default()).unwrap();
        let d = evaluate_point(&model, C64::new(l, 0.0), &EvalOptions::default()).unwrap();
        prop_assert!(d.d_raw.im.abs() <= 1e-10 * d.d_raw.norm());
        prop_assert!(d.d_check.im.abs() <= 1e-10 * d.d_check.norm());
    }
}
