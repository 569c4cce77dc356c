//! Module invariants as randomized property tests.

use invhull::cli::{to_json_string, Command, RunConfig};
use invhull::densities::{
    g_function, homogeneity_error, parse_density, section, wbar, Builtin, Density, MatRef, MatrixF, MatrixX,
};
use invhull::hull1d::{evaluate_functional_1d, invariant_hull_1d, SmoothCurve};
use invhull::mesh::{area_functional, build_disk_mesh, dirichlet_energy, sample_surface, SurfaceId};
use invhull::pointwise::{pointwise_hull, volume_density};
use invhull::reparam2d::{
    beltrami_coefficient, energy_of_reparam, inner_variation_descent, random_diffeo, BoundaryPolicy, DescentOptions,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn matrix(m: usize, n: usize) -> impl Strategy<Value = MatrixF> {
    prop::collection::vec(-2.0f64..2.0, m * n)
        .prop_map(move |v| MatrixF(DMatrix::from_vec(m, n, v)))
        .prop_filter("regular", |f| f.0.singular_values().min() > 0.1)
}

fn positive_x(n: usize) -> impl Strategy<Value = MatrixX> {
    prop::collection::vec(-0.7f64..0.7, n * n)
        .prop_map(move |v| MatrixX::new(DMatrix::identity(n, n) + DMatrix::from_vec(n, n, v)))
        .prop_filter("det > 0", |x| x.det() > 0.05)
}

fn vector3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 3).prop_filter("away from 0", |v| v.iter().map(|a| a * a).sum::<f64>() > 0.01)
}

fn convex_density() -> impl Strategy<Value = Builtin> {
    prop_oneof![
        Just(Builtin::Quadratic),
        Just(Builtin::Norm),
        (1.2f64..4.0).prop_map(Builtin::PPower),
        (1.2f64..4.0).prop_map(Builtin::Power),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn declared_homogeneity_holds(w in convex_density(), f in matrix(3, 2)) {
        let err = homogeneity_error(&w, &f, &[0.25, 3.0, 17.0]).unwrap();
        prop_assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn g_is_radial_derivative(w in convex_density(), x in vector3(), r in 0.3f64..3.0) {
        let h = 1e-5;
        let fd = (section(&w, &x, r + h).unwrap() - section(&w, &x, r - h).unwrap()) / (2.0 * h);
        let g = g_function(&w, r, &x).unwrap();
        prop_assert!((g - fd).abs() < 1e-6 * (1.0 + g.abs()), "{g} vs {fd}");
    }

    #[test]
    fn wbar_is_degree_zero(f in matrix(4, 3), x in positive_x(3), s in 0.1f64..10.0) {
        let a = wbar(&Builtin::Wn, &x, &f).unwrap().to_f64();
        let b = wbar(&Builtin::Wn, &x.scaled(s), &f).unwrap().to_f64();
        prop_assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
    }

    #[test]
    fn wbar_at_identity_is_density(w in convex_density(), f in matrix(3, 2)) {
        let v = wbar(&w, &MatrixX::identity(2), &f).unwrap().to_f64();
        let direct = w.eval(MatRef::new(f.0.as_slice(), 3, 2));
        prop_assert!((v - direct).abs() <= 1e-14 * (1.0 + direct));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hull_never_exceeds_functional(w in convex_density(), seed in 0u64..10_000) {
        let u = SmoothCurve::random(seed).sample(256).unwrap();
        let i = evaluate_functional_1d(&w, &u).unwrap();
        let h = invariant_hull_1d(&w, &u).unwrap().value;
        prop_assert!(h <= i + 1e-6 * (1.0 + i.abs()), "{h} > {i}");
    }

    #[test]
    fn hull_ignores_reparameterization(seed in 0u64..10_000, a in -0.6f64..0.6) {
        let base = SmoothCurve::random(seed);
        let pi = std::f64::consts::PI;
        let v = base.reparameterized(move |t| t + a * (pi * t).sin() / pi, move |t| 1.0 + a * (pi * t).cos());
        for w in [Builtin::Quadratic, Builtin::PPower(3.0)] {
            let hu = invariant_hull_1d(&w, &base.sample(1024).unwrap()).unwrap().value;
            let hv = invariant_hull_1d(&w, &v.sample(1024).unwrap()).unwrap().value;
            prop_assert!((hu - hv).abs() < 5e-4 * (1.0 + hu), "{hu} vs {hv}");
        }
    }

    #[test]
    fn pointwise_chain(f in matrix(3, 2), seed in 0u64..1000) {
        let v = pointwise_hull(&Builtin::Wn, &f, 8, seed).unwrap().value;
        let vol = volume_density(&f);
        let w = Builtin::Wn.eval(f.view());
        prop_assert!(vol - 1e-9 <= v && v <= w + 1e-6, "{vol} <= {v} <= {w}");
    }

    #[test]
    fn dirichlet_dominates_area(a in 0.3f64..3.0, b in 0.3f64..3.0, amp in 0.0f64..1.0, level in 1u32..5) {
        let m = build_disk_mesh(level);
        for id in [SurfaceId::Stretch(a, b), SurfaceId::GraphSin(amp)] {
            let s = sample_surface(&m, |x| id.eval(x)).unwrap();
            prop_assert!(dirichlet_energy(&s) >= area_functional(&s) * (1.0 - 1e-12));
            prop_assert!(beltrami_coefficient(&s).unwrap().max_abs() < 1.0);
        }
    }

    #[test]
    fn reparameterized_energy_bounded_by_area(seed in 0u64..10_000, mag in 0.0f64..0.9, amp in 0.0f64..0.8) {
        let m = build_disk_mesh(3);
        let s = sample_surface(&m, |x| SurfaceId::GraphSin(amp).eval(x)).unwrap();
        let phi = random_diffeo(&m, BoundaryPolicy::three_point(&m), mag, seed);
        phi.validate(&m).unwrap();
        let e = energy_of_reparam(&s, &phi).unwrap();
        prop_assert!(e >= area_functional(&s) * (1.0 - 1e-12));
    }

    #[test]
    fn descent_history_never_increases(seed in 0u64..10_000, a in 1.0f64..3.0) {
        let m = build_disk_mesh(2);
        let s = sample_surface(&m, |x| SurfaceId::Stretch(a, 1.0).eval(x)).unwrap();
        let phi0 = random_diffeo(&m, BoundaryPolicy::three_point(&m), 0.5, seed);
        let r = inner_variation_descent(&s, &phi0, 60, &DescentOptions::default()).unwrap();
        prop_assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        r.phi.validate(&m).unwrap();
    }

    #[test]
    fn config_json_round_trip(n in 1usize..100_000, seed in any::<u64>(), levels in prop::collection::vec(0u32..8, 1..4), perturb in 0.0f64..1.0) {
        let mut cfg = RunConfig::new(Command::Surface);
        cfg.n = n;
        cfg.seed = seed;
        cfg.levels = levels;
        cfg.perturb = perturb;
        let text = to_json_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn density_ids_round_trip() {
    for id in ["norm", "quadratic", "ppower:0.5", "power:3", "wn", "volume", "product"] {
        assert_eq!(parse_density(id).unwrap().id(), id);
    }
}
