use std::f64::consts::TAU;

use nalgebra::Vector3;
use ncpgeom::asymptotics::{busemann, product_distance, ProductPoint};
use ncpgeom::geodesic::{integrate_geodesic, PhaseState};
use ncpgeom::hyperbolic::{hyp_distance, mobius_apply, translation_length, vertical_busemann, HPoint, MobiusElement};
use ncpgeom::invariants::{enumerate_length_spectrum, epsilon0, mls_length, product_spectrum, SigmaSpectrum};
use ncpgeom::jacobi::propagate_jacobi;
use ncpgeom::metric::{
    curvature_at, metric_compatibility_residual, potential_by_name, r_v_operator, ChartPoint, MetricSpec, WarpProfile,
};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = HPoint> {
    (-5.0..5.0f64, -3.0..3.0f64).prop_map(|(x, ly)| HPoint::new(x, ly.exp()).unwrap())
}

/// Unimodular matrix with `a` bounded away from zero; `d` is solved for.
fn unimodular() -> impl Strategy<Value = MobiusElement> {
    (0.3..3.0f64, -2.0..2.0f64, -2.0..2.0f64, any::<bool>()).prop_map(|(a, b, c, neg)| {
        let a = if neg { -a } else { a };
        MobiusElement::new(a, b, c, (1.0 + b * c) / a).unwrap()
    })
}

fn hyperbolic_element() -> impl Strategy<Value = MobiusElement> {
    unimodular().prop_filter("hyperbolic", |m| m.trace().abs() > 2.1)
}

fn warped(eps: f64) -> MetricSpec {
    MetricSpec::warped(WarpProfile::new(HPoint::I, eps).unwrap())
}

fn all_kinds() -> Vec<MetricSpec> {
    vec![
        MetricSpec::product(1.3).unwrap(),
        warped(0.1),
        MetricSpec::twisted(0.05, potential_by_name("log_y").unwrap()).unwrap(),
        MetricSpec::twisted(0.05, potential_by_name("x").unwrap()).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn triangle_inequality(p in point(), q in point(), r in point()) {
        let lhs = hyp_distance(&p, &r).unwrap();
        let rhs = hyp_distance(&p, &q).unwrap() + hyp_distance(&q, &r).unwrap();
        prop_assert!(lhs <= rhs + 1e-12, "{lhs} > {rhs}");
    }
}

proptest! {
    #[test]
    fn distance_is_isometry_invariant(p in point(), q in point(), m in hyperbolic_element()) {
        let (mp, mq) = (mobius_apply(&m, &p).unwrap(), mobius_apply(&m, &q).unwrap());
        let before = hyp_distance(&p, &q).unwrap();
        let after = hyp_distance(&mp, &mq).unwrap();
        prop_assert!((before - after).abs() <= 1e-10 * before.max(1.0));
    }

    #[test]
    fn translation_length_is_conjugation_invariant(g in hyperbolic_element(), h in unimodular()) {
        let conj = h.compose(&g).compose(&h.inverse());
        let a = translation_length(&g).unwrap();
        let b = translation_length(&conj).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0), "{a} vs {b}");
    }

    #[test]
    fn vertical_busemann_cocycle(p in point(), lambda in 0.05..20.0f64) {
        let m = MobiusElement::dilation(lambda).unwrap();
        let mp = mobius_apply(&m, &p).unwrap();
        let diff = vertical_busemann(&mp).unwrap() - vertical_busemann(&p).unwrap();
        prop_assert!((diff + lambda.ln()).abs() <= 1e-10);
    }

    #[test]
    fn product_busemann_is_one_lipschitz(
        p in point(), q in point(), t1 in -3.0..3.0f64, t2 in -3.0..3.0f64, l in 0.3..3.0f64,
    ) {
        let x = ProductPoint::new(p.x, p.y, t1).unwrap();
        let y = ProductPoint::new(q.x, q.y, t2).unwrap();
        let gap = (busemann(l, &x).unwrap() - busemann(l, &y).unwrap()).abs();
        prop_assert!(gap <= product_distance(l, &x, &y).unwrap() + 2e-9);
    }

    #[test]
    fn product_spectrum_matches_double_loop(
        rest in prop::collection::vec(1u32..60, 0..6), l in 0.5..8.0f64, cutoff in 1.0..80.0f64,
    ) {
        let mut sig: Vec<f64> = std::iter::once(0.0).chain(rest.iter().map(|k| *k as f64 * 0.25)).collect();
        sig.sort_by(f64::total_cmp);
        let mut flat: Vec<f64> = Vec::new();
        for &lambda in &sig {
            for n in -500i64..=500 {
                let v = lambda + (TAU * n as f64 / l).powi(2);
                if v <= cutoff {
                    flat.push(v);
                }
            }
        }
        flat.sort_by(f64::total_cmp);
        let got = product_spectrum(&SigmaSpectrum::new(sig).unwrap(), l, cutoff).unwrap();
        let expanded: Vec<f64> = got.iter().flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity)).collect();
        prop_assert_eq!(expanded, flat);
        prop_assert!(got.windows(2).all(|w| w[0].value < w[1].value));
    }

    #[test]
    fn length_entries_are_pythagorean_sorted_and_distinct(
        word in prop::collection::vec(any::<bool>(), 2..6), l in 0.2..3.0f64, n_max in 0u32..3,
    ) {
        let upper = MobiusElement::new(1.0, 1.0, 0.0, 1.0).unwrap();
        let lower = MobiusElement::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let g = word
            .iter()
            .fold(MobiusElement::IDENTITY, |acc, &u| acc.compose(if u { &upper } else { &lower }));
        let gens = vec![MobiusElement::new(2.0, 1.0, 1.0, 1.0).unwrap(), g];
        let entries = enumerate_length_spectrum(&gens, 3, l, n_max).unwrap();
        for e in &entries {
            prop_assert_eq!(e.ell, mls_length(e.ell_sigma, e.n, l).unwrap());
        }
        prop_assert!(entries.windows(2).all(|w| w[0].ell <= w[1].ell));
        for (i, a) in entries.iter().enumerate() {
            for b in &entries[i + 1..] {
                prop_assert!(!(a.n == b.n && (a.ell_sigma - b.ell_sigma).abs() <= 1e-9));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn metric_compatibility_and_curvature_symmetries(
        x in -1.5..1.5f64, ly in -1.0..1.0f64, t in -2.0..2.0f64,
    ) {
        let q = ChartPoint::new(x, ly.exp(), t).unwrap();
        for spec in all_kinds() {
            prop_assert!(metric_compatibility_residual(&spec, &q).unwrap() <= 1e-6, "{}", spec.kind_name());
            let c = curvature_at(&spec, &q).unwrap();
            prop_assert!(c.symmetry_residual <= 1e-6 && c.bianchi_residual <= 1e-6, "{}", spec.kind_name());
        }
    }

    #[test]
    fn geodesics_are_reversible(
        x in -1.0..1.0f64, ly in -0.5..0.5f64, dir in prop::array::uniform3(-1.0..1.0f64), kind in 0usize..4,
    ) {
        prop_assume!(dir.iter().map(|d| d * d).sum::<f64>() > 0.05);
        let spec = &all_kinds()[kind];
        let q = ChartPoint::new(x, ly.exp(), 0.0).unwrap();
        let s = PhaseState::normalized(spec, q, Vector3::from(dir)).unwrap();
        let fwd = integrate_geodesic(spec, q, s.v, 3.0, 1e-3).unwrap();
        prop_assume!(!fwd.truncated);
        let end = fwd.states.last().unwrap();
        let back = integrate_geodesic(spec, end.q, -end.v, 3.0, 1e-3).unwrap();
        let home = back.states.last().unwrap().q.coords();
        prop_assert!((home - q.coords()).amax() <= 1e-6, "{home:?} vs {q:?}");
    }

    #[test]
    fn product_geodesics_commute_with_isometries(
        x in -1.0..1.0f64, ly in -0.5..0.5f64, dir in prop::array::uniform3(-1.0..1.0f64), m in hyperbolic_element(),
    ) {
        prop_assume!(dir.iter().map(|d| d * d).sum::<f64>() > 0.05);
        let spec = MetricSpec::product(1.0).unwrap();
        let q = ChartPoint::new(x, ly.exp(), 0.3).unwrap();
        let s = PhaseState::normalized(&spec, q, Vector3::from(dir)).unwrap();
        let moved = mobius_apply(&m, &q.base()).unwrap();
        let (vx, vy) = m.push_vector(&q.base(), (s.v.x, s.v.y)).unwrap();
        let q2 = ChartPoint::new(moved.x, moved.y, q.t).unwrap();
        let a = integrate_geodesic(&spec, q, s.v, 2.0, 1e-3).unwrap();
        let b = integrate_geodesic(&spec, q2, Vector3::new(vx, vy, s.v.z), 2.0, 1e-3).unwrap();
        prop_assume!(!a.truncated && !b.truncated);
        let end = a.states.last().unwrap().q;
        let mapped = mobius_apply(&m, &end.base()).unwrap();
        let other = b.states.last().unwrap().q;
        // compare in the hyperbolic metric, which is what the isometry preserves
        let gap = hyp_distance(&mapped, &other.base()).unwrap() + (end.t - other.t).abs();
        prop_assert!(gap <= 1e-6, "gap {gap}");
    }
}

#[test]
fn epsilon0_is_monotone_on_a_grid() {
    let grid: Vec<f64> = (1..=10).map(|k| 0.4 * k as f64).collect();
    for &lambda1 in &[0.5, 2.0, 30.0] {
        for &l in &grid {
            let row: Vec<f64> = grid.iter().map(|&d| epsilon0(lambda1, l, d).unwrap().1).collect();
            assert!(row.windows(2).all(|w| w[1] < w[0]), "eps0 must fall with diam");
        }
        for &d in &grid {
            let col: Vec<f64> = grid.iter().map(|&l| epsilon0(lambda1, l, d).unwrap().1).collect();
            assert!(col.windows(2).all(|w| w[1] <= w[0]), "eps0 must not grow with L");
        }
    }
}

#[test]
fn wronskian_is_conserved() {
    let cases = [
        (
            warped(0.1),
            ChartPoint::new(0.1, 1.1, 0.0).unwrap(),
            Vector3::new(0.3, 0.2, 0.9),
        ),
        (
            MetricSpec::product(1.0).unwrap(),
            ChartPoint::new(0.0, 1.0, 0.0).unwrap(),
            Vector3::new(0.7, 0.4, 0.5),
        ),
        (
            MetricSpec::twisted(0.05, potential_by_name("log_y").unwrap()).unwrap(),
            ChartPoint::new(0.2, 0.9, 0.0).unwrap(),
            Vector3::new(0.5, -0.3, 0.6),
        ),
    ];
    for (spec, q, dir) in cases {
        let s = PhaseState::normalized(&spec, q, dir).unwrap();
        let traj = integrate_geodesic(&spec, q, s.v, 8.0, 1e-3).unwrap();
        let run = propagate_jacobi(&traj).unwrap();
        let w = |k: usize| run.a_prime[k].transpose() * run.a[k] - run.a[k].transpose() * run.a_prime[k];
        let w0 = w(0);
        let drift = (0..run.times.len()).map(|k| (w(k) - w0).amax()).fold(0.0, f64::max);
        assert!(drift <= 1e-6, "{}: Wronskian drift {drift:e}", spec.kind_name());
    }
}

fn central_conjugate_point(eps: f64) -> f64 {
    let spec = warped(eps);
    let q = ChartPoint::new(0.0, 1.0, 0.0).unwrap();
    let s = PhaseState::normalized(&spec, q, Vector3::new(0.0, 0.0, 1.0)).unwrap();
    let traj = integrate_geodesic(&spec, q, s.v, 15.0, 1e-3).unwrap();
    propagate_jacobi(&traj)
        .unwrap()
        .first_conjugate()
        .expect("conjugate point before t = 15")
}

#[test]
fn sturm_monotonicity_in_warp_strength() {
    let t: Vec<f64> = [0.05, 0.1, 0.2].iter().map(|&e| central_conjugate_point(e)).collect();
    assert!(t[0] > t[1] && t[1] > t[2], "{t:?}");
}

#[test]
fn warped_witness_has_positive_r_v_and_a_conjugate_point() {
    let r_v = r_v_operator(&warped(0.1), &ChartPoint::new(0.0, 1.0, 0.0).unwrap()).unwrap();
    assert!(r_v.symmetric_eigenvalues().max() > 0.0);
    assert!(central_conjugate_point(0.1).is_finite());
}

#[test]
fn twisted_curvature_tends_to_product_linearly() {
    let product = MetricSpec::product(1.0).unwrap();
    let q = ChartPoint::new(0.3, 1.4, 0.0).unwrap();
    let base = curvature_at(&product, &q).unwrap().riemann;
    let mut scaled = Vec::new();
    for alpha in [1e-2, 1e-3, 1e-4] {
        let spec = MetricSpec::twisted(alpha, potential_by_name("log_y").unwrap()).unwrap();
        let r = curvature_at(&spec, &q).unwrap().riemann;
        let mut diff: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        diff = diff.max((r[a][b][c][d] - base[a][b][c][d]).abs());
                    }
                }
            }
        }
        scaled.push(diff / alpha);
    }
    // O(α): the difference over α stays bounded as α shrinks
    assert!(scaled.iter().all(|s| *s <= 10.0), "{scaled:?}");
    assert!(scaled[2] <= 2.0 * scaled[0] + 1e-3, "{scaled:?}");
}
