use ellres::geom::{
    blowup_local_models, elliptic_genus, product_model, projective_space_model,
    sample_genuine_config, total_space_model, FixedPoint, FixedPointModel, Side,
};
use ellres::qtheta::theta_series;
use ellres::residue::{
    cn_direct, cn_localization, cn_quadrature, integrand_at, route_error, sample_virtual_config,
    virtual_normalize, IntegrandSpec, DEFAULT_NODES, VANISHING_TOL,
};
use ellres::weights::{
    root_of_unity, sample_generic_point, sample_generic_y, EvalPoint, SamplerOptions,
    WeightVector,
};
use ellres::{Complex, EvalPoint32, QSeries32};
use proptest::prelude::*;

type C = Complex<f64>;

#[test]
fn projective_spaces_vanish_at_every_root_of_unity() {
    for n in 2..=6u32 {
        let m = projective_space_model(n as usize - 1);
        for k in 1..n as i64 {
            let y: C = root_of_unity(n, k).unwrap();
            let p = sample_generic_point(n as u64 * 31 + k as u64, m.lattice_rank, y, &m.separation_constraints(), &SamplerOptions::default()).unwrap();
            let g = elliptic_genus(&m, &p, 8).unwrap();
            assert!(g.relative_size() <= VANISHING_TOL, "N = {n}, k = {k}: {}", g.relative_size());
        }
    }
}

#[test]
fn blowup_identity_at_all_roots() {
    for n in 2..=4usize {
        let (left, right) = blowup_local_models(n);
        let mut cons = left.separation_constraints();
        cons.extend(right.separation_constraints());
        for k in 1..n as i64 {
            let y: C = root_of_unity(n as u32, k).unwrap();
            let p = sample_generic_point(k as u64, n + 1, y, &cons, &SamplerOptions::default()).unwrap();
            let l = elliptic_genus(&left, &p, 8).unwrap();
            let r = elliptic_genus(&right, &p, 8).unwrap();
            let gap = l.series.max_abs_diff(&r.series).unwrap();
            assert!(gap <= VANISHING_TOL * l.scale.max(r.scale), "N = {n}, k = {k}");
        }
    }
}

/// `E(q^sigma t) = y^{-<sigma, sum w>} E(t)` for the resolved conifold, whose
/// fixed points all have the same weight sum.
#[test]
fn conifold_genus_is_elliptic() {
    let e: Vec<_> = (0..4).map(|i| WeightVector::unit(4, i)).collect();
    let model = total_space_model(&e[..2], &e[2..], Side::Plus).unwrap();
    let sums: Vec<WeightVector> = model
        .points
        .iter()
        .map(|p| p.tangent_weights.iter().fold(WeightVector::zero(4), |a, w| &a + w))
        .collect();
    assert_eq!(sums[0], sums[1]);

    let q0 = C::new(0.01, 0.0);
    let ell = |x: f64| q0.norm().powf(x);
    let p = EvalPoint::new(
        C::new(0.6, 0.75),
        vec![
            C::from_polar(ell(-0.25), 0.4),
            C::from_polar(ell(0.25), 1.9),
            C::from_polar(ell(0.25), -2.2),
            C::from_polar(ell(0.25), 2.8),
        ],
    );
    let mut shifted = p.clone();
    shifted.t[0] *= q0;
    let pairing = sums[0].t[0];
    let base = elliptic_genus(&model, &p, 30).unwrap().series.collapse(q0);
    let moved = elliptic_genus(&model, &shifted, 30).unwrap().series.collapse(q0);
    let want = base * p.y.powi(-pairing);
    assert!((moved - want).norm() <= 1e-8 * want.norm(), "{moved} vs {want}");
}

#[test]
fn flop_sides_agree_at_generic_y() {
    let e: Vec<_> = (0..4).map(|i| WeightVector::unit(4, i)).collect();
    let plus = total_space_model(&e[..2], &e[2..], Side::Plus).unwrap();
    let minus = total_space_model(&e[..2], &e[2..], Side::Minus).unwrap();
    let mut cons = plus.separation_constraints();
    cons.extend(minus.separation_constraints());
    for seed in 0..5 {
        let p = sample_generic_point(seed, 4, sample_generic_y::<f64>(seed), &cons, &SamplerOptions::default()).unwrap();
        let a = elliptic_genus(&plus, &p, 6).unwrap();
        let b = elliptic_genus(&minus, &p, 6).unwrap();
        assert!(a.series.max_abs_diff(&b.series).unwrap() <= VANISHING_TOL * a.scale.max(b.scale));
    }
}

#[test]
fn single_precision_scalar() {
    let t: QSeries32 = theta_series(Complex::new(2.0f32, 0.0), 4).unwrap();
    assert!((t.coeff(0).re - 0.5).abs() < 1e-7);
    let m = projective_space_model(1);
    let p: EvalPoint32 = EvalPoint::new(
        Complex::new(0.3, 0.7),
        vec![Complex::new(1.1, 0.2), Complex::new(-0.4, 0.9)],
    );
    let g = elliptic_genus(&m, &p, 3).unwrap();
    assert!((g.series.coeff(0) - (Complex::new(1.0, 0.0) + p.y)).norm() < 1e-5);
}

fn small_model(rank: usize, points: Vec<Vec<Vec<i32>>>) -> FixedPointModel {
    FixedPointModel {
        lattice_rank: rank,
        points: points
            .into_iter()
            .map(|ws| FixedPoint {
                tangent_weights: ws.into_iter().map(|t| WeightVector::new(0, 0, t)).collect(),
            })
            .collect(),
    }
}

fn model_strategy(rank: usize) -> impl Strategy<Value = FixedPointModel> {
    let weight = prop::collection::vec(-2i32..=2, rank)
        .prop_filter("nonzero weight", |t| t.iter().any(|&m| m != 0));
    prop::collection::vec(prop::collection::vec(weight, 0..3), 1..3)
        .prop_map(move |pts| small_model(rank, pts))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn genus_of_product_factorizes(m1 in model_strategy(2), m2 in model_strategy(1), seed in 0u64..1000) {
        let prod = product_model(&m1, &m2);
        let y: C = sample_generic_y(seed);
        let opts = SamplerOptions { separation: 0.05, ..SamplerOptions::default() };
        let p = sample_generic_point(seed, 3, y, &prod.separation_constraints(), &opts).unwrap();
        let p1 = EvalPoint::new(y, p.t[..2].to_vec());
        let p2 = EvalPoint::new(y, p.t[2..].to_vec());
        let g = elliptic_genus(&prod, &p, 8).unwrap();
        let f = &elliptic_genus(&m1, &p1, 8).unwrap().series * &elliptic_genus(&m2, &p2, 8).unwrap().series;
        prop_assert!(g.series.max_abs_diff(&f).unwrap() <= 1e-8 * g.scale.max(1.0));
    }

    #[test]
    fn three_routes_agree(seed in 0u64..10_000, rp in 0usize..4, rm in 0usize..3, n in 0i32..3) {
        prop_assume!(rp + rm > 0);
        let cfg = sample_genuine_config::<f64>(seed, rp, rm).unwrap();
        let spec = IntegrandSpec::new(n, cfg, sample_generic_y(seed));
        let direct = cn_direct(&spec, 6).unwrap();
        let quad = cn_quadrature(&spec, 6, DEFAULT_NODES).unwrap();
        let loc = cn_localization(&spec, 6).unwrap().series;
        prop_assert!(route_error(&direct.series, &quad, direct.scale).unwrap() < 1e-6);
        prop_assert!(route_error(&direct.series, &loc, direct.scale).unwrap() < 1e-6);
    }

    #[test]
    fn virtual_normalization_preserves_integrand(seed in 0u64..10_000, ep in 0usize..3, em in 0usize..3, angle in 0.0f64..6.28) {
        let y = root_of_unity(5, 2).unwrap();
        let signed = sample_virtual_config(seed, 1, 1, ep, em).unwrap();
        let norm = virtual_normalize(&signed, y).unwrap();
        let s = C::from_polar(1.05, angle);
        let a = integrand_at(&IntegrandSpec::new(1, signed, y), s, 6).unwrap();
        let b = integrand_at(&IntegrandSpec::new(1, norm, y), s, 6).unwrap();
        prop_assert!(a.rel_diff(&b).unwrap() < 1e-8);
    }
}
