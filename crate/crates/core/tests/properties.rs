use proptest::prelude::*;

use muntz_embed::composition::{direct_composition_integral, pullback, FnExpr, FnPiece, MapSpec, PiecewiseFn};
use muntz_embed::constructions::{build_example1, hpq_ratio, verify_example1};
use muntz_embed::embedding::{necessary_check, ratio_lower_bound};
use muntz_embed::measure::{default_eps_grid, DensityExpr, DensityPiece, Measure, MeasureDescriptor};
use muntz_embed::nsq::{coefficient_bound_gram, gram_distance};
use muntz_embed::poly::MuntzPolynomial;
use muntz_embed::sequence::{muntz_sum_bound, ExponentSequence};
use muntz_embed::special::ln_beta;

mod common;

fn measure_strategy() -> impl Strategy<Value = Measure> {
    (
        prop::collection::vec((0.0..0.999f64, 0.01..2.0f64), 0..4),
        0.0..0.9f64,
        0.0..2.0f64,
        -0.5..3.0f64,
    )
        .prop_map(|(atoms, a, c, alpha)| {
            let mut mu = Measure::zero();
            for (t, w) in atoms {
                mu = mu.with_atom(t, w).unwrap();
            }
            if c > 0.0 {
                let expr = DensityExpr::PowLaw { c, alpha };
                mu = mu.with_piece(DensityPiece::new(a, 1.0, expr, alpha < 0.0).unwrap()).unwrap();
            }
            mu
        })
}

fn exponents_strategy(min: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(min..40.0f64, 1..6).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        v
    })
}

fn poly_strategy(min: f64) -> impl Strategy<Value = MuntzPolynomial> {
    exponents_strategy(min).prop_flat_map(|e| {
        let n = e.len();
        (Just(e), prop::collection::vec(-5.0..5.0f64, n))
            .prop_filter("nonzero", |(_, c)| c.iter().any(|x| x.abs() > 1e-3))
            .prop_map(|(e, c)| MuntzPolynomial::from_parts(&e, &c).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tail_mass_is_monotone_and_bounded(mu in measure_strategy(), e1 in 1e-6..1.0f64, e2 in 1e-6..1.0f64) {
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let (m_lo, m_hi) = (mu.tail_mass(lo).unwrap(), mu.tail_mass(hi).unwrap());
        prop_assert!(m_lo <= m_hi + 1e-12);
        prop_assert!(m_hi <= mu.total_mass().unwrap() + 1e-12);
    }

    #[test]
    fn sublinear_norm_scales(mu in measure_strategy(), s in 0.1..10.0f64) {
        let grid = default_eps_grid();
        let a = mu.sublinear_profile(&grid).unwrap().sublinear_norm_estimate;
        let b = mu.scaled(s).unwrap().sublinear_profile(&grid).unwrap().sublinear_norm_estimate;
        prop_assert!((b - s * a).abs() <= 1e-9 * (1.0 + s * a));
    }

    #[test]
    fn measure_json_round_trip(mu in measure_strategy()) {
        let text = serde_json::to_string(&MeasureDescriptor::from(&mu)).unwrap();
        let back = Measure::from_json(&text).unwrap();
        for e in [1e-4, 0.01, 0.3, 1.0] {
            prop_assert_eq!(mu.tail_mass(e).unwrap(), back.tail_mass(e).unwrap());
        }
    }

    #[test]
    fn l1_norm_between_bounds(p in poly_strategy(1.0)) {
        let l1 = p.l1_norm();
        prop_assert!(p.elementary_lower_bound().unwrap() <= l1 + 1e-10);
        prop_assert!(l1 <= p.triangle_l1_bound() + 1e-12);
        // Cauchy–Schwarz on [0, 1]
        prop_assert!(l1 <= p.l2_norm() * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn l1_norm_matches_quadrature(p in poly_strategy(0.0)) {
        let q = p.l1_mu_norm(&Measure::lebesgue(), 1e-12).unwrap();
        prop_assert!((p.l1_norm() - q).abs() <= 1e-9 * (1.0 + q));
    }

    #[test]
    fn gram_distance_matches_exact_projection(e in exponents_strategy(0.5).prop_filter("two", |v| v.len() >= 2)) {
        let d = gram_distance(e[0], &e[1..]).unwrap();
        let oracle = common::projection_distance_sq(e[0], &e[1..]).sqrt();
        prop_assert!((d - oracle).abs() <= 1e-10 * oracle);
    }

    #[test]
    fn gram_coefficient_bound(c in prop::collection::vec(-10.0..10.0f64, 6)) {
        let exps: Vec<f64> = (1..=6).map(|n| (n * n + 1) as f64).collect();
        let l2 = common::exact_l2_sq(&exps, &c).sqrt();
        for m in 0..6 {
            prop_assert!(c[m].abs() <= coefficient_bound_gram(&exps, m).unwrap() * l2 + 1e-9);
        }
    }

    #[test]
    fn nsq_hundred_power_bound(c in prop::collection::vec(-10.0..10.0f64, 6)) {
        let exps: Vec<f64> = (1..=6).map(|n| (n * n) as f64).collect();
        prop_assume!(c.iter().any(|x| x.abs() > 1e-6));
        let l1 = MuntzPolynomial::from_parts(&exps, &c).unwrap().l1_norm();
        for (m, a) in c.iter().enumerate() {
            prop_assert!(a.abs() <= 100f64.powi(m as i32 + 1) * l1);
        }
    }

    #[test]
    fn partial_sums_enclosed(s in 1.1..3.0f64, n in 10usize..2000) {
        let seq = ExponentSequence::power(s);
        let iv = muntz_sum_bound(&seq, n).unwrap();
        let partial: f64 = seq.materialize(n).unwrap().iter().map(|l| 1.0 / l).sum();
        prop_assert!(iv.lower <= partial * (1.0 + 1e-12));
        prop_assert!(iv.upper.is_finite() && iv.upper >= iv.lower);
    }

    #[test]
    fn hpq_ratio_matches_beta(p in 1u64..40, q in 1u64..40) {
        let r = hpq_ratio(p, q);
        prop_assert!((r.ln_norm - ln_beta(p as f64 + 1.0, q as f64 + 1.0)).abs() < 1e-12);
        // t maximizes (1-x)h(x)
        let g = |x: f64| (1.0 - x) * x.powi(p as i32) * (1.0 - x).powi(q as i32);
        prop_assert!(g(r.t) >= g(r.t - 1e-3) && g(r.t) >= g(r.t + 1e-3));
    }
}

fn affine_map() -> impl Strategy<Value = PiecewiseFn> {
    (0.05..0.95f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64).prop_map(|(x, y0, y1, y2)| {
        let piece = |a: f64, b: f64, ya: f64, yb: f64| {
            let c1 = (yb - ya) / (b - a);
            FnPiece {
                a,
                b,
                expr: FnExpr::Affine { c0: ya - c1 * a, c1 },
            }
        };
        PiecewiseFn::new(vec![piece(0.0, x, y0, y1), piece(x, 1.0, y1, y2)]).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pullback_identity(f in affine_map(), c0 in 0.1..2.0f64, c1 in 0.0..1.0f64, l in 0.5..25.0f64) {
        let phi = MapSpec::new(f).unwrap();
        let psi = PiecewiseFn::single(FnExpr::Affine { c0, c1 });
        let mu = pullback(&phi, &psi).unwrap();
        let via = mu.integrate(|y| y.powf(l), 1e-11).unwrap();
        let direct = direct_composition_integral(&phi, &psi, |y| y.powf(l), 1e-12).unwrap();
        prop_assert!((via - direct).abs() <= 1e-7, "{via} vs {direct}");
        prop_assert!((mu.total_mass().unwrap() - (c0 + c1 / 2.0)).abs() <= 1e-9);
    }

    #[test]
    fn ratio_bound_is_homogeneous(s in 0.2..5.0f64, seed in 0u64..1000) {
        let seq = ExponentSequence::geometric(1.0, 2.0);
        let mu = Measure::from_density(0.0, 1.0, DensityExpr::Poly(vec![0.0, 1.0])).unwrap();
        let a = ratio_lower_bound(&mu, &seq, 4, 4, seed).unwrap().value;
        let b = ratio_lower_bound(&mu.scaled(s).unwrap(), &seq, 4, 4, seed).unwrap().value;
        prop_assert!((b - s * a).abs() <= 1e-8 * s * a);
        // ‖(λ+1)x^λ‖_{L¹(μ)} = (λ+1)/(λ+2) < 1 for this μ
        prop_assert!(a <= 1.0 + 1e-9);
    }

    #[test]
    fn necessary_ratio_bounded_by_sublinear_norm(mu in measure_strategy()) {
        let s = mu.sublinear_profile(&default_eps_grid()).unwrap().sublinear_norm_estimate;
        let c = necessary_check(&mu, &ExponentSequence::geometric(1.0, 2.0), 20).unwrap();
        // λ μ(J_{1/λ}) ≤ ‖μ‖_S, up to the grid underestimating the sup
        prop_assert!(c.sup_ratio <= s * 1.05 + 1e-12 || s == 0.0 && c.sup_ratio == 0.0);
    }
}

#[test]
fn example1_clauses_hold_up_to_cap() {
    for n in 3..=25 {
        let ex = build_example1(n).unwrap();
        assert!(verify_example1(&ex).is_empty(), "n_max = {n}");
        assert!(ex.bounded_ok, "n_max = {n}");
    }
}
