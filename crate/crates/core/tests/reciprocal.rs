mod common;

use common::{beta_scale, christoffel_curvature, kdv_ratio_fd, KdvOracle, Rng};
use proptest::prelude::*;
use whitham_ch::ch_modulation::speeds_elliptic;
use whitham_ch::curve::ChCurve;
use whitham_ch::kdv_modulation::{kdv_metric, KdvCurve, KdvMetric};
use whitham_ch::metric_geometry::{metric, PAIRS};
use whitham_ch::reciprocal::*;

#[test]
fn velocity_identity_on_random_curves() {
    let mut rng = Rng::new(41);
    for _ in 0..50 {
        let (nu, u) = rng.curve(0.1);
        let p = pair(&ChCurve::new(nu, u).unwrap()).unwrap();
        let ct = tilde_speeds(&p).unwrap();
        let c = speeds_elliptic(&p.ch);
        for i in 0..3 {
            assert!((ct[i] - c[i]).abs() < 1e-9 * (1.0 + c[i].abs()));
        }
        assert!((p.h0 - casimir(p.kdv.beta()).unwrap()).abs() < 1e-15 * p.h0);
    }
}

#[test]
fn velocity_identity_against_oracle() {
    let mut rng = Rng::new(42);
    for _ in 0..8 {
        let (nu, u) = rng.curve(0.2);
        let ch = ChCurve::new(nu, u).unwrap();
        let beta = beta_of(nu, u);
        let o = KdvOracle::new(beta);
        let v = kdv_ratio_fd(beta, KdvOracle::omega, KdvOracle::k);
        let n = beta.iter().map(|b| 1.0 / b).sum::<f64>() - nu + 2.0 * o.alpha0();
        let c = speeds_elliptic(&ch);
        for i in 0..3 {
            let rhs = v[i] * o.h0() + n;
            assert!((c[i] - rhs).abs() < 1e-6 * (1.0 + c[i].abs()), "{c:?} at {i}: {rhs}");
        }
        let p = pair(&ch).unwrap();
        assert!((p.n - n).abs() < 1e-11 * (1.0 + n.abs()));
        assert!((p.h0 - o.h0()).abs() < 1e-11 * o.h0());
    }
}

#[test]
fn pushed_metric_matches_oracle() {
    let mut rng = Rng::new(43);
    for _ in 0..10 {
        let (nu, u) = rng.curve(0.1);
        let ch = ChCurve::new(nu, u).unwrap();
        let p = pair(&ch).unwrap();
        for e in 0..4 {
            let d = metric_correspondence(&p, e).unwrap();
            assert!(d < 1e-8, "exponent {e}: {d}");
        }
        // exponent 0 directly: g_ii(u) (du/dβ)² = (β+α₁)²/(∏(β^i−β^j) β³ ℋ₀²)
        let beta = p.kdv.beta();
        let o = KdvOracle::new(beta);
        let g = metric(&ch, 0).unwrap();
        for i in 0..3 {
            let pushed = g[i] / beta[i].powi(4);
            let expect = (beta[i] + o.alpha1()).powi(2) / (o.prod_diff(i) * beta[i].powi(3) * o.h0().powi(2));
            assert!((pushed - expect).abs() < 1e-9 * expect.abs(), "{pushed} vs {expect}");
        }
    }
}

#[test]
fn correspondence_table_passes() {
    for (nu, u) in [(0.5, [0.3, 1.2, 2.9]), (0.0, [0.4, 1.0, 3.5]), (1.7, [-1.2, 0.1, 4.0])] {
        let p = pair(&ChCurve::new(nu, u).unwrap()).unwrap();
        let t = table1(&p).unwrap();
        assert_eq!(t.rows.len(), 8);
        for r in &t.rows {
            assert!(r.passed, "{:?} slot {}: deviation {}", r.side, r.slot, r.curvature_deviation);
        }
        for r in &t.relations {
            assert!(r.passed, "{}: {}", r.name, r.residual);
        }
        assert!(t.passed());
        let text = t.to_text();
        assert!(text.contains("H0"));
        assert_eq!(t.beta, beta_of(nu, u));
    }
}

#[test]
fn casimir_rescaling_gives_the_ch_metrics() {
    let (nu, u) = (0.4f64, [0.2, 1.3, 3.1]);
    let ch = ChCurve::new(nu, u).unwrap();
    let beta = beta_of(nu, u);
    let c = speeds_elliptic(&ch);
    let h0 = casimir(beta).unwrap();
    // g^KdV/(8ℋ₀²) is the CH exponent-3 metric, g^KdV/(β³ℋ₀²) the flat exponent-0 one
    for (e, div) in [(0u32, 8.0), (3, 0.0)] {
        let r = ferapontov_transform(&KdvMetric { exponent: e }, casimir, beta).unwrap();
        let expect = PAIRS.map(|(i, j)| if e == 0 { -2.0 * nu - c[i] - c[j] } else { 0.0 });
        let g = move |b: [f64; 3]| {
            let o = KdvOracle::new(b);
            [0, 1, 2].map(|i| {
                let d = if e == 0 { div } else { b[i].powi(3) };
                (b[i] + o.alpha1()).powi(2) / (o.prod_diff(i) * d * o.h0().powi(2))
            })
        };
        let (sec, _) = christoffel_curvature(&g, beta, beta_scale(beta));
        for k in 0..3 {
            let tol = 1e-4 * (1.0 + expect[k].abs());
            assert!((r.curvature[k] - expect[k]).abs() < tol, "{:?} vs {expect:?}", r.curvature);
            assert!((r.predicted[k] - expect[k]).abs() < 10.0 * tol);
            assert!((sec[k] - expect[k]).abs() < tol, "{sec:?} vs {expect:?}");
        }
        let m = kdv_metric(&KdvCurve::new(beta).unwrap(), e).unwrap();
        for i in 0..3 {
            assert!((r.metric[i] - m[i] / (h0 * h0)).abs() < 1e-14 * (m[i] / (h0 * h0)).abs());
        }
    }
}

#[test]
fn flat_metric_rescaled_by_linear_factor() {
    let beta = [2.1, 1.2, 0.5];
    let r = ferapontov_transform(&KdvMetric { exponent: 0 }, |b| Ok(b[0] + 2.0 * b[1] + b[2]), beta).unwrap();
    assert!(r.residual < 1e-4, "{}", r.residual);
    let a = |b: [f64; 3]| b[0] + 2.0 * b[1] + b[2];
    let g = move |b: [f64; 3]| {
        let o = KdvOracle::new(b);
        [0, 1, 2].map(|i| (b[i] + o.alpha1()).powi(2) / (8.0 * o.prod_diff(i) * a(b).powi(2)))
    };
    let (sec, _) = christoffel_curvature(&g, beta, beta_scale(beta));
    for k in 0..3 {
        assert!((sec[k] - r.curvature[k]).abs() < 1e-4 * (1.0 + sec[k].abs()), "{sec:?} {:?}", r.curvature);
    }
}

#[test]
fn vanishing_factor_is_rejected() {
    let beta = [2.1, 1.2, 0.5];
    assert!(ferapontov_transform(&KdvMetric { exponent: 0 }, |_| Ok(0.0), beta).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn beta_map_round_trips(nu in 0.0f64..2.0, a in 0.05f64..5.0, d1 in 0.05f64..2.0, d2 in 0.05f64..2.0) {
        let u = [a - nu, a - nu + d1, a - nu + d1 + d2];
        let b = beta_of(nu, u);
        prop_assert!(b[0] > b[1] && b[1] > b[2] && b[2] > 0.0);
        let back = u_of(nu, b);
        for i in 0..3 {
            prop_assert!((back[i] - u[i]).abs() < 1e-12 * (1.0 + u[i].abs()));
        }
    }

    #[test]
    fn reciprocal_coefficient_two_ways(nu in 0.0f64..2.0, a in 0.2f64..3.0, d1 in 0.2f64..2.0, d2 in 0.2f64..2.0) {
        let u = [a - nu, a - nu + d1, a - nu + d1 + d2];
        let p = pair(&ChCurve::new(nu, u).unwrap()).unwrap();
        prop_assert!(p.h0 > 0.0);
        prop_assert!((p.n - p.hamiltonians.n_gradient).abs() < 1e-7 * (1.0 + p.n.abs()));
        prop_assert!((p.h0 - p.hamiltonians.h0_wave).abs() < 1e-8 * p.h0);
    }
}
