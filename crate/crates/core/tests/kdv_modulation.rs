mod common;

use common::{beta_scale, christoffel_curvature, kdv_ratio_fd, random_beta, random_beta_gap, KdvOracle as Oracle, Rng};
use proptest::prelude::*;
use whitham_ch::kdv_modulation::*;

#[test]
fn normalization_constants_match_quadrature() {
    let mut rng = Rng::new(31);
    for _ in 0..20 {
        let beta = random_beta(&mut rng);
        let c = KdvCurve::new(beta).unwrap();
        let o = Oracle::new(beta);
        assert!((c.j0() - o.j0).abs() < 1e-12 * o.j0);
        assert!((c.alpha1() - o.alpha1()).abs() < 1e-11 * (1.0 + o.alpha1().abs()));
        assert!((c.alpha0() - o.alpha0()).abs() < 1e-11 * o.alpha0().abs());
        assert!((c.wavenumber() - o.k()).abs() < 1e-12 * o.k());
        assert!((c.frequency() - o.omega()).abs() < 1e-12 * o.omega());
        let cyc = c.cycle_integral(|e| e).unwrap();
        assert!((cyc - o.j1).abs() < 1e-10 * o.j1.abs());
    }
}

#[test]
fn root_order_does_not_matter() {
    let a = KdvCurve::<f64>::new([0.4, 1.3, 2.2]).unwrap();
    let b = KdvCurve::new([2.2, 0.4, 1.3]).unwrap();
    assert_eq!(a.j0(), b.j0());
    assert_eq!(a.alpha0(), b.alpha0());
    assert_eq!(a.sorted(), [2.2, 1.3, 0.4]);
    let va = neg_speeds_closed(&a);
    let vb = neg_speeds_closed(&b);
    assert!((va[0] - vb[1]).abs() < 1e-14 * va[0].abs());
}

#[test]
fn invalid_roots_are_rejected() {
    assert!(KdvCurve::new([0.0, 1.0, 2.0]).is_err());
    assert!(KdvCurve::new([-1.0, 1.0, 2.0]).is_err());
    assert!(KdvCurve::new([1.0, 1.0, 2.0]).is_err());
    assert!(KdvCurve::new([f64::NAN, 1.0, 2.0]).is_err());
}

#[test]
fn negative_flow_speeds_match_oracle() {
    let mut rng = Rng::new(32);
    for _ in 0..10 {
        let beta = random_beta(&mut rng);
        let c = KdvCurve::new(beta).unwrap();
        let v = neg_speeds(&c).unwrap();
        let r = kdv_ratio_fd(beta, Oracle::omega, Oracle::k);
        for i in 0..3 {
            assert!((v[i] - r[i]).abs() < 1e-6 * (1.0 + r[i].abs()), "{v:?} vs {r:?}");
        }
    }
}

#[test]
fn kdv_speeds_match_oracle() {
    // ω₊ = 𝒦 Σβ, the phase speed of the normalized KdV wave
    let mut rng = Rng::new(33);
    for _ in 0..10 {
        let beta = random_beta(&mut rng);
        let w = pos_speeds(&KdvCurve::new(beta).unwrap());
        let r = kdv_ratio_fd(beta, |o| o.k() * o.beta.iter().sum::<f64>(), Oracle::k);
        for i in 0..3 {
            assert!((w[i] - r[i]).abs() < 1e-6 * (1.0 + r[i].abs()), "{w:?} vs {r:?}");
        }
    }
}

#[test]
fn curvature_table_matches_christoffel_oracle() {
    let mut rng = Rng::new(34);
    for _ in 0..4 {
        let beta = random_beta_gap(&mut rng, 0.3);
        let c = KdvCurve::new(beta).unwrap();
        let w = pos_speeds(&c);
        for e in 0..4u32 {
            let g = move |b: [f64; 3]| {
                let o = Oracle::new(b);
                [0, 1, 2].map(|i| {
                    let d = [8.0, 4.0 * b[i], 2.0 * b[i] * b[i], b[i].powi(3)][e as usize];
                    (b[i] + o.alpha1()).powi(2) / o.prod_diff(i) / d
                })
            };
            let (sec, off) = christoffel_curvature(&g, beta, beta_scale(beta));
            let expected = match e {
                0 | 1 => [0.0; 3],
                2 => [-0.5; 3],
                _ => [(0, 1), (0, 2), (1, 2)].map(|(i, j)| -(w[i] + w[j]) / 8.0),
            };
            let check = kdv_curvature(&c, e).unwrap();
            for k in 0..3 {
                let tol = 1e-4 * (1.0 + expected[k].abs());
                assert!((sec[k] - expected[k]).abs() < tol, "e={e}: {sec:?} vs {expected:?}");
                assert!((check.report.r_sectional[k] - expected[k]).abs() < tol);
            }
            assert!(off < 1e-4);
        }
    }
}

#[test]
fn casimir_and_reciprocal_coefficient() {
    let mut rng = Rng::new(35);
    for _ in 0..5 {
        let beta = random_beta(&mut rng);
        let nu = rng.range(0.0, 2.0);
        let c = KdvCurve::new(beta).unwrap();
        let h = kdv_hamiltonians(&c, nu).unwrap();
        let o = Oracle::new(beta);
        assert!((h.h0 - o.h0()).abs() < 1e-11 * o.h0());
        assert!((h.h0_wave - o.h0()).abs() < 1e-8 * o.h0());
        // ½|∇ℋ₀|² − ν in the metric ⅛g^{KdV}, all from the oracle
        let grad = kdv_ratio_fd(beta, Oracle::h0, |o| o.beta[0] + o.beta[1] + o.beta[2]);
        let sq: f64 = (0..3)
            .map(|i| grad[i] * grad[i] * 8.0 * o.prod_diff(i) / (beta[i] + o.alpha1()).powi(2))
            .sum();
        let n = beta.iter().map(|b| 1.0 / b).sum::<f64>() - nu + 2.0 * o.alpha0();
        assert!((0.5 * sq - nu - n).abs() < 1e-7 * (1.0 + n.abs()));
        assert!((h.n - n).abs() < 1e-11 * (1.0 + n.abs()));
        assert!((h.n_gradient - n).abs() < 1e-7 * (1.0 + n.abs()));
    }
}

#[test]
fn expansion_hamiltonians_match_taylor_coefficients() {
    let beta = [0.7, 1.6, 2.9];
    let c = KdvCurve::new(beta).unwrap();
    let o = Oracle::new(beta);
    let d = |e: f64| (e + o.alpha1()) / (-(e - beta[0]) * (e - beta[1]) * (e - beta[2])).sqrt();
    let h = 1e-3;
    let d1 = (8.0 * (d(h) - d(-h)) - (d(2.0 * h) - d(-2.0 * h))) / (12.0 * h);
    let d2 = (-(d(2.0 * h) + d(-2.0 * h)) + 16.0 * (d(h) + d(-h)) - 30.0 * d(0.0)) / (12.0 * h * h) / 2.0;
    let hn = expansion_hamiltonians(&c);
    assert!((hn[0] + d(0.0)).abs() < 1e-12 * d(0.0).abs());
    assert!((hn[1] + d1).abs() < 1e-9 * (1.0 + d1.abs()));
    assert!((hn[2] + 4.0 / 3.0 * d2).abs() < 1e-7 * (1.0 + d2.abs()));
}

#[test]
fn expansion_fit_reproduces_series() {
    let c = KdvCurve::new([0.5, 1.2, 2.4]).unwrap();
    let eta: Vec<f64> = FIT_ETA.to_vec();
    let fit = fit_expansion(&c, &eta).unwrap();
    assert!(fit.deviation[0] < 1e-8, "{:?}", fit.deviation);
    assert!(fit.deviation[1] < 1e-5, "{:?}", fit.deviation);
    assert!(fit.deviation[2] < 1e-2, "{:?}", fit.deviation);
    assert!(regularized_momentum(&c, 0.6).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn casimir_is_positive_and_homogeneous(
        b1 in 0.1f64..3.0, d1 in 0.1f64..2.0, d2 in 0.1f64..2.0, s in 0.5f64..2.0
    ) {
        let beta = [b1 + d1 + d2, b1 + d1, b1];
        let c = KdvCurve::new(beta).unwrap();
        let h0 = -c.product().sqrt() * c.alpha0();
        prop_assert!(h0 > 0.0);
        // α₀ has degree −1, so ℋ₀ has degree ½
        let cs = KdvCurve::new(beta.map(|b| b * s)).unwrap();
        let h0s = -cs.product().sqrt() * cs.alpha0();
        prop_assert!((h0s - s.sqrt() * h0).abs() < 1e-12 * h0s);
        prop_assert!((cs.alpha1() - s * c.alpha1()).abs() < 1e-12 * (1.0 + cs.alpha1().abs()));
    }

    #[test]
    fn speeds_interlace_roots(b1 in 0.1f64..3.0, d1 in 0.1f64..2.0, d2 in 0.1f64..2.0) {
        let c = KdvCurve::new([b1 + d1 + d2, b1 + d1, b1]).unwrap();
        let w = pos_speeds(&c);
        prop_assert!(w[1] < w[0] && w[2] < w[0]);
        prop_assert!(-c.alpha1() > b1 + d1 && -c.alpha1() < b1 + d1 + d2);
    }
}

#[test]
fn closed_rotation_matches_differences() {
    use whitham_ch::metric_geometry::{rotation_fd, DiagonalMetric};
    let beta = [0.6f64, 2.3, 1.4];
    let c = KdvCurve::new(beta).unwrap();
    for e in 0..4 {
        let m = KdvMetric { exponent: e };
        let closed = kdv_rotation(&c, e).unwrap();
        assert_eq!(closed, m.rotation(beta).unwrap());
        let fd = rotation_fd(&m, beta, 1e-3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((closed[i][j] - fd[i][j]).abs() < 1e-8 * (1.0 + fd[i][j].abs()));
            }
        }
    }
}
