mod common;

use common::{integrate_between_roots, Rng};
use proptest::prelude::*;
use whitham_ch::ch_modulation::*;
use whitham_ch::curve::ChCurve;

/// Wave number `2π / ∮_a (λ+ν)dλ/√R` by independent quadrature.
fn k_oracle(nu: f64, u: [f64; 3]) -> f64 {
    let g = |l: f64| (l + nu) / ((l + nu) * (u[2] - l)).sqrt();
    2.0 * std::f64::consts::PI / (2.0 * integrate_between_roots(&g, u[0], u[1], 1e-15))
}

/// `C^i = ∂_i ω / ∂_i k` with `ω = (2ν + Σu) k`, central differences of the
/// oracle wave number.
fn speeds_oracle(nu: f64, u: [f64; 3]) -> [f64; 3] {
    let h = 1e-4 * (u[0] + nu).min(u[1] - u[0]).min(u[2] - u[1]);
    [0, 1, 2].map(|i| {
        let at = |s: f64| {
            let mut v = u;
            v[i] += s;
            let k = k_oracle(nu, v);
            (k, (2.0 * nu + v[0] + v[1] + v[2]) * k)
        };
        let (kp, wp) = at(h);
        let (km, wm) = at(-h);
        (wp - wm) / (kp - km)
    })
}

#[test]
fn wavenumber_matches_oracle() {
    let mut rng = Rng::new(21);
    for _ in 0..20 {
        let (nu, u) = rng.curve(0.05);
        let c = ChCurve::new(nu, u).unwrap();
        let k = wavenumber(&c).unwrap();
        let r = k_oracle(nu, u);
        assert!((k - r).abs() < 1e-11 * r.abs(), "{k} vs {r}");
        assert!((wavenumber_closed(&c) - r).abs() < 1e-11 * r.abs());
        let w = frequency(&c).unwrap();
        assert!((w - (2.0 * nu + c.sum_u()) * r).abs() < 1e-10 * w.abs());
    }
}

#[test]
fn speeds_match_oracle() {
    let mut rng = Rng::new(22);
    for _ in 0..20 {
        let (nu, u) = rng.curve(0.1);
        let c = ChCurve::new(nu, u).unwrap();
        let rep = speeds(&c).unwrap();
        let o = speeds_oracle(nu, u);
        for i in 0..3 {
            let s = rep.speeds.c[i];
            assert!((s - o[i]).abs() < 1e-6 * (1.0 + s.abs()), "C{i}: {s} vs {}", o[i]);
        }
        assert!(rep.delta_differential < 1e-9);
        assert!(rep.delta_finite_difference < 1e-5);
    }
}

#[test]
fn soliton_limit_is_logarithmic() {
    // u², u³ → v: C¹ → 3u¹ + 2ν with a gap ∝ 1/K ~ 1/ln(1/ε); C², C³ merge linearly
    let (nu, u1, v) = (0.5, 0.3, 2.0);
    let mut last = f64::INFINITY;
    let mut rate = Vec::new();
    for p in 2..=9 {
        let e = 10f64.powi(-p);
        let c = ChCurve::new(nu, [u1, v - e, v + e]).unwrap();
        let s = speeds_elliptic(&c);
        let d = (s[0] - (3.0 * u1 + 2.0 * nu)).abs();
        assert!(d < last);
        last = d;
        rate.push(d * (1.0 / e).ln());
        assert!((s[2] - s[1]).abs() < 100.0 * e);
    }
    // d·ln(1/ε) settles to a constant
    let n = rate.len();
    assert!((rate[n - 1] - rate[n - 2]).abs() < 0.02 * rate[n - 1], "{rate:?}");
}

#[test]
fn harmonic_limit_is_linear() {
    let (nu, u1, u3) = (0.5, 0.3, 2.5);
    let mut last = f64::INFINITY;
    for p in 2..=6 {
        let e = 10f64.powi(-p);
        let c = ChCurve::new(nu, [u1, u1 + e, u3]).unwrap();
        let d = (speeds_elliptic(&c)[2] - (3.0 * u3 + 2.0 * nu)).abs();
        assert!(d < last);
        last = d;
    }
    assert!(last < 1e-4);
}

#[test]
fn traveling_wave_constants() {
    // u = (1,2,3), ν = 0: e = (4, 2, 0), c = 6
    let c = ChCurve::<f64>::new(0.0, [1.0, 2.0, 3.0]).unwrap();
    let tw = traveling_wave(&c).unwrap();
    assert_eq!(tw.e, [4.0, 2.0, 0.0]);
    assert_eq!(tw.c, 6.0);
    assert!((tw.alpha_c - 4.0 * 6.0).abs() < 1e-12);
    assert!((tw.omega - tw.c * tw.k).abs() < 1e-14);
}

#[test]
fn density_h0_two_ways() {
    let mut rng = Rng::new(23);
    for _ in 0..20 {
        let (nu, u) = rng.curve(0.05);
        let c = ChCurve::new(nu, u).unwrap();
        let d = densities(&c).unwrap();
        let direct = -2.0 * c.p2(-nu) / c.p1(-nu) - nu;
        assert!((d.h0 - direct).abs() < 1e-9 * (1.0 + direct.abs()));
    }
}

#[test]
fn xi_series_matches_numeric_expansion() {
    // ξ(x) against the defining ratio evaluated at small x
    let c = ChCurve::new(0.7, [0.1, 1.3, 2.2]).unwrap();
    let s = xi_series(&c, 6);
    let nu = c.nu();
    let f = |x: f64| {
        let prod: f64 = c.roots().iter().map(|r| 1.0 - r * x).product();
        -(c.p2(-nu) - c.pi_product() * x / (2.0 * (1.0 + nu * x))) / (c.p1(-nu) * prod.sqrt())
    };
    for &x in &[1e-2f64, 3e-3, 1e-3] {
        let series: f64 = s.c.iter().enumerate().map(|(k, a)| a * x.powi(k as i32)).sum();
        assert!((series - f(x)).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hyperbolic_ordering(nu in 0.0f64..2.0, a in 1e-3f64..2.0, b in 1e-3f64..2.0, d in 1e-3f64..2.0) {
        let u = [-nu + a, -nu + a + b, -nu + a + b + d];
        let c = speeds_elliptic(&ChCurve::new(nu, u).unwrap());
        prop_assert!(c[0] < c[2] && c[1] < c[2]);
    }

    #[test]
    fn routes_agree(nu in 0.0f64..2.0, a in 0.05f64..2.0, b in 0.05f64..2.0, d in 0.05f64..2.0) {
        let u = [-nu + a, -nu + a + b, -nu + a + b + d];
        prop_assert!(speeds(&ChCurve::new(nu, u).unwrap()).is_ok());
    }

    #[test]
    fn speeds_shift_with_galilean_nu(s in -0.5f64..0.5) {
        // shifting every branch point by the same amount moves ν → ν − s and
        // u → u + s; speeds change by s (from 3u) minus 2s (from 2ν)
        let (nu, u) = (1.0, [0.2, 1.0, 2.0]);
        let base = speeds_elliptic(&ChCurve::new(nu, u).unwrap());
        let moved = speeds_elliptic(&ChCurve::new(nu - s, u.map(|x| x + s)).unwrap());
        for i in 0..3 {
            prop_assert!((moved[i] - base[i] - s).abs() < 1e-10 * (1.0 + base[i].abs()));
        }
    }
}
