//! One-phase modulation data of the Camassa-Holm equation.

use serde::Serialize;

use crate::curve::{Branch, ChCurve, DifferentialKind};
use crate::error::{ensure, Error, Result};
use crate::scalar::{lit, to_f64, tol, Scalar};
use crate::series::Series;

/// Characteristic speeds `C¹, C², C³` of the diagonal modulation system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChSpeeds<T> {
    pub c: [T; 3],
}

/// Speeds by the elliptic closed form together with the deviations of the
/// two independent routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedReport<T> {
    pub speeds: ChSpeeds<T>,
    pub differential: [T; 3],
    pub finite_difference: [T; 3],
    pub delta_differential: T,
    pub delta_finite_difference: T,
}

/// Constants of the periodic travelling wave
/// `k²(c−η)η_θ² + (2ν−c)η² + η³ + 2Bη − 2A = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TravelingWave<T> {
    pub c: T,
    pub a: T,
    pub b: T,
    pub k: T,
    pub omega: T,
    /// Roots `e¹ > e² > e³` of the cubic.
    pub e: [T; 3],
    /// `Bc + νc² − A`.
    pub alpha_c: T,
}

/// Coefficients of the large-`λ` expansion of `Ω_ν` and the averaged
/// Hamiltonian densities built from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChDensities<T> {
    pub xi0: T,
    pub xi1: T,
    pub xi2: T,
    pub h0: T,
    pub h1: T,
    pub h2: T,
    pub h_neg1: T,
}

/// Closed-form wave number `k = −2π/(I₀ P₁(−ν))`.
pub fn wavenumber_closed<T: Scalar>(curve: &ChCurve<T>) -> T {
    let two_pi = T::PI() + T::PI();
    -two_pi / (curve.i0() * curve.p1(-curve.nu()))
}

/// Wave number `k = 2π / ∮_a (λ+ν)dλ/√R`, checked against the
/// closed form.
pub fn wavenumber<T: Scalar>(curve: &ChCurve<T>) -> Result<T> {
    let nu = curve.nu();
    let period = curve.cycle_integral(|l| l + nu)?;
    let two_pi = T::PI() + T::PI();
    let k_quad = two_pi / period;
    let k = wavenumber_closed(curve);
    ensure(
        "wavenumber cycle integral vs closed form",
        to_f64(((k_quad - k) / k).abs()),
        to_f64(tol::<T>(1e-7)),
    )?;
    if !(k > T::zero()) {
        return Err(Error::consistency("wavenumber positivity", to_f64(k), 0.0));
    }
    Ok(k)
}

/// Frequency `ω = (2ν + u¹ + u² + u³) k`.
pub fn frequency<T: Scalar>(curve: &ChCurve<T>) -> Result<T> {
    Ok(frequency_factor(curve) * wavenumber(curve)?)
}

fn frequency_factor<T: Scalar>(curve: &ChCurve<T>) -> T {
    curve.nu() + curve.nu() + curve.sum_u()
}

/// Speeds from complete elliptic integrals of the three kinds.
pub fn speeds_elliptic<T: Scalar>(curve: &ChCurve<T>) -> [T; 3] {
    let [u1, u2, u3] = curve.u();
    let nu = curve.nu();
    let (k, e, pi) = curve.elliptic();
    let two = lit::<T>(2.0);
    let base = frequency_factor(curve);
    let c1 = base + two * (u1 + nu) * (u1 - u2) * pi / ((u2 + nu) * (k - e));
    let c2 = base
        + two * (u2 - u1) * pi / (k - (u2 + nu) * (u3 - u1) / ((u1 + nu) * (u3 - u2)) * e);
    let c3 = base + two * (u1 + nu) * (u3 - u2) * pi / ((u2 + nu) * e);
    [c1, c2, c3]
}

/// Speeds from the normalized differentials,
/// `C^i = Σu + 2ν − P₁(−ν)/P_ν(u^i) ∏_{j≠i}(u^i − u^j)`.
pub fn speeds_differential<T: Scalar>(curve: &ChCurve<T>) -> [T; 3] {
    let u = curve.u();
    let p1 = curve.p1(-curve.nu());
    let base = frequency_factor(curve);
    let mut c = [T::zero(); 3];
    for i in 0..3 {
        let prod = (0..3)
            .filter(|j| *j != i)
            .fold(T::one(), |acc, j| acc * (u[i] - u[j]));
        c[i] = base - p1 / curve.p_nu(u[i]) * prod;
    }
    c
}

/// Speeds as `∂_i ω / ∂_i k` by central differences of the closed forms.
pub fn speeds_finite_difference<T: Scalar>(curve: &ChCurve<T>) -> Result<[T; 3]> {
    let h = curve.min_gap() * T::epsilon().cbrt();
    let mut c = [T::zero(); 3];
    for (i, ci) in c.iter_mut().enumerate() {
        let p = curve.perturbed(i, h)?;
        let m = curve.perturbed(i, -h)?;
        let kp = wavenumber_closed(&p);
        let km = wavenumber_closed(&m);
        let wp = frequency_factor(&p) * kp;
        let wm = frequency_factor(&m) * km;
        *ci = (wp - wm) / (kp - km);
    }
    Ok(c)
}

/// Characteristic speeds, computed by three independent routes that must
/// agree; also enforces `C¹ < C³` and `C² < C³`.
pub fn speeds<T: Scalar>(curve: &ChCurve<T>) -> Result<SpeedReport<T>> {
    let c = speeds_elliptic(curve);
    let d = speeds_differential(curve);
    let f = speeds_finite_difference(curve)?;
    let mut dd = T::zero();
    let mut df = T::zero();
    for i in 0..3 {
        let scale = T::one() + c[i].abs();
        dd = dd.max((c[i] - d[i]).abs() / scale);
        df = df.max((c[i] - f[i]).abs() / scale);
    }
    ensure(
        "speeds elliptic vs differential",
        to_f64(dd),
        to_f64(tol::<T>(1e-9)),
    )?;
    ensure(
        "speeds elliptic vs finite difference",
        to_f64(df),
        to_f64(tol::<T>(1e-5)),
    )?;
    if !(c[0] < c[2] && c[1] < c[2]) {
        return Err(Error::consistency(
            "hyperbolicity ordering C1<C3, C2<C3",
            to_f64((c[0] - c[2]).max(c[1] - c[2])),
            0.0,
        ));
    }
    Ok(SpeedReport {
        speeds: ChSpeeds { c },
        differential: d,
        finite_difference: f,
        delta_differential: dd,
        delta_finite_difference: df,
    })
}

/// Travelling-wave constants of the curve.
pub fn traveling_wave<T: Scalar>(curve: &ChCurve<T>) -> Result<TravelingWave<T>> {
    let [u1, u2, u3] = curve.u();
    let nu = curve.nu();
    let e = [-u1 + u2 + u3, u1 - u2 + u3, u1 + u2 - u3];
    let c = e[0] + e[1] + e[2] + nu + nu;
    let half = lit::<T>(0.5);
    let b = half * (e[0] * e[1] + e[0] * e[2] + e[1] * e[2]);
    let a = half * e[0] * e[1] * e[2];
    let k = wavenumber(curve)?;
    let omega = c * k;
    let alpha_c = b * c + nu * c * c - a;
    // Bc + νc² − A equals C² with C = Ω/𝒦 = 2/√(β¹β²β³) = 2√Π
    let expect = lit::<T>(4.0) * curve.pi_product();
    ensure(
        "travelling wave Bc + nu c^2 - A",
        to_f64(((alpha_c - expect) / expect).abs()),
        to_f64(tol::<T>(1e-10)),
    )?;
    Ok(TravelingWave {
        c,
        a,
        b,
        k,
        omega,
        e,
        alpha_c,
    })
}

/// Series `ξ(x) = ξ₀ + ξ₁x + …` in `x = 1/λ`.
pub fn xi_series<T: Scalar>(curve: &ChCurve<T>, len: usize) -> Series<T> {
    let nu = curve.nu();
    let half = lit::<T>(0.5);
    // ∏_r (1 − r x) over the four branch points
    let mut quartic = Series::new(vec![T::one()], len);
    for r in curve.roots() {
        quartic = quartic.mul(&Series::new(vec![T::one(), -r], len));
    }
    let inv_sqrt = quartic.powf(-half);
    let pi = curve.pi_product();
    let mut num = vec![T::zero(); len];
    num[0] = curve.p2(-nu);
    let mut pw = T::one();
    for c in num.iter_mut().skip(1) {
        *c = -half * pi * pw;
        pw = pw * (-nu);
    }
    let num = Series::new(num, len);
    num.mul(&inv_sqrt).scale(-T::one() / curve.p1(-nu))
}

/// Averaged Hamiltonian densities from the expansion of `Ω_ν` at infinity.
pub fn densities<T: Scalar>(curve: &ChCurve<T>) -> Result<ChDensities<T>> {
    let nu = curve.nu();
    let xi = xi_series(curve, 4);
    let (xi0, xi1, xi2) = (xi.c[0], xi.c[1], xi.c[2]);
    let two = lit::<T>(2.0);
    let h0 = two * xi0 - nu;
    let h1 = two * xi1 + two * nu * xi0;
    let h2 = lit::<T>(8.0 / 3.0) * xi2 + lit::<T>(6.0) * nu * xi1;
    let h_neg1 = T::one() - nu / curve.residue_sigma1_sq().sqrt();
    let direct = -two * curve.p2(-nu) / curve.p1(-nu) - nu;
    ensure(
        "h0 expansion vs -2P2(-nu)/P1(-nu) - nu",
        to_f64((h0 - direct).abs() / (T::one() + direct.abs())),
        to_f64(tol::<T>(1e-9)),
    )?;
    Ok(ChDensities {
        xi0,
        xi1,
        xi2,
        h0,
        h1,
        h2,
        h_neg1,
    })
}

/// `φ(−ν)`, reduced.
pub fn phi_at_minus_nu<T: Scalar>(curve: &ChCurve<T>) -> T {
    curve
        .eval_at_branch(DifferentialKind::Phi, Branch::MinusNu)
        .expect("phi is regular at -nu")
}
