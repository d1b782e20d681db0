//! Diagonal metrics of hydrodynamic type in three Riemann invariants:
//! rotation coefficients, curvature, Egorov defect and the Tsarev relation.
//!
//! Metrics may be indefinite. With Lamé coefficients `H_i = √|g_ii|` and
//! signs `ε_i = sign g_ii`, the rotation coefficients are
//! `β_ij = ∂_i H_j / H_i`, and the nonzero curvature components are
//!
//! ```text
//! R^{ij}_{ij} = −(ε_i ∂_i β_ij + ε_j ∂_j β_ji + Σ_{p≠i,j} ε_p β_pi β_pj) / (H_i H_j)
//! R^{ij}_{il} = −ε_j (∂_l β_ji − β_jl β_li) / (H_i H_j)
//! ```
//!
//! For a positive metric these are the usual Darboux-Lamé formulas.

use serde::Serialize;

use crate::ch_modulation::speeds_elliptic;
use crate::curve::{Branch, ChCurve};
use crate::error::{Error, Result};
use crate::scalar::{lit, sgn, to_f64, tol, Scalar};

/// Unordered index pairs `(0,1), (0,2), (1,2)`.
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// A diagonal covariant metric `g_ii(u)` on an open set of `R³`.
pub trait DiagonalMetric<T: Scalar> {
    fn metric(&self, u: [T; 3]) -> Result<[T; 3]>;

    /// Length scale of the coordinate neighbourhood where the metric is
    /// defined; finite-difference steps are proportional to it.
    fn scale(&self, u: [T; 3]) -> T;

    /// Rotation coefficients `β_ij = ∂_i H_j / H_i`; central differences
    /// unless overridden.
    fn rotation(&self, u: [T; 3]) -> Result<[[T; 3]; 3]> {
        rotation_fd(self, u, self.scale(u) * fd_step::<T>())
    }
}

/// Relative step of the fourth-order difference stencils used for
/// curvature.
pub fn fd_step<T: Scalar>() -> T {
    T::epsilon().powf(lit(0.2)) * lit(0.5)
}

/// Fourth-order central difference `f′(0)` from samples at `±h, ±2h`.
fn d5<T: Scalar>(fp: T, fm: T, fp2: T, fm2: T, h: T) -> T {
    (lit::<T>(8.0) * (fp - fm) - (fp2 - fm2)) / (lit::<T>(12.0) * h)
}

fn lame<T: Scalar>(g: [T; 3]) -> [T; 3] {
    [g[0].abs().sqrt(), g[1].abs().sqrt(), g[2].abs().sqrt()]
}

fn shifted<T: Scalar>(u: [T; 3], i: usize, h: T) -> [T; 3] {
    let mut v = u;
    v[i] += h;
    v
}

/// Rotation coefficients by fourth-order central differences of `H_j`.
pub fn rotation_fd<T: Scalar, M: DiagonalMetric<T> + ?Sized>(
    m: &M,
    u: [T; 3],
    h: T,
) -> Result<[[T; 3]; 3]> {
    let h0 = lame(m.metric(u)?);
    let mut b = [[T::zero(); 3]; 3];
    let two = lit::<T>(2.0);
    for i in 0..3 {
        let hp = lame(m.metric(shifted(u, i, h))?);
        let hm = lame(m.metric(shifted(u, i, -h))?);
        let hp2 = lame(m.metric(shifted(u, i, two * h))?);
        let hm2 = lame(m.metric(shifted(u, i, -two * h))?);
        for j in 0..3 {
            if i != j {
                b[i][j] = d5(hp[j], hm[j], hp2[j], hm2[j], h) / h0[i];
            }
        }
    }
    Ok(b)
}

/// A curvature component `R^{ij}_{il}` with three distinct indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffDiagonal<T> {
    pub i: usize,
    pub j: usize,
    pub l: usize,
    pub value: T,
}

/// Rotation coefficients and curvature of a diagonal metric at a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport<T> {
    /// Signs of `g_ii`.
    pub signature: [T; 3],
    /// `β_ij = ∂_i H_j / H_i` (diagonal unused).
    pub rotation: [[T; 3]; 3],
    /// `R^{ij}_{il}` for all ordered distinct triples.
    pub r_offdiag: Vec<OffDiagonal<T>>,
    /// `R^{ij}_{ij}` for the pairs of [`PAIRS`].
    pub r_sectional: [T; 3],
    /// `max |ε_j β_ij − ε_i β_ji|`: the symmetry defect of the rotation
    /// coefficients `r_ij = √ε_j β_ij / √ε_i`.
    pub egorov_defect: T,
}

impl<T: Scalar> CurvatureReport<T> {
    pub fn max_offdiag(&self) -> T {
        self.r_offdiag
            .iter()
            .fold(T::zero(), |acc, c| acc.max(c.value.abs()))
    }
}

/// Curvature of a diagonal metric at `u`.
pub fn curvature_of<T: Scalar, M: DiagonalMetric<T> + ?Sized>(
    m: &M,
    u: [T; 3],
) -> Result<CurvatureReport<T>> {
    let g = m.metric(u)?;
    if g.iter().any(|v| *v == T::zero() || !v.is_finite()) {
        return Err(Error::Singular(format!("degenerate metric at {u:?}")));
    }
    let eps = [sgn(g[0]), sgn(g[1]), sgn(g[2])];
    let h = lame(g);
    let b = m.rotation(u)?;
    let step = m.scale(u) * fd_step::<T>();
    let two = lit::<T>(2.0);
    // db[l][i][j] = ∂_l β_ij
    let mut db = [[[T::zero(); 3]; 3]; 3];
    for (l, dl) in db.iter_mut().enumerate() {
        let bp = m.rotation(shifted(u, l, step))?;
        let bm = m.rotation(shifted(u, l, -step))?;
        let bp2 = m.rotation(shifted(u, l, two * step))?;
        let bm2 = m.rotation(shifted(u, l, -two * step))?;
        for i in 0..3 {
            for j in 0..3 {
                dl[i][j] = d5(bp[i][j], bm[i][j], bp2[i][j], bm2[i][j], step);
            }
        }
    }
    let mut sectional = [T::zero(); 3];
    for (s, &(i, j)) in sectional.iter_mut().zip(PAIRS.iter()) {
        let p = 3 - i - j;
        let brace = eps[i] * db[i][i][j] + eps[j] * db[j][j][i] + eps[p] * b[p][i] * b[p][j];
        *s = -brace / (h[i] * h[j]);
    }
    let mut off = Vec::with_capacity(6);
    for i in 0..3 {
        for j in 0..3 {
            if j == i {
                continue;
            }
            let l = 3 - i - j;
            let v = -eps[j] * (db[l][j][i] - b[j][l] * b[l][i]) / (h[i] * h[j]);
            off.push(OffDiagonal { i, j, l, value: v });
        }
    }
    let mut defect = T::zero();
    for &(i, j) in PAIRS.iter() {
        defect = defect.max((eps[j] * b[i][j] - eps[i] * b[j][i]).abs());
    }
    Ok(CurvatureReport {
        signature: eps,
        rotation: b,
        r_offdiag: off,
        r_sectional: sectional,
        egorov_defect: defect,
    })
}

/// Divisor `(2(u+ν))^e` selecting one of the four Camassa-Holm metrics.
fn ch_divisor<T: Scalar>(x: T, exponent: u32) -> T {
    (lit::<T>(2.0) * x).powi(exponent as i32)
}

fn check_exponent(exponent: u32) -> Result<()> {
    if exponent > 3 {
        return Err(Error::domain(format!("metric exponent {exponent} not in 0..=3")));
    }
    Ok(())
}

/// The Camassa-Holm metric `g_ii = 4(u^i+ν) P_ν(u^i)² / (R′(u^i) P₁(−ν)²)`
/// divided by `(2(u^i+ν))^exponent`. Its signature is `(+, −, +)`.
pub fn metric<T: Scalar>(curve: &ChCurve<T>, exponent: u32) -> Result<[T; 3]> {
    check_exponent(exponent)?;
    let u = curve.u();
    let nu = curve.nu();
    let p1 = curve.p1(-nu);
    let mut g = [T::zero(); 3];
    for i in 0..3 {
        let x = u[i] + nu;
        let pn = curve.p_nu(u[i]);
        g[i] = lit::<T>(4.0) * x * pn * pn / (curve.r_prime(Branch::U(i)) * p1 * p1)
            / ch_divisor(x, exponent);
    }
    Ok(g)
}

/// Closed-form rotation coefficients of the Camassa-Holm metrics.
pub fn rotation_closed<T: Scalar>(curve: &ChCurve<T>, exponent: u32) -> Result<[[T; 3]; 3]> {
    check_exponent(exponent)?;
    let u = curve.u();
    let nu = curve.nu();
    let p1m = curve.p1(-nu);
    let kpow = (T::one() - T::from_u32(exponent).unwrap()) * lit(0.5);
    let rp = [
        curve.r_prime(Branch::U(0)),
        curve.r_prime(Branch::U(1)),
        curve.r_prime(Branch::U(2)),
    ];
    let pn = [curve.p_nu(u[0]), curve.p_nu(u[1]), curve.p_nu(u[2])];
    let mut b = [[T::zero(); 3]; 3];
    for i in 0..3 {
        let si = sgn(pn[i]) * sgn(rp[i]);
        for j in 0..3 {
            if i == j {
                continue;
            }
            let t = curve.p_branch(Branch::U(i), u[j]) - pn[j] * curve.p1(u[i]) / p1m;
            let ratio = ((u[j] + nu) / (u[i] + nu)).powf(kpow);
            b[i][j] = si * sgn(pn[j]) * ratio * t / (rp[i] * rp[j]).abs().sqrt();
        }
    }
    Ok(b)
}

/// One of the four Camassa-Holm metrics as a function of `u` at fixed `ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChMetric<T> {
    pub nu: T,
    pub exponent: u32,
}

impl<T: Scalar> DiagonalMetric<T> for ChMetric<T> {
    fn metric(&self, u: [T; 3]) -> Result<[T; 3]> {
        metric(&ChCurve::with_tolerance(self.nu, u, T::zero())?, self.exponent)
    }

    fn scale(&self, u: [T; 3]) -> T {
        (u[0] + self.nu).min(u[1] - u[0]).min(u[2] - u[1])
    }

    fn rotation(&self, u: [T; 3]) -> Result<[[T; 3]; 3]> {
        rotation_closed(&ChCurve::with_tolerance(self.nu, u, T::zero())?, self.exponent)
    }
}

/// Rotation coefficients of a Camassa-Holm metric, with the closed form
/// checked against central differences.
pub fn rotation_coefficients<T: Scalar>(curve: &ChCurve<T>, exponent: u32) -> Result<[[T; 3]; 3]> {
    let b = rotation_closed(curve, exponent)?;
    let m = ChMetric {
        nu: curve.nu(),
        exponent,
    };
    let u = curve.u();
    let f = rotation_fd(&m, u, m.scale(u) * fd_step::<T>())?;
    let mut dev = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                dev = dev.max((b[i][j] - f[i][j]).abs() / (T::one() + b[i][j].abs()));
            }
        }
    }
    crate::error::ensure(
        "rotation coefficients closed form vs finite difference",
        to_f64(dev),
        to_f64(tol::<T>(1e-5)),
    )?;
    Ok(b)
}

/// Expected `R^{ij}_{ij}` of the Camassa-Holm metric with the given exponent.
pub fn expected_sectional<T: Scalar>(curve: &ChCurve<T>, exponent: u32) -> Result<[T; 3]> {
    check_exponent(exponent)?;
    Ok(match exponent {
        0 | 1 => [T::zero(); 3],
        2 => [-T::one(); 3],
        _ => {
            let c = speeds_elliptic(curve);
            let nu2 = curve.nu() + curve.nu();
            let mut r = [T::zero(); 3];
            for (v, &(i, j)) in r.iter_mut().zip(PAIRS.iter()) {
                *v = -nu2 - c[i] - c[j];
            }
            r
        }
    })
}

/// Computed curvature with the expected values and the largest deviation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureCheck<T> {
    pub exponent: u32,
    pub report: CurvatureReport<T>,
    pub expected_sectional: [T; 3],
    pub max_deviation: T,
}

/// Compares a report with expected sectional values (off-diagonal expected
/// zero); fails naming the worst component.
pub fn compare_curvature<T: Scalar>(
    report: &CurvatureReport<T>,
    expected: [T; 3],
    tolerance: T,
    label: &str,
) -> Result<T> {
    let mut worst = (T::zero(), String::new());
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        let d = (report.r_sectional[k] - expected[k]).abs();
        if d > worst.0 || worst.1.is_empty() {
            worst = (d, format!("R^{{{}{}}}_{{{}{}}}", i + 1, j + 1, i + 1, j + 1));
        }
    }
    for c in &report.r_offdiag {
        let d = c.value.abs();
        if d > worst.0 {
            worst = (
                d,
                format!("R^{{{}{}}}_{{{}{}}}", c.i + 1, c.j + 1, c.i + 1, c.l + 1),
            );
        }
    }
    if !(worst.0 <= tolerance) {
        return Err(Error::consistency(
            format!("{label}: curvature component {}", worst.1),
            to_f64(worst.0),
            to_f64(tolerance),
        ));
    }
    Ok(worst.0)
}

/// Curvature of a Camassa-Holm metric, verified against the expected
/// values (`0, 0, −1, −2ν − C^i − C^j` for exponents 0 to 3).
pub fn curvature<T: Scalar>(curve: &ChCurve<T>, exponent: u32) -> Result<CurvatureCheck<T>> {
    let expected = expected_sectional(curve, exponent)?;
    let m = ChMetric {
        nu: curve.nu(),
        exponent,
    };
    let report = curvature_of(&m, curve.u())?;
    let scale = expected
        .iter()
        .fold(T::one(), |acc, v| acc.max(v.abs()));
    let max_deviation = compare_curvature(
        &report,
        expected,
        tol::<T>(1e-4) * scale,
        &format!("CH metric exponent {exponent}"),
    )?;
    Ok(CurvatureCheck {
        exponent,
        report,
        expected_sectional: expected,
        max_deviation,
    })
}

/// Maximal residual of `∂_j C^i / (C^j − C^i) = ∂_j log √|g_ii|` over pairs
/// with `|C^i − C^j| ≥ 1e-6`.
pub fn tsarev_residual<T: Scalar>(curve: &ChCurve<T>, exponent: u32) -> Result<T> {
    check_exponent(exponent)?;
    let h = curve.min_gap() * T::epsilon().cbrt();
    let c = speeds_elliptic(curve);
    let g = metric(curve, exponent)?;
    let two = lit::<T>(2.0);
    let mut worst = T::zero();
    for j in 0..3 {
        let p = curve.perturbed(j, h)?;
        let m = curve.perturbed(j, -h)?;
        let (cp, cm) = (speeds_elliptic(&p), speeds_elliptic(&m));
        let (gp, gm) = (metric(&p, exponent)?, metric(&m, exponent)?);
        for i in 0..3 {
            if i == j || (c[i] - c[j]).abs() < lit(1e-6) {
                continue;
            }
            let lhs = (cp[i] - cm[i]) / (two * h) / (c[j] - c[i]);
            let rhs = ((gp[i] / g[i]).ln() - (gm[i] / g[i]).ln()) / (lit::<T>(4.0) * h);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}

/// [`tsarev_residual`] with the `1e-4` acceptance bound enforced.
pub fn tsarev_check<T: Scalar>(curve: &ChCurve<T>, exponent: u32) -> Result<T> {
    let r = tsarev_residual(curve, exponent)?;
    crate::error::ensure("Tsarev relation", to_f64(r), to_f64(tol::<T>(1e-4)))?;
    Ok(r)
}

/// Member `g^{ii}(1 + 2λ(u^i+ν))` of the contravariant pencil spanned by the
/// exponent-0 and exponent-1 metrics (covariantly `g_ii / (1 + 2λ(u^i+ν))`),
/// or the covariant combination `g_ii (1 + λ/(u^i+ν))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PencilMetric<T> {
    pub nu: T,
    pub lambda: T,
    pub contravariant: bool,
}

impl<T: Scalar> PencilMetric<T> {
    fn factor(&self, x: T) -> T {
        if self.contravariant {
            T::one() / (T::one() + lit::<T>(2.0) * self.lambda * x)
        } else {
            T::one() + self.lambda / x
        }
    }
}

impl<T: Scalar> DiagonalMetric<T> for PencilMetric<T> {
    fn metric(&self, u: [T; 3]) -> Result<[T; 3]> {
        let g = metric(&ChCurve::with_tolerance(self.nu, u, T::zero())?, 0)?;
        let mut out = [T::zero(); 3];
        for i in 0..3 {
            out[i] = g[i] * self.factor(u[i] + self.nu);
        }
        Ok(out)
    }

    fn scale(&self, u: [T; 3]) -> T {
        (u[0] + self.nu).min(u[1] - u[0]).min(u[2] - u[1])
    }
}

/// Flatness residuals of one pencil member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PencilResidual<T> {
    pub lambda: T,
    /// Largest curvature component of the contravariant combination; `None`
    /// when the combination degenerates near the point.
    pub contravariant: Option<T>,
    /// Same for the covariant combination (reported only).
    pub covariant: Option<T>,
}

fn max_component<T: Scalar>(r: &CurvatureReport<T>) -> T {
    r.r_sectional
        .iter()
        .fold(r.max_offdiag(), |acc, v| acc.max(v.abs()))
}

/// Curvature residuals of pencil members; the contravariant combination
/// must be flat to `1e-4`.
pub fn pencil_check<T: Scalar>(curve: &ChCurve<T>, lambdas: &[T]) -> Result<Vec<PencilResidual<T>>> {
    let u = curve.u();
    let nu = curve.nu();
    let guard = lit::<T>(1e-3);
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let contra = PencilMetric {
            nu,
            lambda,
            contravariant: true,
        };
        let cov = PencilMetric {
            nu,
            lambda,
            contravariant: false,
        };
        let degenerate = |pm: &PencilMetric<T>| {
            u.iter()
                .any(|&x| (T::one() / pm.factor(x + nu)).abs() < guard || pm.factor(x + nu).abs() < guard)
        };
        let contravariant = if degenerate(&contra) {
            None
        } else {
            Some(max_component(&curvature_of(&contra, u)?))
        };
        let covariant = if degenerate(&cov) {
            None
        } else {
            Some(max_component(&curvature_of(&cov, u)?))
        };
        if let Some(r) = contravariant {
            crate::error::ensure(
                &format!("flat pencil at lambda = {lambda}"),
                to_f64(r),
                to_f64(tol::<T>(1e-4)),
            )?;
        }
        out.push(PencilResidual {
            lambda,
            contravariant,
            covariant,
        });
    }
    Ok(out)
}

/// Sign `s` for which the exponent-3 curvature equals `s (η^i + η^j)` with
/// `η^i = C^i + ν`, and the residual of that fit.
pub fn affinor_sign<T: Scalar>(curve: &ChCurve<T>) -> Result<(T, T)> {
    let check = curvature(curve, 3)?;
    let c = speeds_elliptic(curve);
    let nu = curve.nu();
    let mut plus = T::zero();
    let mut minus = T::zero();
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        let eta = c[i] + c[j] + nu + nu;
        plus = plus.max((check.report.r_sectional[k] - eta).abs());
        minus = minus.max((check.report.r_sectional[k] + eta).abs());
    }
    Ok(if minus <= plus {
        (-T::one(), minus)
    } else {
        (T::one(), plus)
    })
}
