//! Complete elliptic integrals.
//!
//! `K` and `E` come from the arithmetic-geometric mean, the third kind from
//! Carlson's symmetric integrals `R_F` and `R_J`. All arguments are squared
//! moduli (parameters) `m = s²` and squared characteristics `n = ρ²`.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Squared modulus and characteristic of the complete integrals used by a
/// spectral curve.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EllipticModulus<T> {
    pub s2: T,
    pub rho2: T,
}

impl<T: Scalar> EllipticModulus<T> {
    pub fn new(s2: T, rho2: T) -> Result<Self> {
        if !(s2 >= T::zero() && s2 < T::one()) {
            return Err(Error::domain(format!("squared modulus {s2} outside [0,1)")));
        }
        if !(rho2 < T::one()) {
            return Err(Error::domain(format!("characteristic {rho2} must be < 1")));
        }
        Ok(Self { s2, rho2 })
    }

    pub fn k(&self) -> Result<T> {
        elliptic_k(self.s2)
    }

    pub fn e(&self) -> Result<T> {
        elliptic_e(self.s2)
    }

    pub fn pi(&self) -> Result<T> {
        elliptic_pi_complete(self.rho2, self.s2)
    }
}

const MAX_ITER: usize = 100;

/// Arithmetic-geometric mean of two positive numbers.
pub fn agm<T: Scalar>(a: T, b: T) -> Result<T> {
    if !(a > T::zero() && b > T::zero()) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!("agm needs positive finite arguments, got ({a}, {b})")));
    }
    let (mut a, mut b) = (a, b);
    let half = lit::<T>(0.5);
    for _ in 0..MAX_ITER {
        if (a - b).abs() <= T::epsilon() * a {
            return Ok((a + b) * half);
        }
        let an = (a + b) * half;
        b = (a * b).sqrt();
        a = an;
    }
    Err(Error::Numerical {
        what: "agm iteration".into(),
        estimate: crate::scalar::to_f64((a - b).abs()),
    })
}

/// Complete elliptic integral of the first kind `K(m)`, `0 ≤ m < 1`.
pub fn elliptic_k<T: Scalar>(m: T) -> Result<T> {
    if !(m >= T::zero() && m < T::one()) {
        return Err(Error::domain(format!("K(m) needs 0 <= m < 1, got {m}")));
    }
    Ok(T::FRAC_PI_2() / agm(T::one(), (T::one() - m).sqrt())?)
}

/// Complete elliptic integral of the second kind `E(m)`, `0 ≤ m ≤ 1`.
pub fn elliptic_e<T: Scalar>(m: T) -> Result<T> {
    if !(m >= T::zero() && m <= T::one()) {
        return Err(Error::domain(format!("E(m) needs 0 <= m <= 1, got {m}")));
    }
    if m == T::one() {
        return Ok(T::one());
    }
    let half = lit::<T>(0.5);
    let mut a = T::one();
    let mut b = (T::one() - m).sqrt();
    // sum of 2^(n-1) c_n^2 with c_0^2 = m
    let mut sum = m * half;
    let mut pow = half;
    for _ in 0..MAX_ITER {
        let c = (a - b) * half;
        pow = pow + pow;
        sum += pow * c * c;
        let an = (a + b) * half;
        b = (a * b).sqrt();
        a = an;
        if c.abs() <= T::epsilon() * a {
            let k = T::FRAC_PI_2() / a;
            return Ok(k * (T::one() - sum));
        }
    }
    Err(Error::Numerical {
        what: "E(m) agm iteration".into(),
        estimate: crate::scalar::to_f64((a - b).abs()),
    })
}

/// Complete elliptic integral of the third kind in Legendre form,
/// `Π(n, m) = ∫₀^{π/2} dψ / ((1 − n sin²ψ) √(1 − m sin²ψ))`, for `n < 1`.
pub fn elliptic_pi_complete<T: Scalar>(n: T, m: T) -> Result<T> {
    if !(m >= T::zero() && m < T::one()) {
        return Err(Error::domain(format!("Pi(n,m) needs 0 <= m < 1, got {m}")));
    }
    if !(n < T::one()) || !n.is_finite() {
        return Err(Error::domain(format!("Pi(n,m) needs n < 1, got {n}")));
    }
    let y = T::one() - m;
    let rf = carlson_rf(T::zero(), y, T::one())?;
    if n == T::zero() {
        return Ok(rf);
    }
    let rj = carlson_rj(T::zero(), y, T::one(), T::one() - n)?;
    Ok(rf + n / lit(3.0) * rj)
}

/// Carlson's symmetric integral of the first kind `R_F(x, y, z)`.
///
/// At most one argument may be zero.
pub fn carlson_rf<T: Scalar>(x: T, y: T, z: T) -> Result<T> {
    let zero = T::zero();
    if x < zero || y < zero || z < zero {
        return Err(Error::domain("R_F needs nonnegative arguments"));
    }
    let zeros = [x, y, z].iter().filter(|v| **v == zero).count();
    if zeros > 1 {
        return Err(Error::domain("R_F allows at most one zero argument"));
    }
    let errtol = (lit::<T>(4.0) * T::epsilon()).powf(lit(1.0 / 6.0));
    let third = lit::<T>(1.0 / 3.0);
    let quarter = lit::<T>(0.25);
    let (mut x, mut y, mut z) = (x, y, z);
    for _ in 0..MAX_ITER {
        let sx = x.sqrt();
        let sy = y.sqrt();
        let sz = z.sqrt();
        let lam = sx * (sy + sz) + sy * sz;
        x = quarter * (x + lam);
        y = quarter * (y + lam);
        z = quarter * (z + lam);
        let ave = third * (x + y + z);
        let dx = (ave - x) / ave;
        let dy = (ave - y) / ave;
        let dz = (ave - z) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) <= errtol {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            let s = T::one() - e2 / lit(10.0) + e3 / lit(14.0) + e2 * e2 / lit(24.0)
                - lit::<T>(3.0) * e2 * e3 / lit(44.0);
            return Ok(s / ave.sqrt());
        }
    }
    Err(Error::Numerical {
        what: "R_F duplication".into(),
        estimate: f64::NAN,
    })
}

/// Carlson's degenerate integral `R_C(x, y)`, `y ≠ 0`.
pub fn carlson_rc<T: Scalar>(x: T, y: T) -> Result<T> {
    if x < T::zero() || y == T::zero() {
        return Err(Error::domain("R_C needs x >= 0, y != 0"));
    }
    // Cauchy principal value for y < 0
    if y < T::zero() {
        let xt = x - y;
        return Ok((x / xt).sqrt() * carlson_rc(xt, -y)?);
    }
    let errtol = (lit::<T>(4.0) * T::epsilon()).powf(lit(1.0 / 6.0));
    let third = lit::<T>(1.0 / 3.0);
    let quarter = lit::<T>(0.25);
    let (mut x, mut y) = (x, y);
    for _ in 0..MAX_ITER {
        let lam = lit::<T>(2.0) * x.sqrt() * y.sqrt() + y;
        x = quarter * (x + lam);
        y = quarter * (y + lam);
        let ave = third * (x + y + y);
        let s = (y - ave) / ave;
        if s.abs() <= errtol {
            let poly = T::one()
                + s * s * (lit::<T>(0.3) + s * (lit::<T>(1.0 / 7.0) + s * (lit::<T>(0.375) + s * lit::<T>(9.0 / 22.0))));
            return Ok(poly / ave.sqrt());
        }
    }
    Err(Error::Numerical {
        what: "R_C duplication".into(),
        estimate: f64::NAN,
    })
}

/// Carlson's symmetric integral of the third kind `R_J(x, y, z, p)`, `p > 0`.
pub fn carlson_rj<T: Scalar>(x: T, y: T, z: T, p: T) -> Result<T> {
    let zero = T::zero();
    if x < zero || y < zero || z < zero || !(p > zero) {
        return Err(Error::domain("R_J needs x,y,z >= 0 and p > 0"));
    }
    if [x, y, z].iter().filter(|v| **v == zero).count() > 1 {
        return Err(Error::domain("R_J allows at most one zero among x, y, z"));
    }
    let errtol = lit::<T>(0.6) * T::epsilon().powf(lit(1.0 / 6.0));
    let quarter = lit::<T>(0.25);
    let (mut x, mut y, mut z, mut p) = (x, y, z, p);
    let mut sum = zero;
    let mut fac = T::one();
    for _ in 0..MAX_ITER {
        let sx = x.sqrt();
        let sy = y.sqrt();
        let sz = z.sqrt();
        let lam = sx * (sy + sz) + sy * sz;
        let alpha = p * (sx + sy + sz) + sx * sy * sz;
        let alpha = alpha * alpha;
        let beta = p * (p + lam) * (p + lam);
        sum += fac * carlson_rc(alpha, beta)?;
        fac = fac * quarter;
        x = quarter * (x + lam);
        y = quarter * (y + lam);
        z = quarter * (z + lam);
        p = quarter * (p + lam);
        let ave = lit::<T>(0.2) * (x + y + z + p + p);
        let dx = (ave - x) / ave;
        let dy = (ave - y) / ave;
        let dz = (ave - z) / ave;
        let dp = (ave - p) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()).max(dp.abs()) <= errtol {
            let ea = dx * (dy + dz) + dy * dz;
            let eb = dx * dy * dz;
            let ec = dp * dp;
            let ed = ea - lit::<T>(3.0) * ec;
            let ee = eb + lit::<T>(2.0) * dp * (ea - ec);
            let c1 = lit::<T>(3.0 / 14.0);
            let c2 = lit::<T>(1.0 / 3.0);
            let c3 = lit::<T>(3.0 / 22.0);
            let c4 = lit::<T>(3.0 / 26.0);
            let c5 = lit::<T>(0.75) * c3;
            let c6 = lit::<T>(1.5) * c4;
            let c7 = lit::<T>(0.5) * c2;
            let c8 = c3 + c3;
            let ans = lit::<T>(3.0) * sum
                + fac
                    * (T::one() + ed * (-c1 + c5 * ed - c6 * ee)
                        + eb * (c7 + dp * (-c8 + dp * c4))
                        + dp * ea * (c2 - dp * c3)
                        - c2 * dp * ec)
                    / (ave * ave.sqrt());
            return Ok(ans);
        }
    }
    Err(Error::Numerical {
        what: "R_J duplication".into(),
        estimate: f64::NAN,
    })
}
