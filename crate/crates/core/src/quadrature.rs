//! Gaussian quadrature rules.

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Scalar};

/// Nodes and weights of an interpolatory rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Scalar> Rule<T> {
    /// Gauss-Jacobi rule for the weight `(1 − x)^α (1 + x)^β`, `α, β > −1`,
    /// by the Golub-Welsch eigenvalue method.
    pub fn gauss_jacobi(n: usize, alpha: T, beta: T) -> Result<Self> {
        let one = T::one();
        let two = lit::<T>(2.0);
        if n == 0 || !(alpha > -one) || !(beta > -one) {
            return Err(Error::domain("Gauss-Jacobi needs n >= 1 and alpha, beta > -1"));
        }
        let ab = alpha + beta;
        let mut diag = vec![T::zero(); n];
        let mut off = vec![T::zero(); n];
        diag[0] = (beta - alpha) / (ab + two);
        for (k, d) in diag.iter_mut().enumerate().skip(1) {
            let kk = T::from_usize(k).unwrap();
            let s = two * kk + ab;
            *d = (beta * beta - alpha * alpha) / (s * (s + two));
        }
        if n > 1 {
            // first off-diagonal written in reduced form to stay finite at α + β = −1
            let b1 = lit::<T>(4.0) * (one + alpha) * (one + beta)
                / ((ab + two) * (ab + two) * (ab + lit(3.0)));
            off[1] = b1.sqrt();
        }
        for (k, o) in off.iter_mut().enumerate().skip(2) {
            let kk = T::from_usize(k).unwrap();
            let s = two * kk + ab;
            let num = lit::<T>(4.0) * kk * (kk + alpha) * (kk + beta) * (kk + ab);
            *o = (num / (s * s * (s + one) * (s - one))).sqrt();
        }
        let mu0 = two.powf(ab + one) * gamma(alpha + one) * gamma(beta + one) / gamma(ab + two);
        let (nodes, first) = symmetric_tridiagonal_eigen(diag, off)?;
        let mut pairs: Vec<(T, T)> = nodes
            .into_iter()
            .zip(first)
            .map(|(x, z)| (x, mu0 * z * z))
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        })
    }

    /// Gauss-Legendre rule.
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        Self::gauss_jacobi(n, T::zero(), T::zero())
    }

    /// Gauss-Chebyshev rule of the first kind, weight `(1 − x²)^{−1/2}`.
    pub fn gauss_chebyshev(n: usize) -> Self {
        let nn = T::from_usize(n).unwrap();
        let w = T::PI() / nn;
        let nodes = (0..n)
            .map(|j| {
                let jj = T::from_usize(2 * j + 1).unwrap();
                -(jj * T::PI() / (lit::<T>(2.0) * nn)).cos()
            })
            .collect();
        Self {
            nodes,
            weights: vec![w; n],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(T) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + w * f(x))
    }
}

/// `∫_a^b g(λ) dλ / √((λ − a)(b − λ))` with an `n`-point Gauss-Chebyshev rule.
pub fn chebyshev_segment<T: Scalar>(a: T, b: T, n: usize, mut g: impl FnMut(T) -> T) -> T {
    let half = lit::<T>(0.5);
    let mid = (a + b) * half;
    let rad = (b - a) * half;
    let nn = T::from_usize(n).unwrap();
    let mut acc = T::zero();
    for j in 0..n {
        let th = T::from_usize(2 * j + 1).unwrap() * T::PI() / (lit::<T>(2.0) * nn);
        acc += g(mid - rad * th.cos());
    }
    acc * T::PI() / nn
}

/// Starting order of [`chebyshev_adaptive`].
pub const CHEB_START: usize = 16;
/// Order cap of [`chebyshev_adaptive`].
pub const CHEB_MAX: usize = 1 << 14;

/// Same integral as [`chebyshev_segment`], doubling the order until two
/// successive values agree to `rel_tol` (relative to `scale` when the value
/// itself is near zero).
pub fn chebyshev_adaptive<T: Scalar>(
    a: T,
    b: T,
    rel_tol: T,
    scale: T,
    mut g: impl FnMut(T) -> T,
) -> Result<T> {
    let mut n = CHEB_START;
    let mut prev = chebyshev_segment(a, b, n, &mut g);
    let mut est = T::infinity();
    while n < CHEB_MAX {
        n *= 2;
        let cur = chebyshev_segment(a, b, n, &mut g);
        est = (cur - prev).abs();
        let denom = cur.abs().max(scale.abs());
        if est <= rel_tol * denom {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Numerical {
        what: format!("Gauss-Chebyshev did not converge by order {CHEB_MAX}"),
        estimate: to_f64(est),
    })
}

/// Lanczos approximation of Γ(x) for `x > 0`.
pub(crate) fn gamma<T: Scalar>(x: T) -> T {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let xf = to_f64(x);
    if xf < 0.5 {
        let pi = std::f64::consts::PI;
        let v = pi / ((pi * xf).sin() * to_f64(gamma(lit::<T>(1.0 - xf))));
        return lit(v);
    }
    let xm = xf - 1.0;
    let mut a = C[0];
    let t = xm + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (xm + i as f64);
    }
    lit((2.0 * std::f64::consts::PI).sqrt() * t.powf(xm + 0.5) * (-t).exp() * a)
}

/// Eigenvalues and first eigenvector components of a symmetric tridiagonal
/// matrix (implicit QL with Wilkinson shifts). `off[k]` couples rows `k-1`
/// and `k`; `off[0]` is ignored.
fn symmetric_tridiagonal_eigen<T: Scalar>(mut d: Vec<T>, off: Vec<T>) -> Result<(Vec<T>, Vec<T>)> {
    let n = d.len();
    let mut e = vec![T::zero(); n];
    e[..(n - 1)].copy_from_slice(&off[1..n]);
    let mut z = vec![T::zero(); n];
    z[0] = T::one();
    let two = lit::<T>(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Numerical {
                    what: "tridiagonal QL iteration".into(),
                    estimate: to_f64(e[l].abs()),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok((d, z))
}
