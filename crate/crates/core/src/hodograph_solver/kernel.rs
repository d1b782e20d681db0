//! The Euler-Poisson-Darboux kernel `q(u¹,u²,u³)` as a double integral of
//! the initial data over the simplex spanned by the invariants.

use crate::error::{Error, Result};
use crate::quadrature::Rule;
use crate::scalar::{lit, Scalar};

use super::data::InitialData;

/// Default nodes per direction.
pub const DEFAULT_NODES: usize = 64;

/// `q` with its gradient and Hessian, all from the same quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<T> {
    pub q: T,
    pub grad: [T; 3],
    pub hess: [[T; 3]; 3],
}

/// Tensor rule in `(μ, η)`: Gauss-Jacobi with weight `(1 − μ)^{−1/2}` and
/// Gauss-Chebyshev in `η`, folded into barycentric weights of `u`.
#[derive(Debug, Clone)]
pub struct EpdKernel<T> {
    bary: Vec<[T; 3]>,
    weight: Vec<T>,
    n: usize,
}

impl<T: Scalar> EpdKernel<T> {
    pub fn new(n: usize) -> Result<Self> {
        let mu = Rule::<T>::gauss_jacobi(n, lit(-0.5), T::zero())?;
        let eta = Rule::<T>::gauss_chebyshev(n);
        let quarter = lit::<T>(0.25);
        let half = lit::<T>(0.5);
        let norm = T::one() / (lit::<T>(2.0) * T::SQRT_2() * T::PI());
        let mut bary = Vec::with_capacity(n * n);
        let mut weight = Vec::with_capacity(n * n);
        for (m, wm) in mu.nodes.iter().zip(&mu.weights) {
            for (e, we) in eta.nodes.iter().zip(&eta.weights) {
                let one = T::one();
                bary.push([
                    (one + *m) * (one + *e) * quarter,
                    (one + *m) * (one - *e) * quarter,
                    (one - *m) * half,
                ]);
                weight.push(norm * *wm * *we);
            }
        }
        Ok(Self { bary, weight, n })
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    fn check(&self, f: &InitialData<T>, u: [T; 3]) -> Result<()> {
        let (lo, hi) = f.domain();
        let (a, b) = (u[0].min(u[1]).min(u[2]), u[0].max(u[1]).max(u[2]));
        if a < lo || b > hi {
            return Err(Error::domain(format!(
                "invariants span [{a}, {b}], outside the data domain [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    fn arg(&self, k: usize, u: [T; 3]) -> T {
        let b = &self.bary[k];
        b[0] * u[0] + b[1] * u[1] + b[2] * u[2]
    }

    pub fn q(&self, f: &InitialData<T>, u: [T; 3]) -> Result<T> {
        self.check(f, u)?;
        let mut s = T::zero();
        for k in 0..self.weight.len() {
            s += self.weight[k] * f.eval(self.arg(k, u))?[0];
        }
        Ok(s)
    }

    pub fn jet(&self, f: &InitialData<T>, u: [T; 3]) -> Result<Jet<T>> {
        self.check(f, u)?;
        let mut q = T::zero();
        let mut grad = [T::zero(); 3];
        let mut hess = [[T::zero(); 3]; 3];
        for k in 0..self.weight.len() {
            let [f0, f1, f2] = f.eval(self.arg(k, u))?;
            let w = self.weight[k];
            let b = &self.bary[k];
            q += w * f0;
            for i in 0..3 {
                grad[i] += w * f1 * b[i];
                for j in i..3 {
                    hess[i][j] += w * f2 * b[i] * b[j];
                }
            }
        }
        for i in 0..3 {
            for j in 0..i {
                hess[i][j] = hess[j][i];
            }
        }
        Ok(Jet { q, grad, hess })
    }
}

/// `q(u)` at the default resolution, doubled until two successive values
/// agree to `1e-12` relative (at most 512 nodes per direction).
pub fn epd_q<T: Scalar>(f: &InitialData<T>, u: [T; 3]) -> Result<T> {
    let mut n = DEFAULT_NODES;
    let mut prev = EpdKernel::new(n)?.q(f, u)?;
    loop {
        let next = EpdKernel::new(2 * n)?.q(f, u)?;
        let scale = T::one().max(next.abs());
        if (next - prev).abs() <= lit::<T>(1e-12).max(T::epsilon() * lit(64.0)) * scale {
            return Ok(next);
        }
        n *= 2;
        if n >= 512 {
            return Err(Error::Numerical {
                what: "EPD quadrature did not converge".into(),
                estimate: crate::scalar::to_f64((next - prev).abs()),
            });
        }
        prev = next;
    }
}

/// Result of [`epd_residual`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EpdResidual {
    /// `max_{i≠j} |∂_i q − ∂_j q − 2(u^i − u^j) ∂_i∂_j q|` by finite differences.
    pub euler: f64,
    /// `|q(u,u,u) − f(u)|` maximised over 20 diagonal points in the data domain.
    pub diagonal: f64,
}

/// Finite-difference residual of the EPD system at `u` and the diagonal
/// boundary condition.
pub fn epd_residual<T: Scalar>(f: &InitialData<T>, u: [T; 3]) -> Result<EpdResidual> {
    let kernel = EpdKernel::new(DEFAULT_NODES)?;
    let q = |v: [T; 3]| kernel.q(f, v);
    let spread = (u[2] - u[0]).abs().max(lit(1e-3));
    let h = spread * T::epsilon().powf(lit(0.25)) * lit(0.5);
    let two = lit::<T>(2.0);
    let mut euler = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            let sh = |di: T, dj: T| {
                let mut v = u;
                v[i] += di;
                v[j] += dj;
                v
            };
            let qi = (q(sh(h, T::zero()))? - q(sh(-h, T::zero()))?) / (two * h);
            let qj = (q(sh(T::zero(), h))? - q(sh(T::zero(), -h))?) / (two * h);
            let qij = (q(sh(h, h))? - q(sh(h, -h))? - q(sh(-h, h))? + q(sh(-h, -h))?)
                / (lit::<T>(4.0) * h * h);
            let r = (qi - qj - two * (u[i] - u[j]) * qij).abs();
            euler = euler.max(r);
        }
    }
    let (lo, hi) = f.domain();
    let mut diagonal = T::zero();
    for k in 0..20 {
        let v = lo + (hi - lo) * T::from_usize(k).unwrap() / lit(19.0);
        let r = (kernel.q(f, [v; 3])? - f.eval(v)?[0]).abs();
        diagonal = diagonal.max(r);
    }
    Ok(EpdResidual {
        euler: crate::scalar::to_f64(euler),
        diagonal: crate::scalar::to_f64(diagonal),
    })
}
