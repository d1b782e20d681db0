//! Initial data `x = f(u)` for the hodograph method.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

type Closure<T> = Arc<dyn Fn(T) -> [T; 3] + Send + Sync>;

#[derive(Clone)]
enum Kind<T> {
    Polynomial(Vec<T>),
    Samples(Pchip<T>),
    Function(Closure<T>),
}

/// Direction of a monotone function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

/// Strictly monotone initial data `x = f(u)` on a closed interval of `u`,
/// with its first two derivatives.
#[derive(Clone)]
pub struct InitialData<T> {
    kind: Kind<T>,
    lo: T,
    hi: T,
    monotonicity: Monotonicity,
}

impl<T: Scalar> std::fmt::Debug for InitialData<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.kind {
            Kind::Polynomial(c) => format!("Polynomial({c:?})"),
            Kind::Samples(p) => format!("Samples({} points)", p.u.len()),
            Kind::Function(_) => "Function".to_string(),
        };
        f.debug_struct("InitialData")
            .field("kind", &kind)
            .field("domain", &(self.lo, self.hi))
            .field("monotonicity", &self.monotonicity)
            .finish()
    }
}

impl<T: Scalar> InitialData<T> {
    /// `f(u) = Σ c_k u^k` on `[lo, hi]`; monotonicity is checked on a grid.
    pub fn polynomial(coeffs: Vec<T>, lo: T, hi: T) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::domain("polynomial needs at least one coefficient"));
        }
        Self::build(Kind::Polynomial(coeffs), lo, hi, true)
    }

    /// A user function returning `[f, f′, f″]`.
    pub fn from_fn(lo: T, hi: T, f: impl Fn(T) -> [T; 3] + Send + Sync + 'static) -> Result<Self> {
        Self::build(Kind::Function(Arc::new(f)), lo, hi, true)
    }

    /// Constant data `f ≡ c`; useful only for kernel checks.
    pub fn constant(c: T, lo: T, hi: T) -> Result<Self> {
        Self::build(Kind::Polynomial(vec![c]), lo, hi, false)
    }

    /// Monotone piecewise-cubic interpolation of `(u, x)` samples with
    /// strictly increasing `u` and strictly monotone `x`.
    pub fn from_samples(pairs: &[(T, T)]) -> Result<Self> {
        let p = Pchip::new(pairs)?;
        let lo = p.u[0];
        let hi = *p.u.last().unwrap();
        Self::build(Kind::Samples(p), lo, hi, true)
    }

    fn build(kind: Kind<T>, lo: T, hi: T, check: bool) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::domain(format!("data domain [{lo}, {hi}] is empty or unbounded")));
        }
        let mut d = Self {
            kind,
            lo,
            hi,
            monotonicity: Monotonicity::Increasing,
        };
        if check {
            let n = 256;
            let mut signs = (false, false);
            for k in 0..=n {
                let u = lo + (hi - lo) * T::from_usize(k).unwrap() / T::from_usize(n).unwrap();
                let df = d.eval_unchecked(u)[1];
                if df > T::zero() {
                    signs.0 = true;
                } else if df < T::zero() {
                    signs.1 = true;
                }
            }
            d.monotonicity = match signs {
                (true, false) => Monotonicity::Increasing,
                (false, true) => Monotonicity::Decreasing,
                _ => return Err(Error::domain("initial data is not strictly monotone")),
            };
        }
        Ok(d)
    }

    pub fn domain(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    fn eval_unchecked(&self, u: T) -> [T; 3] {
        match &self.kind {
            Kind::Polynomial(c) => {
                let (mut f, mut d1, mut d2) = (T::zero(), T::zero(), T::zero());
                for &a in c.iter().rev() {
                    d2 = d2 * u + d1 + d1;
                    d1 = d1 * u + f;
                    f = f * u + a;
                }
                [f, d1, d2]
            }
            Kind::Samples(p) => p.eval(u),
            Kind::Function(g) => g(u),
        }
    }

    /// `[f(u), f′(u), f″(u)]`.
    pub fn eval(&self, u: T) -> Result<[T; 3]> {
        let slack = (self.hi - self.lo) * T::epsilon() * lit(16.0);
        if u < self.lo - slack || u > self.hi + slack {
            return Err(Error::domain(format!(
                "u = {u} outside the data domain [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(self.eval_unchecked(u))
    }

    /// All roots of `3ut + f(u) = x` in the domain, increasing.
    pub fn genus0_roots(&self, x: T, t: T) -> Vec<T> {
        let three = lit::<T>(3.0);
        let g = |u: T| three * u * t + self.eval_unchecked(u)[0] - x;
        let n = 512;
        let step = (self.hi - self.lo) / T::from_usize(n).unwrap();
        let mut roots = Vec::new();
        let mut a = self.lo;
        let mut ga = g(a);
        if ga == T::zero() {
            roots.push(a);
        }
        for k in 1..=n {
            let b = if k == n {
                self.hi
            } else {
                self.lo + step * T::from_usize(k).unwrap()
            };
            let gb = g(b);
            if gb == T::zero() {
                roots.push(b);
            } else if ga * gb < T::zero() {
                roots.push(bisect(&g, a, b, ga));
            }
            a = b;
            ga = gb;
        }
        roots
    }
}

fn bisect<T: Scalar>(g: &impl Fn(T) -> T, mut a: T, mut b: T, mut ga: T) -> T {
    let half = lit::<T>(0.5);
    for _ in 0..200 {
        let m = (a + b) * half;
        let gm = g(m);
        if gm == T::zero() || (b - a).abs() <= T::epsilon() * (T::one() + m.abs()) {
            return m;
        }
        if (gm < T::zero()) == (ga < T::zero()) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    (a + b) * half
}

/// Fritsch-Carlson monotone cubic Hermite interpolant.
#[derive(Debug, Clone)]
struct Pchip<T> {
    u: Vec<T>,
    x: Vec<T>,
    d: Vec<T>,
}

impl<T: Scalar> Pchip<T> {
    fn new(pairs: &[(T, T)]) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::domain("at least two samples are needed"));
        }
        let u: Vec<T> = pairs.iter().map(|p| p.0).collect();
        let x: Vec<T> = pairs.iter().map(|p| p.1).collect();
        if u.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("sample u values must be strictly increasing"));
        }
        let inc = x.windows(2).all(|w| w[1] > w[0]);
        let dec = x.windows(2).all(|w| w[1] < w[0]);
        if !(inc || dec) {
            return Err(Error::domain("sample x values must be strictly monotone"));
        }
        let n = u.len();
        let h: Vec<T> = (0..n - 1).map(|k| u[k + 1] - u[k]).collect();
        let s: Vec<T> = (0..n - 1).map(|k| (x[k + 1] - x[k]) / h[k]).collect();
        let mut d = vec![T::zero(); n];
        if n == 2 {
            d[0] = s[0];
            d[1] = s[0];
        } else {
            let three = lit::<T>(3.0);
            for k in 1..n - 1 {
                let w1 = lit::<T>(2.0) * h[k] + h[k - 1];
                let w2 = h[k] + lit::<T>(2.0) * h[k - 1];
                d[k] = (w1 + w2) / (w1 / s[k - 1] + w2 / s[k]);
            }
            let end = |h0: T, h1: T, s0: T, s1: T| {
                let v = ((lit::<T>(2.0) * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
                if v * s0 <= T::zero() {
                    T::zero()
                } else if s0 * s1 <= T::zero() && v.abs() > (three * s0).abs() {
                    three * s0
                } else {
                    v
                }
            };
            d[0] = end(h[0], h[1], s[0], s[1]);
            d[n - 1] = end(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
        }
        Ok(Self { u, x, d })
    }

    fn eval(&self, t: T) -> [T; 3] {
        let n = self.u.len();
        let k = match self.u.iter().position(|v| *v > t) {
            Some(0) => 0,
            Some(p) => p - 1,
            None => n - 2,
        }
        .min(n - 2);
        let h = self.u[k + 1] - self.u[k];
        let s = (t - self.u[k]) / h;
        let (y0, y1) = (self.x[k], self.x[k + 1]);
        let (m0, m1) = (self.d[k] * h, self.d[k + 1] * h);
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        let six = lit::<T>(6.0);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = -two * s3 + three * s2;
        let h11 = s3 - s2;
        let f = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
        let d1 = (six * s2 - six * s) * y0
            + (three * s2 - lit::<T>(4.0) * s + T::one()) * m0
            + (-six * s2 + six * s) * y1
            + (three * s2 - two * s) * m1;
        let d2 = (lit::<T>(12.0) * s - six) * y0
            + (six * s - lit::<T>(4.0)) * m0
            + (six - lit::<T>(12.0) * s) * y1
            + (six * s - two) * m1;
        [f, d1 / h, d2 / (h * h)]
    }
}
