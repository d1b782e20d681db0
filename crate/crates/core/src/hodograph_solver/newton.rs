//! Commuting flows and the pointwise hodograph root solve.

use serde::Serialize;

use crate::ch_modulation::speeds_elliptic;
use crate::curve::ChCurve;
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Scalar};

use super::data::InitialData;
use super::kernel::{EpdKernel, Jet, DEFAULT_NODES};

/// `w^i = q + (C^i − u¹ − u² − u³) ∂_i q` with `ν = 0`.
pub fn commuting_speeds<T: Scalar>(f: &InitialData<T>, u: [T; 3]) -> Result<[T; 3]> {
    let curve = ChCurve::new(T::zero(), u)?;
    let jet = EpdKernel::new(DEFAULT_NODES)?.jet(f, u)?;
    Ok(flows(&curve, &jet))
}

fn flows<T: Scalar>(curve: &ChCurve<T>, jet: &Jet<T>) -> [T; 3] {
    let c = speeds_elliptic(curve);
    let s = curve.sum_u();
    [0, 1, 2].map(|i| jet.q + (c[i] - s) * jet.grad[i])
}

/// Largest `|∂_j w^i (C^i − C^j) − ∂_j C^i (w^i − w^j)|`, normalized by the
/// size of the two terms, over `i ≠ j`; central differences.
pub fn commuting_residual<T: Scalar>(f: &InitialData<T>, u: [T; 3]) -> Result<T> {
    let curve = ChCurve::new(T::zero(), u)?;
    let h = curve.min_gap() * T::epsilon().cbrt();
    let two = lit::<T>(2.0);
    let w = commuting_speeds(f, u)?;
    let c = speeds_elliptic(&curve);
    let mut worst = T::zero();
    for j in 0..3 {
        let (p, m) = (curve.perturbed(j, h)?, curve.perturbed(j, -h)?);
        let (wp, wm) = (commuting_speeds(f, p.u())?, commuting_speeds(f, m.u())?);
        let (cp, cm) = (speeds_elliptic(&p), speeds_elliptic(&m));
        for i in 0..3 {
            if i == j {
                continue;
            }
            let dw = (wp[i] - wm[i]) / (two * h);
            let dc = (cp[i] - cm[i]) / (two * h);
            let a = dw * (c[i] - c[j]);
            let b = dc * (w[i] - w[j]);
            let r = (a - b).abs() / (T::one() + a.abs().max(b.abs()));
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

/// [`commuting_residual`] checked against `1e-3`.
pub fn commuting_check<T: Scalar>(f: &InitialData<T>, u: [T; 3]) -> Result<T> {
    let r = commuting_residual(f, u)?;
    crate::error::ensure("commuting flow relation", to_f64(r), 1e-3)?;
    Ok(r)
}

/// Newton controls for [`Hodograph::solve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveOptions {
    /// Bound on `max_i |C^i t + w^i − x|`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Minimal separation of the invariants; closer means coalescence.
    pub eps_c: f64,
    /// Nodes per direction of the EPD rule.
    pub nodes: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 60,
            eps_c: 1e-9,
            nodes: DEFAULT_NODES,
        }
    }
}

/// A converged hodograph point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointSolution<T> {
    pub u: [T; 3],
    pub residual: T,
    pub iterations: usize,
}

/// Why Newton gave up.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Failure {
    SingularJacobian,
    MaxIterations,
    /// Two invariants merged: the point lies on or past a zone edge.
    Coalescence { gap: f64 },
    /// The iterate left the data domain or the valid curve region.
    LeftDomain(String),
    /// No descent along the Newton direction.
    Stagnation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SolveOutcome<T> {
    Solved(PointSolution<T>),
    NoSolution {
        failure: Failure,
        last: [T; 3],
        residual: T,
    },
}

impl<T: Scalar> SolveOutcome<T> {
    pub fn solution(&self) -> Option<&PointSolution<T>> {
        match self {
            SolveOutcome::Solved(s) => Some(s),
            SolveOutcome::NoSolution { .. } => None,
        }
    }
}

/// Hodograph equations `x = C^i(u) t + w^i(u)`, `i = 1, 2, 3`, for fixed data.
#[derive(Clone)]
pub struct Hodograph<T> {
    data: InitialData<T>,
    kernel: EpdKernel<T>,
    options: SolveOptions,
}

impl<T: Scalar> std::fmt::Debug for Hodograph<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hodograph")
            .field("data", &self.data)
            .field("options", &self.options)
            .finish()
    }
}

/// Values of the hodograph map and its Jacobian in `u`.
struct Linearization<T> {
    speeds: [T; 3],
    flows: [T; 3],
    jac: [[T; 3]; 3],
}

impl<T: Scalar> Hodograph<T> {
    /// The method is set up for `ν = 0` only; any other `ν` is refused.
    pub fn new(nu: T, data: InitialData<T>, options: SolveOptions) -> Result<Self> {
        if nu != T::zero() {
            return Err(Error::domain(format!("hodograph solver requires nu = 0, got {nu}")));
        }
        let kernel = EpdKernel::new(options.nodes)?;
        Ok(Self {
            data,
            kernel,
            options,
        })
    }

    pub fn data(&self) -> &InitialData<T> {
        &self.data
    }

    pub fn options(&self) -> &SolveOptions {
        &self.options
    }

    fn curve(&self, u: [T; 3]) -> Result<ChCurve<T>> {
        ChCurve::with_tolerance(T::zero(), u, lit(self.options.eps_c))
    }

    /// `C^i t + w^i − x`.
    pub fn residual(&self, u: [T; 3], x: T, t: T) -> Result<[T; 3]> {
        let curve = self.curve(u)?;
        let jet = self.kernel.jet(&self.data, u)?;
        let c = speeds_elliptic(&curve);
        let w = flows(&curve, &jet);
        Ok([0, 1, 2].map(|i| c[i] * t + w[i] - x))
    }

    /// Speeds and commuting flows at `u`.
    pub fn speeds_and_flows(&self, u: [T; 3]) -> Result<([T; 3], [T; 3])> {
        let curve = self.curve(u)?;
        let jet = self.kernel.jet(&self.data, u)?;
        Ok((speeds_elliptic(&curve), flows(&curve, &jet)))
    }

    fn linearize(&self, u: [T; 3], t: T) -> Result<Linearization<T>> {
        let curve = self.curve(u)?;
        let jet = self.kernel.jet(&self.data, u)?;
        let c = speeds_elliptic(&curve);
        let w = flows(&curve, &jet);
        let s = curve.sum_u();
        // speed gradient by central differences, step well inside the gaps
        let h = curve.min_gap() * T::epsilon().cbrt() * lit(0.25);
        let two = lit::<T>(2.0);
        let mut dc = [[T::zero(); 3]; 3];
        for k in 0..3 {
            let cp = speeds_elliptic(&curve.perturbed(k, h)?);
            let cm = speeds_elliptic(&curve.perturbed(k, -h)?);
            for i in 0..3 {
                dc[i][k] = (cp[i] - cm[i]) / (two * h);
            }
        }
        let mut jac = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for k in 0..3 {
                let dw = jet.grad[k] + (dc[i][k] - T::one()) * jet.grad[i] + (c[i] - s) * jet.hess[i][k];
                jac[i][k] = t * dc[i][k] + dw;
            }
        }
        Ok(Linearization {
            speeds: c,
            flows: w,
            jac,
        })
    }

    /// Damped Newton from `seed`.
    pub fn solve(&self, x: T, t: T, seed: [T; 3]) -> Result<SolveOutcome<T>> {
        if t < T::zero() {
            return Err(Error::domain("hodograph solve needs t >= 0"));
        }
        if !(seed[0] < seed[1] && seed[1] < seed[2]) {
            return Err(Error::domain("seed must be strictly ordered"));
        }
        let tol = lit::<T>(self.options.tolerance);
        let eps_c = lit::<T>(self.options.eps_c);
        let fail = |failure, last, residual| Ok(SolveOutcome::NoSolution { failure, last, residual });
        let mut u = seed;
        let mut lin = match self.linearize(u, t) {
            Ok(l) => l,
            Err(e) => return fail(Failure::LeftDomain(e.to_string()), u, T::infinity()),
        };
        let mut r = residual_of(&lin, x, t);
        let mut norm = inf_norm(r);
        for it in 0..self.options.max_iterations {
            if norm < tol {
                return Ok(SolveOutcome::Solved(PointSolution {
                    u,
                    residual: norm,
                    iterations: it,
                }));
            }
            let Some(step) = solve3(lin.jac, r.map(|v| -v)) else {
                return fail(Failure::SingularJacobian, u, norm);
            };
            // keep the iterate ordered: never close a gap by more than 90%
            let mut alpha = T::one();
            let gaps = [u[0], u[1] - u[0], u[2] - u[1]];
            let dg = [step[0], step[1] - step[0], step[2] - step[1]];
            for k in 0..3 {
                if dg[k] < T::zero() {
                    alpha = alpha.min(lit::<T>(0.9) * gaps[k] / -dg[k]);
                }
            }
            let mut accepted = None;
            for _ in 0..40 {
                let trial = [0, 1, 2].map(|k| u[k] + alpha * step[k]);
                if let Ok(l) = self.linearize(trial, t) {
                    let rt = residual_of(&l, x, t);
                    let nt = inf_norm(rt);
                    if nt < norm * (T::one() - lit::<T>(1e-4) * alpha) || nt < tol {
                        accepted = Some((trial, l, rt, nt));
                        break;
                    }
                }
                alpha *= lit(0.5);
            }
            let Some((trial, l, rt, nt)) = accepted else {
                let gap = (u[1] - u[0]).min(u[2] - u[1]);
                let failure = if gap <= eps_c * lit(1e3) {
                    Failure::Coalescence { gap: to_f64(gap) }
                } else {
                    Failure::Stagnation
                };
                return fail(failure, u, norm);
            };
            u = trial;
            lin = l;
            r = rt;
            norm = nt;
            let gap = (u[1] - u[0]).min(u[2] - u[1]);
            if gap <= eps_c * lit(1e3) && norm > tol {
                return fail(Failure::Coalescence { gap: to_f64(gap) }, u, norm);
            }
        }
        if norm < tol {
            return Ok(SolveOutcome::Solved(PointSolution {
                u,
                residual: norm,
                iterations: self.options.max_iterations,
            }));
        }
        fail(Failure::MaxIterations, u, norm)
    }

    /// Partial derivatives `(∂_x u, ∂_t u)` at a solution from the implicit
    /// function theorem.
    pub fn tangent(&self, u: [T; 3], t: T) -> Result<([T; 3], [T; 3])> {
        let lin = self.linearize(u, t)?;
        let ux = solve3(lin.jac, [T::one(); 3]).ok_or_else(|| Error::Singular("hodograph Jacobian".into()))?;
        let ut = solve3(lin.jac, lin.speeds.map(|c| -c))
            .ok_or_else(|| Error::Singular("hodograph Jacobian".into()))?;
        Ok((ux, ut))
    }
}

fn residual_of<T: Scalar>(l: &Linearization<T>, x: T, t: T) -> [T; 3] {
    [0, 1, 2].map(|i| l.speeds[i] * t + l.flows[i] - x)
}

fn inf_norm<T: Scalar>(v: [T; 3]) -> T {
    v[0].abs().max(v[1].abs()).max(v[2].abs())
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub(crate) fn solve3<T: Scalar>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(T::zero(), |m, v| m.max(v.abs()));
    if !(scale > T::zero()) || !scale.is_finite() {
        return None;
    }
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap())?;
        if a[p][c].abs() <= scale * T::epsilon() * lit(16.0) {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..3 {
            let m = a[r][c] / a[c][c];
            for k in c..3 {
                let v = a[c][k];
                a[r][k] -= m * v;
            }
            let v = b[c];
            b[r] -= m * v;
        }
    }
    let mut x = [T::zero(); 3];
    for c in (0..3).rev() {
        let mut s = b[c];
        for k in c + 1..3 {
            s -= a[c][k] * x[k];
        }
        x[c] = s / a[c][c];
    }
    Some(x)
}
