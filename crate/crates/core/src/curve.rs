//! The Camassa-Holm spectral curve `R(λ) = (λ+ν)(λ−u¹)(λ−u²)(λ−u³)`.
//!
//! `√R` is taken positive wherever `R > 0`, that is on `(−∞,−ν)`,
//! `(u¹,u²)` and `(u³,∞)`. The a-cycle integral of a density `h/√R` is
//! `2∫_{u¹}^{u²} h/√R dλ`, oriented so that `I₀ > 0`.
//!
//! Values of differentials at branch points are taken in the local
//! parameter `t² = λ − e`, so the density `h/√R` becomes
//! `2h(e)/√R′(e)`. Where `R′(e) < 0` (at `u²` and at `−ν`) that number is
//! imaginary; the "reduced" values returned here use `√|R′(e)|` instead and
//! the sign `ε = sign R′(e)` is available from [`ChCurve::branch_sign`].

use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::quadrature::chebyshev_adaptive;
use crate::scalar::{lit, to_f64, tol, Scalar};
use crate::special_functions::{elliptic_e, elliptic_k, elliptic_pi_complete, EllipticModulus};

/// Default minimal separation of the branch points.
pub const DEFAULT_COALESCENCE_TOL: f64 = 1e-9;

/// A branch point of the curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `λ = −ν`.
    MinusNu,
    /// `λ = u^i`, zero-based.
    U(usize),
}

/// Normalized Abelian differentials on the curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DifferentialKind {
    /// Third kind, poles at the two points over `λ = −ν`, density `P₁/√R`.
    Sigma1,
    /// Second kind, pole at infinity, density `P₂/√R`.
    Sigma2,
    /// Second kind, double pole at `λ = −ν`, density `P_ν/(√R √|Π|)`.
    OmegaNu,
    /// Holomorphic, `∮_a φ = 1`, density `1/(I₀√R)`.
    Phi,
}

/// Cycle moments and normalization constants of the differentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveConstants<T> {
    pub i0: T,
    pub i1: T,
    pub i2: T,
    pub gamma1: T,
    pub gamma2: T,
    /// Residue at `λ = −ν` of `σ₁²/dλ`, sign fixed positive.
    pub residue_sigma1_sq: T,
}

/// The elliptic spectral curve of a one-phase Camassa-Holm wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChCurve<T> {
    nu: T,
    u: [T; 3],
    modulus: EllipticModulus<T>,
    k: T,
    e: T,
    pi: T,
    i0: T,
    gamma1: T,
    gamma2: T,
}

impl<T: Scalar> ChCurve<T> {
    /// Builds the curve with the default coalescence tolerance.
    pub fn new(nu: T, u: [T; 3]) -> Result<Self> {
        Self::with_tolerance(nu, u, lit(DEFAULT_COALESCENCE_TOL))
    }

    /// Builds the curve, rejecting gaps between branch points not exceeding
    /// `eps_c`.
    pub fn with_tolerance(nu: T, u: [T; 3], eps_c: T) -> Result<Self> {
        if !nu.is_finite() || u.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCurve("non-finite parameter".into()));
        }
        let pts = [-nu, u[0], u[1], u[2]];
        let names = ["-nu", "u1", "u2", "u3"];
        for w in 0..3 {
            if !(pts[w + 1] - pts[w] > eps_c) {
                return Err(Error::InvalidCurve(format!(
                    "ordering -nu < u1 < u2 < u3 violated: {} = {} is not above {} = {} by more than {}",
                    names[w + 1],
                    pts[w + 1],
                    names[w],
                    pts[w],
                    eps_c
                )));
            }
        }
        let [u1, u2, u3] = u;
        let s2 = (u2 - u1) * (u3 + nu) / ((u3 - u1) * (u2 + nu));
        let rho2 = (u2 - u1) / (u2 + nu);
        let modulus = EllipticModulus::new(s2, rho2)
            .map_err(|e| Error::InvalidCurve(format!("modulus out of range: {e}")))?;
        let k = elliptic_k(s2)?;
        let e = elliptic_e(s2)?;
        let pi = elliptic_pi_complete(rho2, s2)?;
        let i0 = lit::<T>(4.0) * k / ((u3 - u1) * (u2 + nu)).sqrt();
        let gamma1 = nu - (u1 + nu) * pi / k;
        let gamma2 = lit::<T>(0.5) * (u1 * u2 - nu * u3 + (u3 - u1) * (u2 + nu) * e / k);
        Ok(Self {
            nu,
            u,
            modulus,
            k,
            e,
            pi,
            i0,
            gamma1,
            gamma2,
        })
    }

    pub fn nu(&self) -> T {
        self.nu
    }

    pub fn u(&self) -> [T; 3] {
        self.u
    }

    /// `u¹ + u² + u³`.
    pub fn sum_u(&self) -> T {
        self.u[0] + self.u[1] + self.u[2]
    }

    /// Branch points `[−ν, u¹, u², u³]`.
    pub fn roots(&self) -> [T; 4] {
        [-self.nu, self.u[0], self.u[1], self.u[2]]
    }

    pub fn modulus(&self) -> EllipticModulus<T> {
        self.modulus
    }

    /// `(K(s), E(s), Λ)`; `Λ` is the complete third-kind integral with
    /// characteristic `ρ²`.
    pub fn elliptic(&self) -> (T, T, T) {
        (self.k, self.e, self.pi)
    }

    /// Smallest of `u^i + ν` and `u^j − u^i`; sets finite-difference steps.
    pub fn min_gap(&self) -> T {
        let [u1, u2, u3] = self.u;
        (u1 + self.nu).min(u2 - u1).min(u3 - u2)
    }

    /// `Π = (u¹+ν)(u²+ν)(u³+ν)`.
    pub fn pi_product(&self) -> T {
        (self.u[0] + self.nu) * (self.u[1] + self.nu) * (self.u[2] + self.nu)
    }

    pub fn r(&self, lambda: T) -> T {
        self.roots().iter().fold(T::one(), |acc, r| acc * (lambda - *r))
    }

    fn branch_value(&self, b: Branch) -> T {
        match b {
            Branch::MinusNu => -self.nu,
            Branch::U(i) => self.u[i],
        }
    }

    /// `R′(e)` at a branch point.
    pub fn r_prime(&self, b: Branch) -> T {
        let e = self.branch_value(b);
        let skip = match b {
            Branch::MinusNu => 0,
            Branch::U(i) => i + 1,
        };
        self.roots()
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != skip)
            .fold(T::one(), |acc, (_, r)| acc * (e - *r))
    }

    /// `ε = sign R′(e)`: `+1` at `u¹, u³`, `−1` at `u², −ν`.
    pub fn branch_sign(&self, b: Branch) -> T {
        if self.r_prime(b) < T::zero() {
            -T::one()
        } else {
            T::one()
        }
    }

    /// Closed-form `I₀ = 4K(s)/√((u³−u¹)(u²+ν))`.
    pub fn i0(&self) -> T {
        self.i0
    }

    pub fn gamma1(&self) -> T {
        self.gamma1
    }

    pub fn gamma2(&self) -> T {
        self.gamma2
    }

    /// `P₁(λ) = λ + γ₁`.
    pub fn p1(&self, lambda: T) -> T {
        lambda + self.gamma1
    }

    /// `P₂(λ) = λ² − ½(u¹+u²+u³−ν)λ + γ₂`.
    pub fn p2(&self, lambda: T) -> T {
        lambda * lambda - lit::<T>(0.5) * (self.sum_u() - self.nu) * lambda + self.gamma2
    }

    /// `P_ν(λ) = −Π/(2(λ+ν)) + P₂(−ν)`.
    pub fn p_nu(&self, lambda: T) -> T {
        -self.pi_product() / (lit::<T>(2.0) * (lambda + self.nu)) + self.p2(-self.nu)
    }

    /// Numerator of the normalized second-kind differential with double pole
    /// at the branch point `e`: `R′(e)/(2(λ−e)) + P₂(e)`. For `e = −ν` this
    /// is `P_ν`.
    pub fn p_branch(&self, e: Branch, lambda: T) -> T {
        let ev = self.branch_value(e);
        self.r_prime(e) / (lit::<T>(2.0) * (lambda - ev)) + self.p2(ev)
    }

    /// Residue at `λ = −ν` of `σ₁²/dλ`, taken positive: `P₁(−ν)²/Π`.
    pub fn residue_sigma1_sq(&self) -> T {
        let p = self.p1(-self.nu);
        p * p / self.pi_product()
    }

    fn numerator(&self, kind: DifferentialKind, lambda: T) -> T {
        match kind {
            DifferentialKind::Sigma1 => self.p1(lambda),
            DifferentialKind::Sigma2 => self.p2(lambda),
            DifferentialKind::OmegaNu => self.p_nu(lambda) / self.pi_product().sqrt(),
            DifferentialKind::Phi => T::one() / self.i0,
        }
    }

    /// Density of a differential at a regular real point where `R(λ) > 0`.
    pub fn eval_differential(&self, kind: DifferentialKind, lambda: T) -> Result<T> {
        let r = self.r(lambda);
        let scale = self.min_gap();
        let near = self
            .roots()
            .iter()
            .any(|e| (lambda - *e).abs() <= T::epsilon() * lit(64.0) * (scale + lambda.abs()));
        if near {
            return Err(Error::Singular(format!("lambda = {lambda} is a branch point")));
        }
        if r < T::zero() {
            return Err(Error::domain(format!(
                "R({lambda}) < 0: the differential is imaginary on this segment"
            )));
        }
        Ok(self.numerator(kind, lambda) / r.sqrt())
    }

    /// Reduced value of a differential at a branch point, `2h(e)/√|R′(e)|`.
    pub fn eval_at_branch(&self, kind: DifferentialKind, b: Branch) -> Result<T> {
        if kind == DifferentialKind::OmegaNu && b == Branch::MinusNu {
            return Err(Error::Singular("Omega_nu has its pole at -nu".into()));
        }
        let e = self.branch_value(b);
        Ok(lit::<T>(2.0) * self.numerator(kind, e) / self.r_prime(b).abs().sqrt())
    }

    /// Reduced value at `u^j` of the second-kind differential with pole at
    /// `u^i`, normalized by `√|R′(u^i)|`.
    pub fn omega_branch_at(&self, i: usize, j: usize) -> Result<T> {
        if i == j {
            return Err(Error::Singular("Omega_{u^i} has its pole at u^i".into()));
        }
        let num = self.p_branch(Branch::U(i), self.u[j]);
        let ri = self.r_prime(Branch::U(i)).abs().sqrt();
        let rj = self.r_prime(Branch::U(j)).abs().sqrt();
        Ok(lit::<T>(2.0) * num / (ri * rj))
    }

    /// `∮_a h(λ)dλ/√R(λ)`.
    pub fn cycle_integral(&self, h: impl Fn(T) -> T) -> Result<T> {
        let [u1, u2, u3] = self.u;
        let nu = self.nu;
        let g = |l: T| h(l) / ((l + nu) * (u3 - l)).sqrt();
        let scale = chebyshev_adaptive(u1, u2, T::one(), T::zero(), |l| g(l).abs())
            .unwrap_or(T::one());
        let v = chebyshev_adaptive(u1, u2, tol(1e-12), scale, g)?;
        Ok(lit::<T>(2.0) * v)
    }

    /// `∮_a (density of kind)` by quadrature.
    pub fn cycle_of(&self, kind: DifferentialKind) -> Result<T> {
        self.cycle_integral(|l| self.numerator(kind, l))
    }

    /// `I_k = ∮_a λ^k dλ/√R`, `k ≤ 4`.
    pub fn moment(&self, k: u32) -> Result<T> {
        if k > 4 {
            return Err(Error::domain("moments are provided for k <= 4"));
        }
        self.cycle_integral(|l| l.powi(k as i32))
    }

    /// Moments and constants, with the closed forms checked against the
    /// moment definitions.
    pub fn constants(&self) -> Result<CurveConstants<T>> {
        let i0 = self.moment(0)?;
        let i1 = self.moment(1)?;
        let i2 = self.moment(2)?;
        let g1 = -i1 / i0;
        let g2 = -i2 / i0 + lit::<T>(0.5) * (self.sum_u() - self.nu) * i1 / i0;
        let scale = T::one() + self.u[2].abs() + self.nu.abs();
        let tolerance = tol::<T>(1e-6);
        ensure(
            "I0 closed form vs quadrature",
            to_f64((i0 - self.i0).abs() / self.i0),
            to_f64(tolerance),
        )?;
        ensure(
            "gamma1 closed form vs moments",
            to_f64((g1 - self.gamma1).abs() / scale),
            to_f64(tolerance),
        )?;
        ensure(
            "gamma2 closed form vs moments",
            to_f64((g2 - self.gamma2).abs() / (scale * scale)),
            to_f64(tolerance),
        )?;
        Ok(CurveConstants {
            i0: self.i0,
            i1,
            i2,
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            residue_sigma1_sq: self.residue_sigma1_sq(),
        })
    }

    /// The curve with `u^i` shifted by `h`.
    pub fn perturbed(&self, i: usize, h: T) -> Result<Self> {
        let mut u = self.u;
        u[i] += h;
        Self::with_tolerance(self.nu, u, T::zero())
    }
}
