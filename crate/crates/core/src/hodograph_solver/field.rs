//! Field solve on an `(x, t)` grid by continuation.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Scalar};

use super::newton::{Hodograph, SolveOutcome};

/// Classification of a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    /// Genus-one hodograph solution.
    Solved,
    /// Inside the oscillation zone but Newton failed.
    Failed,
    /// Inside the fold of the dispersionless solution where no genus-one
    /// solution could be seeded.
    Unresolved,
    /// Outside the oscillation zone; `u¹ = u² = u³` solves `x = 3ut + f(u)`.
    Genus0,
    /// Outside the zone and outside the data range.
    OutOfRange,
}

impl PointStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointStatus::Solved => "solved",
            PointStatus::Failed => "failed",
            PointStatus::Unresolved => "unresolved",
            PointStatus::Genus0 => "genus0",
            PointStatus::OutOfRange => "out_of_range",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldPoint<T> {
    pub x: T,
    pub t: T,
    pub status: PointStatus,
    /// Invariants; `None` when nothing was found.
    pub u: Option<[T; 3]>,
    /// `max_i |C^i t + w^i − x|` for genus-one points.
    pub hodograph_residual: Option<T>,
    /// Scaled finite-difference residual of `∂_t u^i + C^i ∂_x u^i`, see
    /// [`pde_residual`].
    pub pde_residual: Option<T>,
    /// A second seed converged to a different root.
    pub multivalued: bool,
    /// Point inside the oscillation zone (solved or not).
    pub attempted: bool,
}

/// Summary over interior points (grid boundary excluded).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldStats {
    pub attempted: usize,
    pub solved: usize,
    /// Solved with hodograph residual and PDE residual within bounds.
    pub accepted: usize,
    pub max_hodograph_residual: f64,
    pub max_pde_residual: f64,
    pub hodograph_tolerance: f64,
    pub pde_tolerance: f64,
}

impl FieldStats {
    pub fn accepted_fraction(&self) -> f64 {
        if self.attempted == 0 {
            1.0
        } else {
            self.accepted as f64 / self.attempted as f64
        }
    }
}

/// Solution on a tensor grid, stored `t`-major: `points[it * xs.len() + ix]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulationSolution<T> {
    pub xs: Vec<T>,
    pub ts: Vec<T>,
    pub points: Vec<FieldPoint<T>>,
    /// Oscillation zone `[x⁻, x⁺]` per time slice, when one was found.
    pub zones: Vec<Option<(T, T)>>,
    pub stats: FieldStats,
}

impl<T: Scalar> ModulationSolution<T> {
    pub fn at(&self, ix: usize, it: usize) -> &FieldPoint<T> {
        &self.points[it * self.xs.len() + ix]
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Bound on [`pde_residual`] at interior solved points.
pub const PDE_TOLERANCE: f64 = 1e-3;

/// Relative gap `min(u²−u¹, u³−u²)/(u³−u¹)` under which a failed
/// continuation is read as arrival at a zone edge.
const EDGE_GAP: f64 = 0.05;

fn rel_gap<T: Scalar>(u: [T; 3]) -> T {
    (u[1] - u[0]).min(u[2] - u[1]) / (u[2] - u[0])
}

fn ordered<T: Scalar>(u: [T; 3]) -> bool {
    u[0] > T::zero() && u[0] < u[1] && u[1] < u[2]
}

/// Central-difference residual of `∂_t u^i + C^i ∂_x u^i = 0` at a solved
/// point, each component divided by `1 + |∂_t u^i| + |C^i ∂_x u^i|`.
/// Neighbouring values come from fresh hodograph solves at `x ± dx`,
/// `t ± dt`; one-sided second-order stencils are used at `t = dt`-close
/// times or next to an edge.
pub fn pde_residual<T: Scalar>(h: &Hodograph<T>, x: T, t: T, u: [T; 3], dx: T, dt: T) -> Result<T> {
    let (ux0, ut0) = h.tangent(u, t)?;
    let at = |xx: T, tt: T| -> Option<[T; 3]> {
        let seed = [0, 1, 2].map(|k| u[k] + ux0[k] * (xx - x) + ut0[k] * (tt - t));
        let seed = if ordered(seed) { seed } else { u };
        if tt < T::zero() {
            return None;
        }
        match h.solve(xx, tt, seed).ok()? {
            SolveOutcome::Solved(s) => Some(s.u),
            SolveOutcome::NoSolution { .. } => None,
        }
    };
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let four = lit::<T>(4.0);
    let deriv = |p1: Option<[T; 3]>, m1: Option<[T; 3]>, step: T, shift: &dyn Fn(T) -> Option<[T; 3]>| {
        match (p1, m1) {
            (Some(p), Some(m)) => Some([0, 1, 2].map(|k| (p[k] - m[k]) / (two * step))),
            (Some(p), None) => {
                let p2 = shift(two * step)?;
                Some([0, 1, 2].map(|k| (-three * u[k] + four * p[k] - p2[k]) / (two * step)))
            }
            (None, Some(m)) => {
                let m2 = shift(-two * step)?;
                Some([0, 1, 2].map(|k| (three * u[k] - four * m[k] + m2[k]) / (two * step)))
            }
            (None, None) => None,
        }
    };
    let ux = deriv(at(x + dx, t), at(x - dx, t), dx, &|s| at(x + s, t))
        .ok_or_else(|| Error::Singular("no neighbours in x for the PDE stencil".into()))?;
    let ut = deriv(at(x, t + dt), at(x, t - dt), dt, &|s| at(x, t + s))
        .ok_or_else(|| Error::Singular("no neighbours in t for the PDE stencil".into()))?;
    let (c, _) = h.speeds_and_flows(u)?;
    let mut worst = T::zero();
    for i in 0..3 {
        let a = ut[i];
        let b = c[i] * ux[i];
        worst = worst.max((a + b).abs() / (T::one() + a.abs() + b.abs()));
    }
    Ok(worst)
}

struct Slice<T> {
    points: Vec<FieldPoint<T>>,
    zone: Option<(Edge<T>, Edge<T>)>,
}

/// Zone boundary and the invariant that stays apart there.
#[derive(Debug, Clone, Copy)]
struct Edge<T> {
    x: T,
    outer: Option<T>,
}

/// At an edge two invariants merge; the third continues the outer
/// dispersionless branch.
fn unmerged<T: Scalar>(u: [T; 3]) -> T {
    if u[1] - u[0] < u[2] - u[1] {
        u[2]
    } else {
        u[0]
    }
}

/// Dispersionless values outside the zone. The branch of `x = 3ut + f(u)`
/// is followed by continuity from the edge; without a zone the root must
/// be unique, otherwise the point is a missed part of the zone.
fn fill_genus0<T: Scalar>(h: &Hodograph<T>, t: T, zone: Option<(Edge<T>, Edge<T>)>, pts: &mut [FieldPoint<T>]) {
    let set = |p: &mut FieldPoint<T>, r: T| {
        p.status = PointStatus::Genus0;
        p.u = Some([r; 3]);
    };
    let nearest = |roots: &[T], v: T| {
        roots
            .iter()
            .copied()
            .min_by(|a, b| (*a - v).abs().partial_cmp(&(*b - v).abs()).unwrap())
    };
    let Some((lo, hi)) = zone else {
        for p in pts.iter_mut() {
            let roots = h.data().genus0_roots(p.x, t);
            match roots.len() {
                0 => {}
                1 => set(p, roots[0]),
                _ => {
                    p.status = PointStatus::Unresolved;
                    p.attempted = true;
                }
            }
        }
        return;
    };
    let n = pts.len();
    let right: Vec<usize> = (0..n).filter(|&i| pts[i].x >= hi.x).collect();
    let left: Vec<usize> = (0..n).filter(|&i| pts[i].x <= lo.x).rev().collect();
    for (side, edge) in [(right, hi), (left, lo)] {
        let mut prev = edge.outer;
        for i in side {
            let p = &mut pts[i];
            if p.status != PointStatus::OutOfRange {
                continue;
            }
            let roots = h.data().genus0_roots(p.x, t);
            let pick = match (roots.len(), prev) {
                (0, _) => None,
                (1, _) => Some(roots[0]),
                (_, Some(v)) => nearest(&roots, v),
                (_, None) => None,
            };
            match pick {
                Some(r) => {
                    set(p, r);
                    prev = Some(r);
                }
                None => {
                    if !roots.is_empty() {
                        p.status = PointStatus::Unresolved;
                        p.attempted = true;
                    }
                }
            }
        }
    }
}

/// Solve on the tensor grid `xs × ts` (both strictly increasing, `t ≥ 0`).
///
/// Time slices are processed in order. Each slice is anchored either by
/// continuing a solved point of the previous slice in `t` or, failing that,
/// by multi-start seeds built from the fold of `x = 3ut + f(u)`; the zone is
/// then swept in `x` by predictor-corrector continuation until two
/// invariants merge. PDE residuals are evaluated in parallel per slice.
pub fn solve_field<T: Scalar>(h: &Hodograph<T>, xs: &[T], ts: &[T]) -> Result<ModulationSolution<T>> {
    if xs.windows(2).any(|w| !(w[1] > w[0])) || ts.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("grids must be strictly increasing"));
    }
    if ts.first().is_some_and(|t| *t < T::zero()) {
        return Err(Error::domain("times must be non-negative"));
    }
    let span = |g: &[T]| {
        let s = if g.len() > 1 { g[g.len() - 1] - g[0] } else { T::one() };
        s.max(T::epsilon().sqrt())
    };
    let (dx, dt) = (span(xs) * lit(1e-5), span(ts) * lit(1e-5));
    let mut points = Vec::with_capacity(xs.len() * ts.len());
    let mut zones = Vec::with_capacity(ts.len());
    let mut prev: Option<Slice<T>> = None;
    for &t in ts {
        let s = slice(h, xs, t, prev.as_ref(), dx, dt)?;
        points.extend(s.points.iter().copied());
        zones.push(s.zone.map(|(lo, hi)| (lo.x, hi.x)));
        prev = Some(s);
    }
    let stats = stats(xs.len(), ts.len(), &points, h.options().tolerance);
    Ok(ModulationSolution {
        xs: xs.to_vec(),
        ts: ts.to_vec(),
        points,
        zones,
        stats,
    })
}

fn stats<T: Scalar>(nx: usize, nt: usize, points: &[FieldPoint<T>], hod_tol: f64) -> FieldStats {
    let mut s = FieldStats {
        attempted: 0,
        solved: 0,
        accepted: 0,
        max_hodograph_residual: 0.0,
        max_pde_residual: 0.0,
        hodograph_tolerance: hod_tol,
        pde_tolerance: PDE_TOLERANCE,
    };
    for it in 1..nt.saturating_sub(1) {
        for ix in 1..nx.saturating_sub(1) {
            let p = &points[it * nx + ix];
            if !p.attempted {
                continue;
            }
            s.attempted += 1;
            if p.status != PointStatus::Solved {
                continue;
            }
            s.solved += 1;
            let hr = p.hodograph_residual.map(to_f64).unwrap_or(f64::INFINITY);
            let pr = p.pde_residual.map(to_f64).unwrap_or(f64::INFINITY);
            s.max_hodograph_residual = s.max_hodograph_residual.max(hr);
            s.max_pde_residual = s.max_pde_residual.max(pr);
            if hr < hod_tol && pr < PDE_TOLERANCE {
                s.accepted += 1;
            }
        }
    }
    s
}

fn blank<T: Scalar>(x: T, t: T) -> FieldPoint<T> {
    FieldPoint {
        x,
        t,
        status: PointStatus::OutOfRange,
        u: None,
        hodograph_residual: None,
        pde_residual: None,
        multivalued: false,
        attempted: false,
    }
}

fn try_solve<T: Scalar>(h: &Hodograph<T>, x: T, t: T, seed: [T; 3]) -> Option<([T; 3], T)> {
    if !ordered(seed) {
        return None;
    }
    match h.solve(x, t, seed).ok()? {
        SolveOutcome::Solved(s) => Some((s.u, s.residual)),
        SolveOutcome::NoSolution { .. } => None,
    }
}

/// Turning points of `u ↦ 3ut + f(u)` mapped to `x`, as an interval.
fn fold_interval<T: Scalar>(h: &Hodograph<T>, t: T) -> Option<(T, T)> {
    let (lo, hi) = h.data().domain();
    let n = 512;
    let g = |u: T| lit::<T>(3.0) * t + h.data().eval(u).map(|v| v[1]).unwrap_or(T::nan());
    let x_of = |u: T| lit::<T>(3.0) * u * t + h.data().eval(u).map(|v| v[0]).unwrap_or(T::nan());
    let mut xs = Vec::new();
    let mut a = lo;
    let mut ga = g(a);
    for k in 1..=n {
        let b = lo + (hi - lo) * T::from_usize(k).unwrap() / T::from_usize(n).unwrap();
        let gb = g(b);
        if ga * gb < T::zero() {
            let (mut l, mut r, mut gl) = (a, b, ga);
            for _ in 0..100 {
                let m = (l + r) * lit(0.5);
                let gm = g(m);
                if (gm < T::zero()) == (gl < T::zero()) {
                    l = m;
                    gl = gm;
                } else {
                    r = m;
                }
            }
            xs.push(x_of((l + r) * lit(0.5)));
        }
        a = b;
        ga = gb;
    }
    if xs.len() < 2 {
        return None;
    }
    let mn = xs.iter().copied().fold(T::infinity(), T::min);
    let mx = xs.iter().copied().fold(T::neg_infinity(), T::max);
    Some((mn, mx))
}

/// Multi-start seeds from the outer fold roots with the middle invariant
/// spread across the gap.
fn fold_seeds<T: Scalar>(h: &Hodograph<T>, x: T, t: T) -> Vec<[T; 3]> {
    let r = h.data().genus0_roots(x, t);
    if r.len() < 3 {
        return Vec::new();
    }
    let (a, b) = (r[0], r[r.len() - 1]);
    let mut seeds = vec![[a, r[1], b]];
    for k in 1..10 {
        let th = T::from_usize(k).unwrap() / lit(10.0);
        seeds.push([a, a + th * (b - a), b]);
    }
    seeds
}

fn find_anchor<T: Scalar>(
    h: &Hodograph<T>,
    xs: &[T],
    t: T,
    prev: Option<&Slice<T>>,
) -> Option<(T, [T; 3], T, bool)> {
    if let Some(p) = prev {
        let solved: Vec<&FieldPoint<T>> = p
            .points
            .iter()
            .filter(|q| q.status == PointStatus::Solved)
            .collect();
        // from the middle of the previous zone outwards
        let mid = solved.len() / 2;
        let mut order: Vec<usize> = (0..solved.len()).collect();
        order.sort_by_key(|&k| (k as isize - mid as isize).unsigned_abs());
        for k in order.into_iter().take(8) {
            let q = solved[k];
            if let Some((u, r)) = continue_in_t(h, q.x, q.t, q.u.unwrap(), t) {
                return Some((q.x, u, r, false));
            }
        }
    }
    let (a, b) = fold_interval(h, t)?;
    let mut cands: Vec<T> = xs.iter().copied().filter(|x| *x > a && *x < b).collect();
    for k in 1..32 {
        cands.push(a + (b - a) * T::from_usize(k).unwrap() / lit(32.0));
    }
    let c = (a + b) * lit(0.5);
    cands.sort_by(|p, q| (*p - c).abs().partial_cmp(&(*q - c).abs()).unwrap());
    for x in cands {
        let mut found: Vec<([T; 3], T)> = Vec::new();
        for seed in fold_seeds(h, x, t) {
            if let Some((u, r)) = try_solve(h, x, t, seed) {
                if !found.iter().any(|(v, _)| (0..3).all(|k| (v[k] - u[k]).abs() < lit(1e-6))) {
                    found.push((u, r));
                }
            }
        }
        if let Some(&(u, r)) = found.first() {
            return Some((x, u, r, found.len() > 1));
        }
    }
    None
}

/// Continue a solution at fixed `x` from `t0` to `t1` with halving substeps.
fn continue_in_t<T: Scalar>(h: &Hodograph<T>, x: T, t0: T, u0: [T; 3], t1: T) -> Option<([T; 3], T)> {
    let mut t = t0;
    let mut u = u0;
    let mut step = t1 - t0;
    let min_step = (t1 - t0) * lit(1.0 / 64.0);
    let mut res = T::zero();
    while t < t1 {
        let dt = step.min(t1 - t);
        let (_, ut) = h.tangent(u, t).ok()?;
        let seed = [0, 1, 2].map(|k| u[k] + ut[k] * dt);
        match try_solve(h, x, t + dt, seed).or_else(|| try_solve(h, x, t + dt, u)) {
            Some((v, r)) => {
                u = v;
                res = r;
                t = if dt == t1 - t { t1 } else { t + dt };
            }
            None => {
                step = step * lit(0.5);
                if step < min_step {
                    return None;
                }
            }
        }
    }
    Some((u, res))
}

enum MarchEnd<T> {
    /// Invariants merged at this `x`, last solution there.
    Edge(T, [T; 3]),
    /// Ran past the last grid point.
    GridEnd,
}

/// Sweep grid points on one side of the anchor.
fn march<T: Scalar>(
    h: &Hodograph<T>,
    xs: &[T],
    order: &[usize],
    t: T,
    start: (T, [T; 3]),
    out: &mut [FieldPoint<T>],
) -> MarchEnd<T> {
    let (mut xc, mut uc) = start;
    let mut k = 0;
    let mut misses = 0;
    while k < order.len() {
        let ix = order[k];
        let target = xs[ix];
        let full = target - xc;
        let min_step = full.abs().max(T::epsilon()) * lit(1e-4);
        let mut step = full;
        let mut reached = false;
        loop {
            let xn = if (step - full).abs() <= T::epsilon() * full.abs() { target } else { xc + step };
            let seed = h
                .tangent(uc, t)
                .ok()
                .map(|(ux, _)| [0, 1, 2].map(|m| uc[m] + ux[m] * (xn - xc)))
                .filter(|s| ordered(*s))
                .unwrap_or(uc);
            if let Some((u, r)) = try_solve(h, xn, t, seed) {
                xc = xn;
                uc = u;
                if xn == target {
                    let p = &mut out[ix];
                    p.status = PointStatus::Solved;
                    p.u = Some(u);
                    p.hodograph_residual = Some(r);
                    p.attempted = true;
                    reached = true;
                    break;
                }
                step = target - xc;
            } else {
                step = step * lit(0.5);
                if step.abs() < min_step {
                    break;
                }
            }
        }
        if reached {
            misses = 0;
            k += 1;
            continue;
        }
        if rel_gap(uc) < lit(EDGE_GAP) {
            return MarchEnd::Edge(xc, uc);
        }
        // a genuine miss inside the zone: record it and jump over
        let p = &mut out[ix];
        p.status = PointStatus::Failed;
        p.attempted = true;
        misses += 1;
        if misses >= 3 {
            return MarchEnd::Edge(xc, uc);
        }
        k += 1;
    }
    MarchEnd::GridEnd
}

fn slice<T: Scalar>(
    h: &Hodograph<T>,
    xs: &[T],
    t: T,
    prev: Option<&Slice<T>>,
    dx: T,
    dt: T,
) -> Result<Slice<T>> {
    let mut pts: Vec<FieldPoint<T>> = xs.iter().map(|&x| blank(x, t)).collect();
    let mut zone = None;
    if xs.is_empty() {
        return Ok(Slice { points: pts, zone });
    }
    if let Some((xa, ua, _, multi)) = find_anchor(h, xs, t, prev) {
        let edge = |e: MarchEnd<T>, grid_end: T| match e {
            MarchEnd::Edge(x, u) => Edge { x, outer: Some(unmerged(u)) },
            MarchEnd::GridEnd => Edge { x: grid_end, outer: None },
        };
        let right: Vec<usize> = (0..xs.len()).filter(|&i| xs[i] >= xa).collect();
        let left: Vec<usize> = (0..xs.len()).filter(|&i| xs[i] < xa).rev().collect();
        let hi = edge(march(h, xs, &right, t, (xa, ua), &mut pts), xs[xs.len() - 1]);
        let lo = edge(march(h, xs, &left, t, (xa, ua), &mut pts), xs[0]);
        zone = Some((lo, hi));
        if let Some(p) = pts.iter_mut().find(|p| p.x == xa) {
            p.multivalued = multi;
        }
    }
    fill_genus0(h, t, zone, &mut pts);
    let cmax = pts
        .iter()
        .filter_map(|p| (p.status == PointStatus::Solved).then_some(p.u).flatten())
        .filter_map(|u| h.speeds_and_flows(u).ok())
        .fold(T::one(), |m, (c, _)| m.max(c[0].abs()).max(c[1].abs()).max(c[2].abs()));
    let residuals: Vec<Option<T>> = pts
        .par_iter()
        .map(|p| match (p.status, p.u, zone) {
            (PointStatus::Solved, Some(u), Some((lo, hi))) => {
                // resolve the square-root profile near an edge
                let dist = (p.x - lo.x).min(hi.x - p.x).max(T::epsilon());
                let sx = dx.min(dist * lit(1e-2));
                let st = dt.min(dist * lit(1e-2) / cmax);
                pde_residual(h, p.x, t, u, sx, st).ok()
            }
            _ => None,
        })
        .collect();
    for (p, r) in pts.iter_mut().zip(residuals) {
        p.pde_residual = r;
    }
    Ok(Slice { points: pts, zone })
}
