//! Independent reference computations for the integration tests. Nothing
//! here calls into the library under test.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::{Rng as _, SeedableRng};

/// 7-point Gauss / 15-point Kronrod pair on `[a, b]`: `(kronrod, |kronrod − gauss|)`.
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    const XK: [f64; 8] = [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ];
    const WK: [f64; 8] = [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ];
    const WG: [f64; 4] = [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let (f1, f2) = (f(c - h * XK[j]), f(c + h * XK[j]));
        k += WK[j] * (f1 + f2);
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod integration to absolute tolerance `tol`, with the
/// tolerance shared by interval length and a roundoff floor.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, density: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= density * (b - a) || err <= 64.0 * f64::EPSILON * v.abs() || depth > 30 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, density, depth + 1) + rec(f, m, b, density, depth + 1)
    }
    rec(f, a, b, tol / (b - a).abs(), 0)
}

/// `∫_a^b g(λ) dλ / √((λ−a)(b−λ))` via `λ = a + (b−a) sin²θ`.
pub fn integrate_between_roots(g: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let h = |th: f64| {
        let s = th.sin();
        2.0 * g(a + (b - a) * s * s)
    };
    integrate(&h, 0.0, PI / 2.0, tol)
}

/// Legendre-form complete elliptic integrals by direct quadrature.
pub fn k_ref(m: f64) -> f64 {
    integrate(&|t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, PI / 2.0, 1e-15)
}

pub fn e_ref(m: f64) -> f64 {
    integrate(&|t: f64| (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, PI / 2.0, 1e-15)
}

/// `Π(n, m) = ∫ dθ / ((1 − n sin²θ) √(1 − m sin²θ))`.
pub fn pi_ref(n: f64, m: f64) -> f64 {
    integrate(
        &|t: f64| {
            let s2 = t.sin().powi(2);
            1.0 / ((1.0 - n * s2) * (1.0 - m * s2).sqrt())
        },
        0.0,
        PI / 2.0,
        1e-15,
    )
}

/// Gauss-Legendre nodes and weights by Newton iteration on `P_n`.
pub fn legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// EPD double integral with both endpoint singularities removed by
/// substitution (`μ = 1 − 2v²`, `η = cos θ`) and a plain Gauss-Legendre
/// tensor rule of `n × n` points.
pub fn q_ref(f: &dyn Fn(f64) -> f64, u: [f64; 3], n: usize) -> f64 {
    let (x, w) = legendre(n);
    let mut s = 0.0;
    for (xv, wv) in x.iter().zip(&w) {
        let v = 0.5 * (xv + 1.0);
        let mu = 1.0 - 2.0 * v * v;
        let wmu = 0.5 * wv * 2.0 * 2.0f64.sqrt();
        for (xt, wt) in x.iter().zip(&w) {
            let th = 0.5 * PI * (xt + 1.0);
            let eta = th.cos();
            let wth = 0.5 * PI * wt;
            let arg = (1.0 + mu) * (1.0 + eta) / 4.0 * u[0]
                + (1.0 + mu) * (1.0 - eta) / 4.0 * u[1]
                + (1.0 - mu) / 2.0 * u[2];
            s += wmu * wth * f(arg);
        }
    }
    s / (2.0 * 2.0f64.sqrt() * PI)
}

type Metric = dyn Fn([f64; 3]) -> [f64; 3];

fn christoffel(g: &Metric, u: [f64; 3], h: f64) -> [[[f64; 3]; 3]; 3] {
    // dg[k][i] = ∂_k g_ii, fourth-order central differences
    let mut dg = [[0.0; 3]; 3];
    for k in 0..3 {
        let at = |s: f64| {
            let mut v = u;
            v[k] += s;
            g(v)
        };
        let (p1, m1, p2, m2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
        for i in 0..3 {
            dg[k][i] = (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * h);
        }
    }
    let g0 = g(u);
    let mut gam = [[[0.0; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                // Γ^a_{bc} = ½ g^{aa} (∂_b g_{ac} + ∂_c g_{ab} − ∂_a g_{bc})
                let gac = if a == c { dg[b][a] } else { 0.0 };
                let gab = if a == b { dg[c][a] } else { 0.0 };
                let gbc = if b == c { dg[a][b] } else { 0.0 };
                gam[a][b][c] = 0.5 / g0[a] * (gac + gab - gbc);
            }
        }
    }
    gam
}

/// `R^{ij}{}_{ij} = g^{jj} R^i{}_{jij}` for `(i, j) ∈ {(0,1), (0,2), (1,2)}`
/// and the largest off-diagonal component `|R^i{}_{jkl}|` with `{k,l} ≠ {i,j}`,
/// from Christoffel symbols differentiated numerically twice.
pub fn christoffel_curvature(g: &Metric, u: [f64; 3], scale: f64) -> ([f64; 3], f64) {
    let h1 = 2e-4 * scale;
    let h2 = 2e-3 * scale;
    let gam = |v: [f64; 3]| christoffel(g, v, h1);
    let g0 = gam(u);
    // dgam[k] = ∂_k Γ
    let mut dgam = [[[[0.0; 3]; 3]; 3]; 3];
    for k in 0..3 {
        let at = |s: f64| {
            let mut v = u;
            v[k] += s;
            gam(v)
        };
        let (p1, m1, p2, m2) = (at(h2), at(-h2), at(2.0 * h2), at(-2.0 * h2));
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    dgam[k][a][b][c] =
                        (8.0 * (p1[a][b][c] - m1[a][b][c]) - (p2[a][b][c] - m2[a][b][c])) / (12.0 * h2);
                }
            }
        }
    }
    // R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{cm} Γ^m_{db} − Γ^a_{dm} Γ^m_{cb}
    let riem = |a: usize, b: usize, c: usize, d: usize| {
        let mut r = dgam[c][a][d][b] - dgam[d][a][c][b];
        for m in 0..3 {
            r += g0[a][c][m] * g0[m][d][b] - g0[a][d][m] * g0[m][c][b];
        }
        r
    };
    let gm = g(u);
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let mut sec = [0.0; 3];
    for (n, &(i, j)) in pairs.iter().enumerate() {
        sec[n] = riem(i, j, i, j) / gm[j];
    }
    let mut off: f64 = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    if a == b || c == d {
                        continue;
                    }
                    let same = (a == c && b == d) || (a == d && b == c);
                    if !same {
                        off = off.max((riem(a, b, c, d) / gm[b]).abs());
                    }
                }
            }
        }
    }
    (sec, off)
}

/// Seeded random curves.
pub struct Rng(StdRng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(StdRng::seed_from_u64(seed))
    }

    pub fn range(&mut self, a: f64, b: f64) -> f64 {
        self.0.gen_range(a..b)
    }

    /// A curve with `ν ∈ [0, 2]`, `−ν < u¹ < u² < u³ ≤ 5`, gaps ≥ `min_gap`.
    pub fn curve(&mut self, min_gap: f64) -> (f64, [f64; 3]) {
        loop {
            let nu = self.range(0.0, 2.0);
            let mut v = [self.range(-nu, 5.0), self.range(-nu, 5.0), self.range(-nu, 5.0)];
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if v[0] + nu > min_gap && v[1] - v[0] > min_gap && v[2] - v[1] > min_gap {
                return (nu, v);
            }
        }
    }
}

/// Period integrals over the cycle around `(b, a)`, with `a > b > c`.
pub struct KdvOracle {
    pub beta: [f64; 3],
    pub j0: f64,
    pub j1: f64,
    pub jm1: f64,
}

impl KdvOracle {
    pub fn new(beta: [f64; 3]) -> Self {
        let mut s = beta;
        s.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let [a, b, c] = s;
        let cyc = |h: &dyn Fn(f64) -> f64| {
            2.0 * integrate_between_roots(&|e: f64| h(e) / (e - c).sqrt(), b, a, 1e-15)
        };
        KdvOracle {
            beta,
            j0: cyc(&|_| 1.0),
            j1: cyc(&|e| e),
            jm1: cyc(&|e| 1.0 / e),
        }
    }

    pub fn alpha1(&self) -> f64 {
        -self.j1 / self.j0
    }

    pub fn alpha0(&self) -> f64 {
        -self.jm1 / self.j0
    }

    pub fn product(&self) -> f64 {
        self.beta.iter().product()
    }

    pub fn k(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.j0
    }

    pub fn omega(&self) -> f64 {
        4.0 * std::f64::consts::PI / (self.j0 * self.product().sqrt())
    }

    pub fn h0(&self) -> f64 {
        -self.product().sqrt() * self.alpha0()
    }

    pub fn prod_diff(&self, i: usize) -> f64 {
        (0..3).filter(|j| *j != i).map(|j| self.beta[i] - self.beta[j]).product()
    }
}

pub fn random_beta(rng: &mut Rng) -> [f64; 3] {
    random_beta_gap(rng, 0.1)
}

pub fn random_beta_gap(rng: &mut Rng, gap: f64) -> [f64; 3] {
    loop {
        let b = [rng.range(gap, 3.0), rng.range(gap, 3.0), rng.range(gap, 3.0)];
        let mut s = b;
        s.sort_by(|x, y| x.partial_cmp(y).unwrap());
        if s[1] - s[0] > gap && s[2] - s[1] > gap {
            return b;
        }
    }
}

/// Smallest root or root gap.
pub fn beta_scale(b: [f64; 3]) -> f64 {
    let mut s = b;
    s.sort_by(|x, y| x.partial_cmp(y).unwrap());
    s[0].min(s[1] - s[0]).min(s[2] - s[1])
}

/// `∂_i F / ∂_i G` by central differences of KdV oracle quantities.
pub fn kdv_ratio_fd(beta: [f64; 3], num: impl Fn(&KdvOracle) -> f64, den: impl Fn(&KdvOracle) -> f64) -> [f64; 3] {
    let h = 1e-4 * beta_scale(beta);
    [0, 1, 2].map(|i| {
        let at = |s: f64| {
            let mut b = beta;
            b[i] += s;
            KdvOracle::new(b)
        };
        let (p, m) = (at(h), at(-h));
        (num(&p) - num(&m)) / (den(&p) - den(&m))
    })
}
