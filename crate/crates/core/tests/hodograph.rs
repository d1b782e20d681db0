mod common;

use common::q_ref;
use whitham_ch::ch_modulation::speeds_elliptic;
use whitham_ch::curve::ChCurve;
use whitham_ch::hodograph_solver::*;

/// `f(u) = x₀ − a(u−1) − b(u−1)³` with `a = 0.45`, `b = 8`, `x₀ = −1.5`.
fn decreasing() -> InitialData<f64> {
    InitialData::polynomial(vec![6.95, -24.45, 24.0, -8.0], 0.05, 2.0).unwrap()
}

fn solver(data: InitialData<f64>) -> Hodograph<f64> {
    Hodograph::new(0.0, data, SolveOptions::default()).unwrap()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

#[test]
fn kernel_normalization_and_linear_data() {
    let one = InitialData::constant(1.0f64, 0.0, 5.0).unwrap();
    let lin = InitialData::polynomial(vec![0.0f64, 1.0], 0.0, 5.0).unwrap();
    for u in [[0.5, 1.0, 2.0], [0.1, 0.2, 4.9], [1.0, 2.0, 3.0]] {
        assert!((epd_q(&one, u).unwrap() - 1.0).abs() < 1e-10);
        let s = (u[0] + u[1] + u[2]) / 3.0;
        assert!((epd_q(&lin, u).unwrap() - s).abs() < 1e-8);
    }
}

#[test]
fn kernel_matches_tensor_oracle() {
    let sq = InitialData::polynomial(vec![0.0, 0.0, 1.0], 0.0, 5.0).unwrap();
    let ex = InitialData::from_fn(0.0, 5.0, |u: f64| [u.exp(), u.exp(), u.exp()]).unwrap();
    let u = [1.0, 2.0, 3.0];
    let r = q_ref(&|v| v * v, u, 1000);
    assert!((epd_q(&sq, u).unwrap() - r).abs() < 1e-6 * r, "{r}");
    let u = [0.3, 0.9, 2.2];
    let r = q_ref(&f64::exp, u, 400);
    assert!((epd_q(&ex, u).unwrap() - r).abs() < 1e-8 * r);
}

#[test]
fn jet_matches_differences() {
    let d = decreasing();
    let k = EpdKernel::new(DEFAULT_NODES).unwrap();
    let u = [0.4, 0.9, 1.6];
    let j = k.jet(&d, u).unwrap();
    assert!((j.q - k.q(&d, u).unwrap()).abs() < 1e-14);
    let h = 1e-4;
    for i in 0..3 {
        let at = |s: f64| {
            let mut v = u;
            v[i] += s;
            k.jet(&d, v).unwrap()
        };
        let (p, m) = (at(h), at(-h));
        let g = (p.q - m.q) / (2.0 * h);
        assert!((g - j.grad[i]).abs() < 1e-6 * (1.0 + g.abs()));
        for l in 0..3 {
            let hh = (p.grad[l] - m.grad[l]) / (2.0 * h);
            assert!((hh - j.hess[i][l]).abs() < 1e-5 * (1.0 + hh.abs()), "{i}{l}: {hh} {}", j.hess[i][l]);
        }
    }
}

#[test]
fn kernel_solves_the_epd_system() {
    let cube = InitialData::polynomial(vec![0.0, 0.0, 0.0, 1.0], 0.0, 5.0).unwrap();
    let r = epd_residual(&cube, [0.5, 1.0, 2.0]).unwrap();
    assert!(r.euler < 1e-4, "{r:?}");
    assert!(r.diagonal < 1e-4, "{r:?}");
    let r = epd_residual(&decreasing(), [0.3, 0.8, 1.7]).unwrap();
    assert!(r.euler < 1e-4, "{r:?}");
}

#[test]
fn commuting_flows() {
    let lin = InitialData::polynomial(vec![0.0f64, 1.0], 0.0, 5.0).unwrap();
    let u = [0.5f64, 1.5, 2.5];
    let w = commuting_speeds(&lin, u).unwrap();
    let c = speeds_elliptic(&ChCurve::new(0.0, u).unwrap());
    for i in 0..3 {
        assert!((w[i] - c[i] / 3.0).abs() < 1e-8);
    }
    let sq = InitialData::polynomial(vec![0.0, 0.0, 1.0], 0.0, 5.0).unwrap();
    assert!(commuting_check(&sq, [1.0, 2.0, 3.0]).unwrap() < 1e-3);
    assert!(commuting_residual(&decreasing(), [0.3, 0.8, 1.7]).unwrap() < 1e-3);
    let one = InitialData::constant(2.5f64, 0.0, 5.0).unwrap();
    for v in commuting_speeds(&one, u).unwrap() {
        assert!((v - 2.5).abs() < 1e-10);
    }
}

#[test]
fn refuses_nonzero_nu() {
    assert!(Hodograph::new(0.5, decreasing(), SolveOptions::default()).is_err());
}

#[test]
fn data_validation() {
    assert!(InitialData::polynomial(vec![0.0, 0.0, 1.0], -1.0, 1.0).is_err());
    assert!(InitialData::polynomial(vec![1.0], 0.0, 1.0).is_err());
    assert!(InitialData::polynomial(vec![0.0, 1.0], 1.0, 1.0).is_err());
    assert!(InitialData::<f64>::polynomial(vec![], 0.0, 1.0).is_err());
    let d = decreasing();
    assert_eq!(d.monotonicity(), Monotonicity::Decreasing);
    assert!(d.eval(2.5).is_err());
    let [f, f1, f2] = d.eval(1.0).unwrap();
    assert!((f + 1.5).abs() < 1e-12 && (f1 + 0.45).abs() < 1e-12 && f2.abs() < 1e-12);
    assert!(InitialData::from_samples(&[(0.0, 0.0), (1.0, 1.0), (0.5, 2.0)]).is_err());
    assert!(InitialData::from_samples(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.5)]).is_err());
}

#[test]
fn sampled_data_interpolates() {
    let d = decreasing();
    let pts: Vec<(f64, f64)> = linspace(0.05, 2.0, 200).into_iter().map(|u| (u, d.eval(u).unwrap()[0])).collect();
    let s = InitialData::from_samples(&pts).unwrap();
    assert_eq!(s.monotonicity(), Monotonicity::Decreasing);
    assert_eq!(s.domain(), (0.05, 2.0));
    for (u, x) in &pts {
        assert!((s.eval(*u).unwrap()[0] - x).abs() < 1e-12);
    }
    for u in linspace(0.06, 1.99, 37) {
        assert!((s.eval(u).unwrap()[0] - d.eval(u).unwrap()[0]).abs() < 1e-3);
    }
}

#[test]
fn genus_zero_roots() {
    let d = decreasing();
    // 3ut + f(u) = x at t = 0 has the single root f⁻¹(x)
    let r = d.genus0_roots(-1.5, 0.0);
    assert_eq!(r.len(), 1);
    assert!((r[0] - 1.0).abs() < 1e-10);
    // inside the fold at t = 1 there are three
    let r = d.genus0_roots(1.5, 1.0);
    assert_eq!(r.len(), 3);
    for u in r {
        assert!((3.0 * u + d.eval(u).unwrap()[0] - 1.5).abs() < 1e-9);
    }
}

#[test]
fn no_modulated_solution_for_trivial_cases() {
    // at t = 0 the data has not broken yet
    let h = solver(decreasing());
    match h.solve(-1.5, 0.0, [0.8, 1.0, 1.2]).unwrap() {
        SolveOutcome::NoSolution { .. } => {}
        SolveOutcome::Solved(s) => panic!("unexpected solution {s:?}"),
    }
    // linear data: w^i = C^i/3 forces C¹ = C² = C³
    let lin = InitialData::polynomial(vec![0.0, -1.0], 0.05, 3.0).unwrap();
    let h = solver(lin);
    assert!(h.solve(-1.0, 1.0, [0.5, 1.0, 1.5]).unwrap().solution().is_none());
}

#[test]
fn field_solution_on_a_small_grid() {
    let h = solver(decreasing());
    let xs = linspace(-2.0, 2.0, 41);
    let ts = linspace(0.0, 1.0, 6);
    let sol = solve_field(&h, &xs, &ts).unwrap();
    assert_eq!(sol.points.len(), xs.len() * ts.len());
    assert!(sol.zones[0].is_none());
    assert!(sol.zones[5].is_some());
    let st = &sol.stats;
    assert!(st.attempted > 10, "{st:?}");
    assert!(st.accepted_fraction() >= 0.95, "{st:?}");
    assert!(st.max_hodograph_residual < 1e-9);
    let mut checked = 0;
    for it in 0..ts.len() {
        for ix in 0..xs.len() {
            let p = sol.at(ix, it);
            assert_eq!((p.x, p.t), (xs[ix], ts[it]));
            if p.status != PointStatus::Solved {
                continue;
            }
            let u = p.u.unwrap();
            assert!(u[0] < u[1] && u[1] < u[2]);
            let r = h.residual(u, p.x, p.t).unwrap();
            assert!(r.iter().all(|v| v.abs() < 1e-9));
            // implicit-function tangent solves the modulation system exactly
            let (ux, ut) = h.tangent(u, p.t).unwrap();
            let c = speeds_elliptic(&ChCurve::new(0.0, u).unwrap());
            for i in 0..3 {
                let s = 1.0 + ut[i].abs() + (c[i] * ux[i]).abs();
                assert!((ut[i] + c[i] * ux[i]).abs() < 1e-6 * s);
            }
            checked += 1;
        }
    }
    assert!(checked > 10);
}

#[test]
fn tangent_matches_neighbouring_solves() {
    let h = solver(decreasing());
    let xs = linspace(-2.0, 2.0, 41);
    let sol = solve_field(&h, &xs, &[0.0, 0.5, 1.0]).unwrap();
    let p = sol.points.iter().filter(|p| p.t == 1.0 && p.status == PointStatus::Solved).nth(3).unwrap();
    let u = p.u.unwrap();
    let (ux, _) = h.tangent(u, p.t).unwrap();
    let dx = 1e-5;
    let up = h.solve(p.x + dx, p.t, u).unwrap().solution().unwrap().u;
    let um = h.solve(p.x - dx, p.t, u).unwrap().solution().unwrap().u;
    for i in 0..3 {
        let fd = (up[i] - um[i]) / (2.0 * dx);
        assert!((fd - ux[i]).abs() < 1e-5 * (1.0 + fd.abs()), "{fd} vs {}", ux[i]);
    }
    assert!(pde_residual(&h, p.x, p.t, u, 1e-5, 1e-5).unwrap() < PDE_TOLERANCE);
}

#[test]
fn increasing_data_has_no_zone() {
    let inc = InitialData::polynomial(vec![-6.95, 24.45, -24.0, 8.0], 0.05, 2.0).unwrap();
    assert_eq!(inc.monotonicity(), Monotonicity::Increasing);
    let h = solver(inc);
    let sol = solve_field(&h, &linspace(-2.0, 2.0, 21), &linspace(0.0, 1.0, 4)).unwrap();
    assert_eq!(sol.stats.attempted, 0);
    assert!(sol.zones.iter().all(Option::is_none));
    assert!(sol.points.iter().all(|p| p.status != PointStatus::Solved));
}

#[test]
fn grid_validation() {
    let h = solver(decreasing());
    assert!(solve_field(&h, &[0.0, 0.0], &[0.5]).is_err());
    assert!(solve_field(&h, &[0.0, 1.0], &[-0.5, 0.5]).is_err());
    let empty = solve_field(&h, &[], &[0.5]).unwrap();
    assert!(empty.is_empty());
    assert_eq!(empty.stats.attempted, 0);
}
