//! Library calls behind each subcommand.

use serde::Serialize;
use serde_json::{json, Value};
use whitham_ch::ch_modulation::{
    densities, frequency, speeds, speeds_elliptic, traveling_wave, wavenumber, wavenumber_closed,
};
use whitham_ch::curve::ChCurve;
use whitham_ch::hodograph_solver::{
    commuting_residual, epd_q, epd_residual, solve_field, Hodograph, InitialData, ModulationSolution,
    SolveOptions,
};
use whitham_ch::kdv_modulation::{
    kdv_curvature, kdv_hamiltonians, neg_speeds, pos_speeds, KdvCurve,
};
use whitham_ch::metric_geometry::{
    affinor_sign, curvature, metric, pencil_check, rotation_coefficients, tsarev_residual,
};
use whitham_ch::reciprocal::{metric_correspondence, pair, table1, tilde_speeds, Side, Table1};
use whitham_ch::Error;

use crate::output::float;

pub fn speeds_report(nu: f64, u: [f64; 3]) -> anyhow::Result<Value> {
    let c = ChCurve::new(nu, u)?;
    let r = speeds(&c)?;
    Ok(json!({
        "nu": nu,
        "u": u,
        "k": wavenumber(&c)?,
        "omega": frequency(&c)?,
        "speeds": r.speeds.c,
        "speeds_differential": r.differential,
        "speeds_finite_difference": r.finite_difference,
        "delta_differential": r.delta_differential,
        "delta_finite_difference": r.delta_finite_difference,
    }))
}

pub fn geometry_report(nu: f64, u: [f64; 3]) -> anyhow::Result<Value> {
    let c = ChCurve::new(nu, u)?;
    let mut metrics = Vec::new();
    for e in 0..4 {
        let check = curvature(&c, e)?;
        metrics.push(json!({
            "exponent": e,
            "metric": metric(&c, e)?,
            "rotation": rotation_coefficients(&c, e)?,
            "curvature": check.report.r_sectional,
            "expected_curvature": check.expected_sectional,
            "max_offdiagonal_curvature": check.report.max_offdiag(),
            "max_deviation": check.max_deviation,
            "egorov_defect": check.report.egorov_defect,
            "tsarev_residual": tsarev_residual(&c, e)?,
        }));
    }
    let (sign, fit) = affinor_sign(&c)?;
    Ok(json!({
        "nu": nu,
        "u": u,
        "speeds": speeds_elliptic(&c),
        "metrics": metrics,
        "pencil": pencil_check(&c, &PENCIL_LAMBDAS)?,
        "affinor_sign": sign,
        "affinor_residual": fit,
    }))
}

const PENCIL_LAMBDAS: [f64; 3] = [0.25, 1.0, 4.0];

pub fn kdv_report(nu: f64, beta: [f64; 3]) -> anyhow::Result<Value> {
    let k = KdvCurve::new(beta)?;
    let mut curv = Vec::new();
    for e in 0..4 {
        let check = kdv_curvature(&k, e)?;
        curv.push(json!({
            "exponent": e,
            "curvature": check.report.r_sectional,
            "expected_curvature": check.expected_sectional,
            "max_deviation": check.max_deviation,
        }));
    }
    Ok(json!({
        "beta": beta,
        "nu": nu,
        "alpha0": k.alpha0(),
        "alpha1": k.alpha1(),
        "j0": k.j0(),
        "wavenumber": k.wavenumber(),
        "frequency": k.frequency(),
        "negative_flow_speeds": neg_speeds(&k)?,
        "kdv_speeds": pos_speeds(&k),
        "hamiltonians": kdv_hamiltonians(&k, nu)?,
        "curvature": curv,
    }))
}

pub fn reciprocal_report(nu: f64, u: [f64; 3]) -> anyhow::Result<Value> {
    let p = pair(&ChCurve::new(nu, u)?)?;
    let correspondence = (0..4)
        .map(|e| metric_correspondence(&p, e))
        .collect::<Result<Vec<f64>, Error>>()?;
    Ok(json!({
        "nu": nu,
        "u": u,
        "beta": p.kdv.beta(),
        "h0": p.h0,
        "n": p.n,
        "transformed_speeds": tilde_speeds(&p)?,
        "negative_flow_speeds": neg_speeds(&p.kdv)?,
        "hamiltonians": p.hamiltonians,
        "metric_correspondence": correspondence,
    }))
}

pub fn table(nu: f64, u: [f64; 3]) -> anyhow::Result<Table1<f64>> {
    Ok(table1(&pair(&ChCurve::new(nu, u)?)?)?)
}

pub fn solve(
    nu: f64,
    data: InitialData<f64>,
    options: SolveOptions,
    xs: &[f64],
    ts: &[f64],
) -> anyhow::Result<ModulationSolution<f64>> {
    let h = Hodograph::new(nu, data, options)?;
    Ok(solve_field(&h, xs, ts)?)
}

/// `x,t,u1,u2,u3,residual,status`; empty cells where nothing was solved.
pub fn solution_csv(sol: &ModulationSolution<f64>) -> String {
    let mut s = String::from("x,t,u1,u2,u3,residual,status\n");
    for p in &sol.points {
        let (u1, u2, u3) = match p.u {
            Some(u) => (float(u[0]), float(u[1]), float(u[2])),
            None => (String::new(), String::new(), String::new()),
        };
        let r = p.hodograph_residual.map(float).unwrap_or_default();
        s.push_str(&format!(
            "{},{},{u1},{u2},{u3},{r},{}\n",
            float(p.x),
            float(p.t),
            p.status.as_str()
        ));
    }
    s
}

/// One named cross-check.
#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `<=` or `>=`.
    pub relation: &'static str,
    pub bound: f64,
    pub passed: bool,
    pub note: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Verification {
    pub nu: f64,
    pub u: [f64; 3],
    pub checks: Vec<Check>,
    pub failed: usize,
}

struct Suite(Vec<Check>);

impl Suite {
    fn at_most(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.0.push(Check {
            name: name.into(),
            value,
            relation: "<=",
            bound,
            passed: value.is_finite() && value <= bound,
            note: None,
        });
    }

    fn at_least(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.0.push(Check {
            name: name.into(),
            value,
            relation: ">=",
            bound,
            passed: value.is_finite() && value >= bound,
            note: None,
        });
    }

    /// Runs `f`; a library error becomes a failed check. Invalid curves are
    /// passed through.
    fn run(&mut self, name: &str, bound: f64, f: impl FnOnce() -> Result<f64, Error>) -> anyhow::Result<()> {
        match f() {
            Ok(v) => self.at_most(name, v, bound),
            Err(e @ Error::InvalidCurve(_)) => return Err(e.into()),
            Err(e) => {
                let value = match &e {
                    Error::Consistency { residual, .. } => *residual,
                    _ => f64::NAN,
                };
                self.0.push(Check {
                    name: name.into(),
                    value,
                    relation: "<=",
                    bound,
                    passed: false,
                    note: Some(e.to_string()),
                });
            }
        }
        Ok(())
    }
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn verify(nu: f64, u: [f64; 3]) -> anyhow::Result<Verification> {
    let c = ChCurve::new(nu, u)?;
    let mut s = Suite(Vec::new());

    s.run("curve.closed_forms_vs_moments", 1e-6, || {
        let k = c.constants()?;
        let scale = 1.0 + u[2].abs() + nu.abs();
        let g1 = -k.i1 / k.i0;
        let g2 = -k.i2 / k.i0 + 0.5 * (c.sum_u() - nu) * k.i1 / k.i0;
        Ok(((g1 - k.gamma1).abs() / scale).max((g2 - k.gamma2).abs() / (scale * scale)))
    })?;
    s.run("ch.wavenumber.closed_vs_cycle", 1e-7, || {
        let k = wavenumber(&c)?;
        Ok(((k - wavenumber_closed(&c)) / k).abs())
    })?;
    s.run("ch.speeds.differential_vs_elliptic", 1e-9, || Ok(speeds(&c)?.delta_differential))?;
    s.run("ch.speeds.finite_difference_vs_elliptic", 1e-5, || {
        Ok(speeds(&c)?.delta_finite_difference)
    })?;
    let cs = speeds_elliptic(&c);
    s.at_least("ch.speeds.hyperbolic_c3_minus_c1", cs[2] - cs[0], 0.0);
    s.at_least("ch.speeds.hyperbolic_c3_minus_c2", cs[2] - cs[1], 0.0);
    s.run("ch.densities.h0_two_ways", 1e-9, || {
        let d = densities(&c)?;
        let direct = -2.0 * c.p2(-nu) / c.p1(-nu) - nu;
        Ok((d.h0 - direct).abs() / (1.0 + direct.abs()))
    })?;
    s.run("ch.traveling_wave_constant", 1e-10, || {
        let w = traveling_wave(&c)?;
        let expect = 4.0 * c.pi_product();
        Ok(((w.alpha_c - expect) / expect).abs())
    })?;

    for e in 0..4 {
        s.run(&format!("geometry.curvature.exponent{e}"), 1e-4, || {
            let check = curvature(&c, e)?;
            let scale = max_abs(check.expected_sectional).max(1.0);
            Ok(check.max_deviation / scale)
        })?;
        match curvature(&c, e) {
            Ok(check) => s.at_least(format!("geometry.egorov_defect.exponent{e}"), check.report.egorov_defect, 1e-3),
            Err(_) => s.at_least(format!("geometry.egorov_defect.exponent{e}"), f64::NAN, 1e-3),
        }
        s.run(&format!("geometry.tsarev.exponent{e}"), 1e-4, || tsarev_residual(&c, e))?;
    }
    s.run("geometry.signature", 0.0, || {
        let g = metric(&c, 0)?;
        Ok(if g[0] > 0.0 && g[1] < 0.0 && g[2] > 0.0 { 0.0 } else { 1.0 })
    })?;
    s.run("geometry.pencil_flat", 1e-4, || {
        let r = pencil_check(&c, &PENCIL_LAMBDAS)?;
        Ok(max_abs(r.iter().filter_map(|p| p.contravariant)))
    })?;
    s.run("geometry.affinor_sign", 1e-4, || {
        let (sign, fit) = affinor_sign(&c)?;
        Ok(if sign < 0.0 { fit } else { f64::INFINITY })
    })?;

    let p = pair(&c)?;
    for e in 0..4 {
        s.run(&format!("kdv.curvature.exponent{e}"), 1e-4, || {
            let check = kdv_curvature(&p.kdv, e)?;
            let scale = max_abs(check.expected_sectional).max(1.0);
            Ok(check.max_deviation / scale)
        })?;
    }
    s.run("kdv.negative_flow_speeds.closed_vs_finite_difference", 1e-5, || {
        let v = neg_speeds(&p.kdv)?;
        let h = p.kdv.min_gap() * f64::EPSILON.cbrt();
        let mut dev = 0.0f64;
        for (i, vi) in v.iter().enumerate() {
            let (a, b) = (p.kdv.perturbed(i, h)?, p.kdv.perturbed(i, -h)?);
            let fd = (a.frequency() - b.frequency()) / (a.wavenumber() - b.wavenumber());
            dev = dev.max((fd - vi).abs() / (1.0 + vi.abs()));
        }
        Ok(dev)
    })?;
    let h = &p.hamiltonians;
    s.at_most("kdv.h0.closed_vs_wave_average", (h.h0 - h.h0_wave).abs() / h.h0, 1e-8);
    s.at_most("kdv.n.direct_vs_gradient", (h.n - h.n_gradient).abs() / (1.0 + h.n.abs()), 1e-7);
    s.at_most("kdv.expansion_fit.h0", h.fit.deviation[0], 1e-6);
    s.at_most("kdv.expansion_fit.h_minus1", h.fit.deviation[1], 1e-4);
    s.run("reciprocal.velocity_identity", 1e-8, || {
        tilde_speeds(&p)?;
        let ct = speeds_elliptic(&p.ch);
        let v = whitham_ch::kdv_modulation::neg_speeds_closed(&p.kdv);
        Ok(max_abs((0..3).map(|i| (ct[i] - (v[i] * p.h0 + p.n)) / (1.0 + ct[i].abs()))))
    })?;
    for e in 0..4 {
        s.run(&format!("reciprocal.metric_correspondence.exponent{e}"), 1e-8, || {
            metric_correspondence(&p, e)
        })?;
    }
    match table1(&p) {
        Ok(t) => {
            for r in &t.rows {
                let side = match r.side {
                    Side::KdV => "kdv",
                    Side::CH => "ch",
                };
                s.0.push(Check {
                    name: format!("table.{side}{}", r.slot),
                    value: r.curvature_deviation,
                    relation: "<=",
                    bound: 1e-4,
                    passed: r.passed,
                    note: Some(r.metric_label.clone()),
                });
            }
            for r in t.relations.iter().filter(|r| r.tolerance.is_finite()) {
                s.0.push(Check {
                    name: format!("table.relation: {}", r.name),
                    value: r.residual,
                    relation: "<=",
                    bound: r.tolerance,
                    passed: r.passed,
                    note: None,
                });
            }
        }
        Err(e) => s.run("table", 0.0, || Err(e))?,
    }

    let lin = InitialData::polynomial(vec![0.0, 1.0], 0.0, 5.0)?;
    let one = InitialData::constant(1.0, 0.0, 5.0)?;
    let cube = InitialData::polynomial(vec![0.0, 0.0, 0.0, 1.0], 0.0, 5.0)?;
    let sq = InitialData::polynomial(vec![0.0, 0.0, 1.0], 0.0, 5.0)?;
    let pts = [[0.5, 1.0, 2.0], [0.3, 0.8, 1.7]];
    s.run("epd.normalization", 1e-10, || {
        let v = pts.iter().map(|u| epd_q(&one, *u).map(|q| q - 1.0)).collect::<Result<Vec<_>, _>>()?;
        Ok(max_abs(v))
    })?;
    s.run("epd.linear_data", 1e-8, || {
        let v = pts
            .iter()
            .map(|u| epd_q(&lin, *u).map(|q| q - (u[0] + u[1] + u[2]) / 3.0))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(max_abs(v))
    })?;
    s.run("epd.euler_residual_cubic", 1e-4, || Ok(epd_residual(&cube, pts[0])?.euler))?;
    s.run("epd.diagonal_residual_cubic", 1e-4, || Ok(epd_residual(&cube, pts[0])?.diagonal))?;
    s.run("hodograph.commuting_flows", 1e-3, || {
        Ok(commuting_residual(&sq, [1.0f64, 2.0, 3.0])?.max(commuting_residual(&cube, pts[1])?))
    })?;

    let failed = s.0.iter().filter(|c| !c.passed).count();
    Ok(Verification {
        nu,
        u,
        checks: s.0,
        failed,
    })
}

pub fn verification_text(v: &Verification) -> String {
    let width = v.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut s = format!("nu = {}  u = ({}, {}, {})\n", float(v.nu), float(v.u[0]), float(v.u[1]), float(v.u[2]));
    for c in &v.checks {
        s.push_str(&format!(
            "{:<width$}  {:>24}  {} {:<9.1e}  {}\n",
            c.name,
            float(c.value),
            c.relation,
            c.bound,
            if c.passed { "ok" } else { "FAILED" }
        ));
    }
    s.push_str(&format!("{} of {} checks failed\n", v.failed, v.checks.len()));
    s
}
