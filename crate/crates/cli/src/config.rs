//! Command-line and JSON job configuration.

use std::path::PathBuf;

use anyhow::{bail, ensure, Context};
use clap::{Args, Subcommand, ValueEnum};
use serde::Deserialize;
use whitham_ch::hodograph_solver::{InitialData, SolveOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Speeds,
    Geometry,
    Kdv,
    Reciprocal,
    Table,
    Solve,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Speeds => "speeds",
            Command::Geometry => "geometry",
            Command::Kdv => "kdv",
            Command::Reciprocal => "reciprocal",
            Command::Table => "table",
            Command::Solve => "solve",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Cli {
    /// Wave number, frequency and characteristic speeds by three routes
    Speeds(CurveArgs),
    /// Metrics, rotation coefficients, curvature and the Tsarev relation
    Geometry(CurveArgs),
    /// Negative-flow KdV data for roots beta
    Kdv(KdvArgs),
    /// Reciprocal map of a CH curve to the KdV side
    Reciprocal(CurveArgs),
    /// Metric, curvature and density correspondence table
    Table(CurveArgs),
    /// Hodograph solve of the modulation equations on a grid
    Solve(SolveArgs),
    /// Run every cross-check; exit status 3 on any failure
    Verify(VerifyArgs),
    /// Run a JSON job file
    Run {
        config: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Output file; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub nu: f64,
    /// Riemann invariants `u1,u2,u3`
    #[arg(long, allow_hyphen_values = true)]
    pub u: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct KdvArgs {
    /// Roots `b1,b2,b3`, positive and distinct
    #[arg(long)]
    pub beta: String,
    /// Enters the reciprocal coefficient N
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub nu: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub nu: f64,
    /// Initial data file (JSON)
    #[arg(long)]
    pub data: PathBuf,
    /// `a:b:n`
    #[arg(long, allow_hyphen_values = true)]
    pub xgrid: String,
    /// `a:b:n`
    #[arg(long, allow_hyphen_values = true)]
    pub tgrid: String,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub coalescence: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
    pub nu: f64,
    #[arg(long, default_value = "0.3,1.2,2.9", allow_hyphen_values = true)]
    pub u: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn parse_triple(s: &str) -> anyhow::Result<[f64; 3]> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("cannot parse `{s}` as three comma-separated numbers"))?;
    match v[..] {
        [a, b, c] => Ok([a, b, c]),
        _ => bail!("expected three comma-separated numbers, got `{s}`"),
    }
}

/// `a:b:n`, `n` points with both ends included.
pub fn parse_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        bail!("grid `{s}` is not of the form a:b:n");
    };
    let a: f64 = a.trim().parse().with_context(|| format!("grid start in `{s}`"))?;
    let b: f64 = b.trim().parse().with_context(|| format!("grid end in `{s}`"))?;
    let n: usize = n.trim().parse().with_context(|| format!("grid size in `{s}`"))?;
    ensure!(n >= 1, "grid `{s}` needs at least one point");
    ensure!(a.is_finite() && b.is_finite(), "grid `{s}` has non-finite ends");
    if n == 1 {
        return Ok(vec![a]);
    }
    ensure!(b > a, "grid `{s}` must be increasing");
    Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
}

/// Initial data file: `{"schema": 1, "kind": "polynomial", "coefficients":
/// [...], "domain": [lo, hi]}` or `{"schema": 1, "kind": "samples", "u":
/// [...], "x": [...]}`.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum DataFile {
    Polynomial {
        schema: u32,
        coefficients: Vec<f64>,
        domain: [f64; 2],
    },
    Samples {
        schema: u32,
        u: Vec<f64>,
        x: Vec<f64>,
    },
}

pub fn load_data(path: &std::path::Path) -> anyhow::Result<InitialData<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: DataFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let data = match file {
        DataFile::Polynomial {
            schema,
            coefficients,
            domain,
        } => {
            check_schema(schema)?;
            InitialData::polynomial(coefficients, domain[0], domain[1])?
        }
        DataFile::Samples { schema, u, x } => {
            check_schema(schema)?;
            ensure!(u.len() == x.len(), "samples need as many u as x values");
            let pairs: Vec<(f64, f64)> = u.into_iter().zip(x).collect();
            InitialData::from_samples(&pairs)?
        }
    };
    Ok(data)
}

fn check_schema(schema: u32) -> anyhow::Result<()> {
    ensure!(schema == crate::output::SCHEMA, "unsupported schema version {schema}");
    Ok(())
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Hodograph residual.
    pub hodograph: Option<f64>,
    /// Smallest admissible gap between invariants.
    pub coalescence: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// A job file for `run`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub schema: u32,
    pub command: Command,
    #[serde(default)]
    pub nu: f64,
    pub u: Option<[f64; 3]>,
    pub beta: Option<[f64; 3]>,
    pub data: Option<PathBuf>,
    pub xgrid: Option<String>,
    pub tgrid: Option<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub output: Output,
}

impl JobConfig {
    pub fn load(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let job: JobConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        job.validate()?;
        Ok(job)
    }

    fn validate(&self) -> anyhow::Result<()> {
        check_schema(self.schema)?;
        let name = self.command.name();
        match self.command {
            Command::Kdv => ensure!(
                self.beta.is_some() && self.u.is_none(),
                "`kdv` takes `beta` and no `u`"
            ),
            Command::Solve => {
                ensure!(self.u.is_none() && self.beta.is_none(), "`solve` takes `data`, not `u` or `beta`");
                ensure!(
                    self.data.is_some() && self.xgrid.is_some() && self.tgrid.is_some(),
                    "`solve` needs `data`, `xgrid` and `tgrid`"
                );
            }
            Command::Verify => ensure!(self.beta.is_none(), "`verify` takes `u`, not `beta`"),
            _ => ensure!(
                self.u.is_some() && self.beta.is_none(),
                "`{name}` takes `u` and no `beta`"
            ),
        }
        for (what, v) in [
            ("hodograph", self.tolerances.hodograph),
            ("coalescence", self.tolerances.coalescence),
        ] {
            if let Some(v) = v {
                ensure!(v > 0.0 && v.is_finite(), "tolerance `{what}` must be positive, got {v}");
            }
        }
        Ok(())
    }
}

pub fn solve_options(tolerance: Option<f64>, coalescence: Option<f64>) -> anyhow::Result<SolveOptions> {
    let mut o = SolveOptions::default();
    if let Some(t) = tolerance {
        ensure!(t > 0.0 && t.is_finite(), "tolerance must be positive, got {t}");
        o.tolerance = t;
    }
    if let Some(c) = coalescence {
        ensure!(c > 0.0 && c.is_finite(), "coalescence tolerance must be positive, got {c}");
        o.eps_c = c;
    }
    Ok(o)
}
