//! `whitham-ch` command-line front end.

mod commands;
mod config;
mod output;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use whitham_ch::Error;

use config::{Cli, Command, Format, JobConfig};

#[derive(Debug, Parser)]
#[command(name = "whitham-ch", version, about = "Camassa-Holm Whitham modulation toolkit")]
struct Args {
    #[command(subcommand)]
    command: Cli,
}

/// Raised by `verify` after its report has been written.
#[derive(Debug)]
struct ChecksFailed(usize);

impl std::fmt::Display for ChecksFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} consistency check(s) failed", self.0)
    }
}

impl std::error::Error for ChecksFailed {}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ChecksFailed>().is_some() {
        return 3;
    }
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(Error::InvalidCurve(_)) => 2,
        Some(Error::Consistency { .. }) => 3,
        _ => 1,
    }
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("WHITHAM_CH_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("WHITHAM_CH_THREADS must be a positive integer, got `{v}`"))?;
        anyhow::ensure!(n > 0, "WHITHAM_CH_THREADS must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

struct Job<'a> {
    command: Command,
    nu: f64,
    u: Option<[f64; 3]>,
    beta: Option<[f64; 3]>,
    data: Option<&'a Path>,
    xgrid: Option<&'a str>,
    tgrid: Option<&'a str>,
    tolerance: Option<f64>,
    coalescence: Option<f64>,
    format: Format,
    out: Option<&'a Path>,
}

fn need<T: Copy>(v: Option<T>, what: &str) -> anyhow::Result<T> {
    v.ok_or_else(|| anyhow::anyhow!("missing {what}"))
}

fn execute(job: Job) -> anyhow::Result<()> {
    let name = job.command.name();
    let text = match job.command {
        Command::Speeds => output::render(name, &commands::speeds_report(job.nu, need(job.u, "u")?)?, job.format)?,
        Command::Geometry => {
            output::render(name, &commands::geometry_report(job.nu, need(job.u, "u")?)?, job.format)?
        }
        Command::Kdv => output::render(name, &commands::kdv_report(job.nu, need(job.beta, "beta")?)?, job.format)?,
        Command::Reciprocal => {
            output::render(name, &commands::reciprocal_report(job.nu, need(job.u, "u")?)?, job.format)?
        }
        Command::Table => {
            let t = commands::table(job.nu, need(job.u, "u")?)?;
            match job.format {
                Format::Text => t.to_text(),
                f => output::render(name, &t, f)?,
            }
        }
        Command::Solve => {
            let data = config::load_data(need(job.data, "data")?)?;
            let xs = config::parse_grid(need(job.xgrid, "xgrid")?)?;
            let ts = config::parse_grid(need(job.tgrid, "tgrid")?)?;
            let options = config::solve_options(job.tolerance, job.coalescence)?;
            let sol = commands::solve(job.nu, data, options, &xs, &ts)?;
            match job.format {
                Format::Csv => commands::solution_csv(&sol),
                Format::Json => output::render(name, &sol, Format::Json)?,
                Format::Text => output::render(name, &sol.stats, Format::Text)?,
            }
        }
        Command::Verify => {
            let v = commands::verify(job.nu, job.u.unwrap_or(DEFAULT_VERIFY_U))?;
            let text = match job.format {
                Format::Text => commands::verification_text(&v),
                f => output::render(name, &v, f)?,
            };
            output::emit(&text, job.out)?;
            if v.failed > 0 {
                return Err(ChecksFailed(v.failed).into());
            }
            return Ok(());
        }
    };
    output::emit(&text, job.out)
}

const DEFAULT_VERIFY_U: [f64; 3] = [0.3, 1.2, 2.9];

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    let curve_job = |command, a: &config::CurveArgs| -> anyhow::Result<()> {
        execute(Job {
            command,
            nu: a.nu,
            u: Some(config::parse_triple(&a.u)?),
            beta: None,
            data: None,
            xgrid: None,
            tgrid: None,
            tolerance: None,
            coalescence: None,
            format: a.output.format,
            out: a.output.out.as_deref(),
        })
    };
    match &cli {
        Cli::Speeds(a) => curve_job(Command::Speeds, a),
        Cli::Geometry(a) => curve_job(Command::Geometry, a),
        Cli::Reciprocal(a) => curve_job(Command::Reciprocal, a),
        Cli::Table(a) => curve_job(Command::Table, a),
        Cli::Kdv(a) => execute(Job {
            command: Command::Kdv,
            nu: a.nu,
            u: None,
            beta: Some(config::parse_triple(&a.beta)?),
            data: None,
            xgrid: None,
            tgrid: None,
            tolerance: None,
            coalescence: None,
            format: a.output.format,
            out: a.output.out.as_deref(),
        }),
        Cli::Solve(a) => execute(Job {
            command: Command::Solve,
            nu: a.nu,
            u: None,
            beta: None,
            data: Some(&a.data),
            xgrid: Some(&a.xgrid),
            tgrid: Some(&a.tgrid),
            tolerance: a.tolerance,
            coalescence: a.coalescence,
            format: a.format,
            out: a.out.as_deref(),
        }),
        Cli::Verify(a) => execute(Job {
            command: Command::Verify,
            nu: a.nu,
            u: Some(config::parse_triple(&a.u)?),
            beta: None,
            data: None,
            xgrid: None,
            tgrid: None,
            tolerance: None,
            coalescence: None,
            format: a.output.format,
            out: a.output.out.as_deref(),
        }),
        Cli::Run { config } => {
            let job = JobConfig::load(config)?;
            // relative data paths are resolved against the job file
            let base = config.parent().unwrap_or(Path::new("."));
            let data = job.data.as_ref().map(|d| base.join(d));
            let out = job.output.path.as_ref().map(|p| base.join(p));
            execute(Job {
                command: job.command,
                nu: job.nu,
                u: job.u,
                beta: job.beta,
                data: data.as_deref(),
                xgrid: job.xgrid.as_deref(),
                tgrid: job.tgrid.as_deref(),
                tolerance: job.tolerances.hodograph,
                coalescence: job.tolerances.coalescence,
                format: job.output.format,
                out: out.as_deref(),
            })
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = init_threads().and_then(|_| dispatch(args.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
