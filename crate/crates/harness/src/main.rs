use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use manifold_ar::config::EstimatorConfig;
use manifold_ar::emit::{emit, write_rows, Format};
use manifold_ar::error::{HarnessError, Result};
use manifold_ar::format::{read_json, read_ortho, write_json, Family, ReportDoc, TrajectoryDoc};
use manifold_ar::gradcheck::{check_grad, GradCheckConfig};
use manifold_ar::{run_sweep, SweepConfig};
use manifold_ar::config::Cell;
use manifold_ar::sweep::sample_process;
use manifold_ar_core::arproc::simulate_ar1;
use manifold_ar_core::sysid::estimate;
use serde::Deserialize;

/// AR(1) processes on O(n), Stiefel and Grassmann manifolds.
#[derive(Parser)]
#[command(name = "manifold-ar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a trajectory and write it as JSON.
    Simulate(SimulateArgs),
    /// Estimate the system parameter of a trajectory JSON.
    Estimate(EstimateArgs),
    /// Run a seeded grid of simulate-and-estimate trials.
    Sweep(SweepArgs),
    /// Compare analytic gradients with central differences.
    CheckGrad(CheckGradArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON with any of: manifold, n, k, steps, sigma, seed, scale.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    manifold: Option<Family>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimulateConfig {
    manifold: Option<Family>,
    n: Option<usize>,
    k: Option<usize>,
    steps: Option<usize>,
    sigma: Option<f64>,
    seed: Option<u64>,
    scale: Option<f64>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Trajectory JSON.
    trajectory: PathBuf,
    /// Estimator settings JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    tol: Option<f64>,
    /// Initial parameter for the gradient method, as nested rows.
    #[arg(long)]
    phi0: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep configuration JSON; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    manifold: Option<Family>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    steps: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    sigma: Vec<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Output file; stdout when omitted here and in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to the output file's extension, else CSV.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct CheckGradArgs {
    /// Both stiefel and grassmann when omitted.
    #[arg(long, value_enum)]
    manifold: Option<Family>,
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 5)]
    steps: usize,
    #[arg(long, default_value_t = 0.05)]
    sigma: f64,
    /// Random configurations per manifold.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest accepted relative error.
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => run_estimate(a),
        Command::Sweep(a) => sweep(a),
        Command::CheckGrad(a) => run_check_grad(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn required<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| HarnessError::config(format!("missing {name}")))
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let c: SimulateConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => SimulateConfig::default(),
    };
    let family = required(a.manifold.or(c.manifold), "manifold")?;
    let n = required(a.n.or(c.n), "n")?;
    let k = match family {
        Family::Orthogonal => n,
        _ => required(a.k.or(c.k), "k")?,
    };
    let steps = required(a.steps.or(c.steps), "steps")?;
    let sigma = required(a.sigma.or(c.sigma), "sigma")?;
    let seed = a.seed.or(c.seed).unwrap_or(0);
    let scale = c.scale.unwrap_or(manifold_ar::config::DEFAULT_SCALE);

    let cell = Cell {
        index: 0,
        n,
        k,
        steps,
        sigma,
    };
    let spec = sample_process(family, &cell, scale, seed).map_err(|e| HarnessError::config(e.to_string()))?;
    let traj = simulate_ar1(&spec).map_err(|source| HarnessError::Numerical {
        context: "simulation",
        source,
    })?;
    let doc = TrajectoryDoc::from_trajectory(&traj);
    write_json(&doc, a.out.as_deref())
}

fn run_estimate(a: EstimateArgs) -> Result<()> {
    let doc: TrajectoryDoc = read_json(&a.trajectory)?;
    let traj = doc.into_trajectory()?;
    let mut cfg: EstimatorConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => EstimatorConfig::default(),
    };
    if let Some(tol) = a.tol {
        cfg.tol = Some(tol);
        cfg.karcher_tol = Some(tol);
    }
    let settings = cfg.settings()?;
    let phi0 = a.phi0.as_deref().map(read_ortho).transpose()?;
    let report = estimate(&traj, phi0.as_ref(), &settings).map_err(|source| HarnessError::Numerical {
        context: "estimation",
        source,
    })?;
    write_json(&ReportDoc::from(&report), a.out.as_deref())?;
    if report.converged {
        Ok(())
    } else {
        Err(HarnessError::NotConverged)
    }
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => read_json::<SweepConfig>(p)?,
        None => SweepConfig::new(
            required(a.manifold, "manifold")?,
            Vec::new(),
            Vec::new(),
            Vec::new(),
            Vec::new(),
        ),
    };
    if let Some(m) = a.manifold {
        cfg.manifold = m;
    }
    for (flag, field) in [(a.n, &mut cfg.n), (a.k, &mut cfg.k), (a.steps, &mut cfg.steps)] {
        if !flag.is_empty() {
            *field = flag;
        }
    }
    if !a.sigma.is_empty() {
        cfg.sigma = a.sigma;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = a.seed {
        cfg.master_seed = s;
    }
    if let Some(tol) = a.tol {
        cfg.estimator.tol = Some(tol);
        cfg.estimator.karcher_tol = Some(tol);
    }
    if a.out.is_some() {
        cfg.out = a.out;
    }
    let format = a.format.unwrap_or_else(|| format_for(cfg.out.as_deref()));
    let rows = run_sweep(&cfg)?;
    match &cfg.out {
        Some(path) => emit(&rows, format, path),
        None => {
            let stdout = std::io::stdout();
            write_rows(&rows, format, stdout.lock(), Path::new("<stdout>"))
        }
    }
}

fn format_for(path: Option<&Path>) -> Format {
    match path.and_then(Path::extension).and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        _ => Format::Csv,
    }
}

fn run_check_grad(a: CheckGradArgs) -> Result<()> {
    let families = match a.manifold {
        Some(f) => vec![f],
        None => vec![Family::Stiefel, Family::Grassmann],
    };
    let mut audits = Vec::new();
    for manifold in families {
        let cfg = GradCheckConfig {
            manifold,
            n: a.n,
            k: a.k,
            steps: a.steps,
            sigma: a.sigma,
            configs: a.trials,
            seed: a.seed,
            tol: a.tol,
            ..GradCheckConfig::default()
        };
        audits.push(check_grad(&cfg)?);
    }
    write_json(&audits, a.out.as_deref())?;
    for audit in &audits {
        let verdict = if audit.passed { "ok" } else { "FAILED" };
        let _ = writeln!(
            std::io::stderr(),
            "{} n={} k={}: worst relative error {:.3e} ({verdict})",
            audit.manifold.name(),
            audit.n,
            audit.k,
            audit.worst
        );
    }
    match audits.iter().find(|a| !a.passed) {
        Some(bad) => Err(HarnessError::GradientAudit {
            worst: bad.worst,
            tolerance: bad.tol,
        }),
        None => Ok(()),
    }
}
