use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use log::{info, warn};

use goafem::report::{execute_run, execute_sweep, parse_records, parse_thetas, plot_convergence, PlotOptions, Series};
use goafem::{Quantity, RunConfig};

#[derive(Parser)]
#[command(name = "goafem", version, about = "Goal-oriented adaptive FEM experiments on the unit square")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Overrides {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    theta: Option<f64>,
    /// A, B, BET1, BET2 or uniform.
    #[arg(long)]
    strategy: Option<String>,
    /// Polynomial degree, 1 or 2.
    #[arg(long)]
    p: Option<usize>,
    /// weighted_l2, convection or force.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    max_dofs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one adaptive loop and write run.csv.
    Run(Overrides),
    /// Run one loop per θ and write cumulative cost tables.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
        /// `start..end:step` or a comma-separated list.
        #[arg(long, default_value = "0.1..1.0:0.1")]
        thetas: String,
    },
    /// Plot one or more run CSV files on log-log axes.
    Plot {
        /// Comma-separated CSV files.
        #[arg(long, value_delimiter = ',', required = true)]
        inputs: Vec<PathBuf>,
        /// eta, zeta, product, combined or goal_error.
        #[arg(long, default_value = "product")]
        quantity: String,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated reference slopes.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1,-2")]
        slopes: Vec<f64>,
    },
}

fn load_config(o: &Overrides) -> anyhow::Result<RunConfig> {
    let mut config = match &o.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let mut set = |key: &str, value: Option<String>| -> anyhow::Result<()> {
        if let Some(v) = value {
            config.set(key, &v)?;
        }
        Ok(())
    };
    set("theta", o.theta.map(|v| v.to_string()))?;
    set("strategy", o.strategy.clone())?;
    set("p", o.p.map(|v| v.to_string()))?;
    set("problem", o.problem.clone())?;
    set("max_dofs", o.max_dofs.map(|v| v.to_string()))?;
    set("out", o.out.as_ref().map(|p| p.display().to_string()))?;
    config.validate()?;
    Ok(config)
}

fn run(o: &Overrides) -> anyhow::Result<bool> {
    let config = load_config(o)?;
    let outcome = execute_run(&config)?;
    for f in &outcome.files {
        info!("wrote {}", f.display());
    }
    if let Some(msg) = outcome.result.failure() {
        warn!("run incomplete: {msg}");
        return Ok(false);
    }
    Ok(true)
}

fn sweep(o: &Overrides, thetas: &str) -> anyhow::Result<bool> {
    let config = load_config(o)?;
    let thetas = parse_thetas(thetas)?;
    let outcome = execute_sweep(&config, &thetas)?;
    for f in &outcome.files {
        info!("wrote {}", f.display());
    }
    match outcome.finest_common_tau() {
        Some(tau) => info!("cheapest theta at tau={tau:e}: {}", outcome.best_theta(tau).unwrap_or(f64::NAN)),
        None => warn!("no threshold was reached by every run"),
    }
    let mut complete = true;
    for (theta, result) in &outcome.runs {
        if let Some(msg) = result.failure() {
            warn!("theta={theta} incomplete: {msg}");
            complete = false;
        }
    }
    Ok(complete)
}

fn plot(inputs: &[PathBuf], quantity: &str, out: &PathBuf, slopes: &[f64]) -> anyhow::Result<bool> {
    let quantity: Quantity = quantity.parse()?;
    let mut series = Vec::new();
    for path in inputs {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let parsed = parse_records(&text).with_context(|| format!("cannot parse {}", path.display()))?;
        let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        series.push(Series::from_records(label, &parsed.records, quantity));
    }
    if series.is_empty() {
        bail!("no input files");
    }
    let options = PlotOptions {
        title: quantity.name().into(),
        x_label: "number of elements".into(),
        y_label: quantity.name().into(),
        reference_slopes: slopes.to_vec(),
    };
    let svg = plot_convergence(&series, &options)?;
    std::fs::write(out, svg).with_context(|| format!("cannot write {}", out.display()))?;
    info!("wrote {}", out.display());
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(o) => run(o),
        Command::Sweep { overrides, thetas } => sweep(overrides, thetas),
        Command::Plot { inputs, quantity, out, slopes } => plot(inputs, quantity, out, slopes),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
