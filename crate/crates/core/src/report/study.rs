//! Single runs and θ-sweeps with their output files.

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;

use crate::driver::{cumulative_cost, fit_rate, run_goafem, Quantity, RunResult, Window};
use crate::error::{Error, Result};
use crate::report::config::RunConfig;
use crate::report::csv::write_records;
use crate::report::svg::{plot_convergence, PlotOptions, Series};

pub const RUN_CSV: &str = "run.csv";
pub const RUN_SVG: &str = "convergence.svg";
pub const CUMULATIVE_CSV: &str = "cumulative.csv";
pub const SUMMARY_CSV: &str = "sweep_summary.csv";
pub const SWEEP_SVG: &str = "sweep.svg";
pub const CUMULATIVE_SVG: &str = "cumulative.svg";

#[derive(Debug)]
pub struct RunOutcome {
    pub result: RunResult,
    pub files: Vec<PathBuf>,
}

fn csv_io(e: ::csv::Error) -> Error {
    Error::Io(e.into())
}

fn write_file(path: &Path, contents: &str) -> Result<PathBuf> {
    fs::write(path, contents).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(path.to_path_buf())
}

fn write_run_csv(path: &Path, result: &RunResult) -> Result<PathBuf> {
    let file = fs::File::create(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    write_records(std::io::BufWriter::new(file), &result.records, result.failure())?;
    Ok(path.to_path_buf())
}

fn label(config: &RunConfig) -> String {
    format!("{} p={} {} theta={}", config.problem, config.degree, config.strategy, config.theta)
}

fn plot_options(config: &RunConfig, quantity: Quantity) -> PlotOptions {
    PlotOptions {
        title: format!("{} p={}", config.problem, config.degree),
        x_label: "number of elements".into(),
        y_label: quantity.name().into(),
        reference_slopes: config.reference_slopes.clone(),
    }
}

/// Runs one configuration and writes `run.csv` (and `convergence.svg` if
/// plotting is enabled) into the output directory.
pub fn execute_run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    fs::create_dir_all(&config.out_dir)?;
    let problem = config.benchmark()?;
    let result = run_goafem(&problem, &config.run_options())?;
    let mut files = vec![write_run_csv(&config.out_dir.join(RUN_CSV), &result)?];
    if config.plot && !result.records.is_empty() {
        let series = [Series::from_records(label(config), &result.records, config.plot_quantity)];
        if series[0].points.iter().any(|p| p.1 > 0.0) {
            let svg = plot_convergence(&series, &plot_options(config, config.plot_quantity))?;
            files.push(write_file(&config.out_dir.join(RUN_SVG), &svg)?);
        }
    }
    info!("{} levels written to {}", result.records.len(), config.out_dir.display());
    Ok(RunOutcome { result, files })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostRow {
    pub theta: f64,
    pub tau: f64,
    pub cost: usize,
    /// Whether the run drove the quantity below `tau`.
    pub reached: bool,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub runs: Vec<(f64, RunResult)>,
    pub costs: Vec<CostRow>,
    pub files: Vec<PathBuf>,
}

impl SweepOutcome {
    /// θ with the smallest cumulative cost at threshold `tau`; ties go to the
    /// smaller θ. `None` unless every run reached `tau`.
    pub fn best_theta(&self, tau: f64) -> Option<f64> {
        let rows: Vec<&CostRow> = self.costs.iter().filter(|c| c.tau == tau).collect();
        if rows.is_empty() || rows.iter().any(|c| !c.reached) {
            return None;
        }
        rows.into_iter()
            .min_by(|a, b| a.cost.cmp(&b.cost).then(a.theta.total_cmp(&b.theta)))
            .map(|c| c.theta)
    }

    /// Smallest threshold reached by every run.
    pub fn finest_common_tau(&self) -> Option<f64> {
        self.costs
            .iter()
            .map(|c| c.tau)
            .filter(|&t| self.best_theta(t).is_some())
            .min_by(f64::total_cmp)
    }
}

pub fn theta_file_name(theta: f64) -> String {
    format!("run_theta_{theta}.csv")
}

/// Runs the configuration once per θ and writes per-θ CSVs, the cumulative
/// cost table (only thresholds the run reached), a summary table and (optionally) plots.
pub fn execute_sweep(config: &RunConfig, thetas: &[f64]) -> Result<SweepOutcome> {
    config.validate()?;
    if thetas.is_empty() {
        return Err(Error::Config("no theta values given".into()));
    }
    fs::create_dir_all(&config.out_dir)?;
    let problem = config.benchmark()?;
    let runs: Vec<(f64, RunResult)> = thetas
        .par_iter()
        .map(|&theta| {
            let opts = crate::driver::RunOptions { theta, ..config.run_options() };
            run_goafem(&problem, &opts).map(|r| (theta, r))
        })
        .collect::<Result<_>>()?;
    let mut files = Vec::new();
    for (theta, result) in &runs {
        files.push(write_run_csv(&config.out_dir.join(theta_file_name(*theta)), result)?);
    }

    let mut costs = Vec::new();
    for (theta, result) in &runs {
        let last = match result.records.last() {
            Some(r) => config.cost_quantity.of(r)?,
            None => f64::INFINITY,
        };
        for &tau in &config.taus {
            costs.push(CostRow {
                theta: *theta,
                tau,
                cost: cumulative_cost(&result.records, tau, config.cost_quantity)?,
                reached: last < tau,
            });
        }
    }
    let mut w = csv::Writer::from_path(config.out_dir.join(CUMULATIVE_CSV)).map_err(csv_io)?;
    w.write_record(["theta", "tau", "cost"]).map_err(csv_io)?;
    for c in costs.iter().filter(|c| c.reached) {
        w.write_record([c.theta.to_string(), format!("{:e}", c.tau), c.cost.to_string()])
            .map_err(csv_io)?;
    }
    w.flush()?;
    files.push(config.out_dir.join(CUMULATIVE_CSV));

    let mut w = csv::Writer::from_path(config.out_dir.join(SUMMARY_CSV)).map_err(csv_io)?;
    w.write_record(["theta", "levels", "n_elements", "n_dofs", "product", "combined", "goal_error", "product_slope", "complete"])
        .map_err(csv_io)?;
    for (theta, result) in &runs {
        let Some(last) = result.records.last() else { continue };
        let slope = fit_rate(&result.records, Quantity::Product, Window::Decades(1.0)).map(|s| format!("{s:e}")).unwrap_or_default();
        w.write_record([
            theta.to_string(),
            result.records.len().to_string(),
            last.n_elements.to_string(),
            last.n_dofs.to_string(),
            format!("{:e}", last.product),
            format!("{:e}", last.combined),
            last.goal_error.map(|e| format!("{e:e}")).unwrap_or_default(),
            slope,
            result.is_complete().to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    files.push(config.out_dir.join(SUMMARY_CSV));

    if config.plot {
        let series: Vec<Series> = runs
            .iter()
            .map(|(t, r)| Series::from_records(format!("theta={t}"), &r.records, config.plot_quantity))
            .collect();
        if let Ok(svg) = plot_convergence(&series, &plot_options(config, config.plot_quantity)) {
            files.push(write_file(&config.out_dir.join(SWEEP_SVG), &svg)?);
        }
        let cost_series: Vec<Series> = runs
            .iter()
            .map(|(t, _)| Series {
                label: format!("theta={t}"),
                points: costs.iter().filter(|c| c.theta == *t && c.reached).map(|c| (c.tau, c.cost as f64)).collect(),
            })
            .collect();
        let opts = PlotOptions {
            title: format!("cumulative cost, {}", config.cost_quantity.name()),
            x_label: "tau".into(),
            y_label: "cumulative elements".into(),
            reference_slopes: Vec::new(),
        };
        if let Ok(svg) = plot_convergence(&cost_series, &opts) {
            files.push(write_file(&config.out_dir.join(CUMULATIVE_SVG), &svg)?);
        }
    }
    Ok(SweepOutcome { runs, costs, files })
}
