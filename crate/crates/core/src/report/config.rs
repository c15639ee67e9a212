//! Flat `key = value` run configuration.

use std::path::{Path, PathBuf};

use crate::benchmarks::{BenchmarkProblem, ProblemKind, DEFAULT_INITIAL_N};
use crate::driver::{Quantity, RunOptions};
use crate::error::{Error, Result};
use crate::marking::{check_theta, Strategy};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub degree: usize,
    pub strategy: Strategy,
    pub theta: f64,
    pub initial_n: usize,
    pub initial_refinements: usize,
    pub max_dofs: usize,
    pub max_levels: usize,
    pub out_dir: PathBuf,
    pub plot: bool,
    pub plot_quantity: Quantity,
    pub reference_slopes: Vec<f64>,
    /// Error thresholds of the cumulative cost study.
    pub taus: Vec<f64>,
    pub cost_quantity: Quantity,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: ProblemKind::WeightedL2,
            degree: 1,
            strategy: Strategy::A,
            theta: 0.5,
            initial_n: DEFAULT_INITIAL_N,
            initial_refinements: 0,
            max_dofs: 100_000,
            max_levels: 100,
            out_dir: PathBuf::from("out"),
            plot: true,
            plot_quantity: Quantity::Product,
            reference_slopes: vec![-1.0, -2.0],
            taus: (1..=10).map(|k| 10f64.powi(-k)).collect(),
            cost_quantity: Quantity::Product,
        }
    }
}

pub const KEYS: [&str; 14] = [
    "problem",
    "p",
    "strategy",
    "theta",
    "n",
    "refinements",
    "max_dofs",
    "max_levels",
    "out",
    "plot",
    "plot_quantity",
    "reference_slopes",
    "taus",
    "cost_quantity",
];

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid value {value:?} for {key}; expected true or false"))),
    }
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment. Unset keys keep
    /// their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got {raw:?}", i + 1)))?;
            config.set(key.trim(), value.trim()).map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("line {}: {msg}", i + 1)),
                other => other,
            })?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets one key. Values are checked for syntax only; call
    /// [`RunConfig::validate`] afterwards.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let wrap = |e: Error| Error::Config(format!("{key}: {e}"));
        match key {
            "problem" => self.problem = value.parse().map_err(wrap)?,
            "p" => self.degree = parse_value(key, value)?,
            "strategy" => self.strategy = value.parse().map_err(wrap)?,
            "theta" => self.theta = parse_value(key, value)?,
            "n" => self.initial_n = parse_value(key, value)?,
            "refinements" => self.initial_refinements = parse_value(key, value)?,
            "max_dofs" => self.max_dofs = parse_value(key, value)?,
            "max_levels" => self.max_levels = parse_value(key, value)?,
            "out" => self.out_dir = PathBuf::from(value),
            "plot" => self.plot = parse_bool(key, value)?,
            "plot_quantity" => self.plot_quantity = value.parse().map_err(wrap)?,
            "reference_slopes" => self.reference_slopes = parse_list(key, value)?,
            "taus" => self.taus = parse_list(key, value)?,
            "cost_quantity" => self.cost_quantity = value.parse().map_err(wrap)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}; known keys: {}", KEYS.join(", ")))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        check_theta(self.theta).map_err(|_| Error::Config(format!("theta must lie in (0, 1], got {}", self.theta)))?;
        if !(1..=2).contains(&self.degree) {
            return Err(Error::Config(format!("p must be 1 or 2, got {}", self.degree)));
        }
        if self.initial_n == 0 || !self.initial_n.is_multiple_of(4) {
            return Err(Error::Config(format!("n must be a positive multiple of 4, got {}", self.initial_n)));
        }
        if self.taus.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::Config("taus must be finite and nonnegative".into()));
        }
        if self.reference_slopes.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("reference slopes must be finite".into()));
        }
        Ok(())
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            strategy: self.strategy,
            theta: self.theta,
            degree: self.degree,
            max_dofs: self.max_dofs,
            max_levels: self.max_levels,
            initial_refinements: self.initial_refinements,
            check_mesh: false,
        }
    }

    pub fn benchmark(&self) -> Result<BenchmarkProblem> {
        BenchmarkProblem::new(self.problem, self.initial_n)
    }
}

/// Parses `start..end:step` (inclusive) or a comma-separated list of θ values.
pub fn parse_thetas(spec: &str) -> Result<Vec<f64>> {
    let values = if let Some((range, step)) = spec.split_once(':') {
        let (start, end) = range
            .split_once("..")
            .ok_or_else(|| Error::Config(format!("expected start..end:step, got {spec:?}")))?;
        let start: f64 = parse_value("thetas", start.trim())?;
        let end: f64 = parse_value("thetas", end.trim())?;
        let step: f64 = parse_value("thetas", step.trim())?;
        if !(step > 0.0) || end < start {
            return Err(Error::Config(format!("empty or unbounded theta range {spec:?}")));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize + 1;
        // Rounding keeps 0.1 + 2·0.1 printing as 0.3.
        (0..count).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect()
    } else {
        parse_list("thetas", spec)?
    };
    if values.is_empty() {
        return Err(Error::Config("no theta values given".into()));
    }
    for &t in &values {
        check_theta(t).map_err(|_| Error::Config(format!("theta must lie in (0, 1], got {t}")))?;
    }
    Ok(values)
}
