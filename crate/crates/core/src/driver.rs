//! The adaptive loop: solve, estimate, mark, refine.

use std::sync::Arc;

use log::{debug, info, warn};

use crate::benchmarks::BenchmarkProblem;
use crate::error::{Error, Result};
use crate::estimators::{eta_indicators, zeta_indicators, IndicatorField};
use crate::fem::assembly::{assemble_bilinear, assemble_dual_rhs, assemble_primal_rhs};
use crate::fem::solve::FactoredSystem;
use crate::fem::space::FeSpace;
use crate::marking::{check_theta, mark, verify_marking, MarkedSet, Strategy};
use crate::mesh::Mesh;

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub strategy: Strategy,
    pub theta: f64,
    pub degree: usize,
    /// The loop stops after the first level with more dofs than this.
    pub max_dofs: usize,
    /// The loop stops after recording this level.
    pub max_levels: usize,
    /// Uniform refinements applied to the initial grid before the loop.
    pub initial_refinements: usize,
    /// Verify conformity and the son-counting inequality after every refinement.
    pub check_mesh: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            strategy: Strategy::A,
            theta: 0.5,
            degree: 1,
            max_dofs: 100_000,
            max_levels: 100,
            initial_refinements: 0,
            check_mesh: false,
        }
    }
}

impl RunOptions {
    pub fn validate(&self) -> Result<()> {
        check_theta(self.theta)?;
        if !(1..=2).contains(&self.degree) {
            return Err(Error::InvalidArgument(format!("polynomial degree must be 1 or 2, got {}", self.degree)));
        }
        Ok(())
    }
}

/// One level of an adaptive run.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub level: usize,
    pub n_elements: usize,
    pub n_dofs: usize,
    pub eta: f64,
    pub zeta: f64,
    /// `η (η² + ζ²)^{1/2}`.
    pub product: f64,
    /// `η² + ζ²`.
    pub combined: f64,
    pub goal_value: f64,
    pub goal_error: Option<f64>,
    pub n_marked: usize,
    pub strategy: Strategy,
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    DofBudget,
    LevelCap,
    /// Marking returned the empty set: both estimators vanish.
    Converged,
    /// The run aborted; the records up to the failure are kept.
    Failed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
}

impl RunResult {
    pub fn is_complete(&self) -> bool {
        !matches!(self.termination, Termination::Failed(_))
    }

    pub fn failure(&self) -> Option<&str> {
        match &self.termination {
            Termination::Failed(msg) => Some(msg),
            _ => None,
        }
    }
}

/// Discrete primal and dual solutions with their indicators on one mesh.
pub struct LevelSolution {
    pub space: FeSpace,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub indicators: IndicatorField,
    pub goal_value: f64,
}

/// What an observer sees after each level is solved and marked.
pub struct LevelView<'a> {
    pub level: usize,
    pub solution: &'a LevelSolution,
    pub record: &'a IterationRecord,
    /// `None` on the last level, which is not refined.
    pub marked: Option<&'a MarkedSet>,
    /// The refined mesh, when the level is refined.
    pub refined: Option<&'a Mesh>,
}

/// Solves the primal problem, rebuilds the dual data at the primal solution,
/// solves the dual problem and computes both indicator fields.
pub fn solve_level(problem: &BenchmarkProblem, mesh: Arc<Mesh>, degree: usize) -> Result<LevelSolution> {
    let space = FeSpace::new(mesh, degree)?;
    let matrix = assemble_bilinear(&space, &problem.coeffs)?;
    let system = FactoredSystem::new(&matrix, space.dirichlet_mask())?;
    let primal = system.solve(&assemble_primal_rhs(&space, &problem.loads))?;
    let source = problem.goal.dual_source(&space, &primal)?;
    let dual = system.solve_transposed(&assemble_dual_rhs(&space, &source))?;
    let (eta_sq, zeta_sq) = rayon::join(
        || eta_indicators(&space, &primal, &problem.coeffs, &problem.loads),
        || zeta_indicators(&space, &dual, &problem.coeffs, &source),
    );
    let indicators = IndicatorField { eta_sq: eta_sq?, zeta_sq: zeta_sq? };
    let goal_value = problem.goal.evaluate(&space, &primal)?;
    Ok(LevelSolution { space, primal, dual, indicators, goal_value })
}

pub fn run_goafem(problem: &BenchmarkProblem, options: &RunOptions) -> Result<RunResult> {
    run_goafem_with(problem, options, |_| Ok(()))
}

/// Runs the adaptive loop, calling `observer` after every level.
///
/// Invalid options are reported as errors. Failures inside the loop (solver,
/// marking or mesh invariants, observer errors) end the run with
/// [`Termination::Failed`] and keep the records gathered so far.
pub fn run_goafem_with<F>(problem: &BenchmarkProblem, options: &RunOptions, mut observer: F) -> Result<RunResult>
where
    F: FnMut(&LevelView<'_>) -> Result<()>,
{
    options.validate()?;
    let mut mesh = problem.initial_mesh()?;
    for _ in 0..options.initial_refinements {
        mesh = mesh.uniform_refine();
    }
    let initial_dofs = FeSpace::new(Arc::new(mesh.clone()), options.degree)?.n_dofs();
    if options.max_dofs < initial_dofs {
        return Err(Error::InvalidArgument(format!(
            "max_dofs {} is below the {initial_dofs} dofs of the initial mesh",
            options.max_dofs
        )));
    }
    let mut mesh = Arc::new(mesh);
    let mut records = Vec::new();
    let exact = problem.goal.exact_goal();
    for level in 0.. {
        match run_level(problem, options, level, &mesh, exact, &mut observer) {
            Ok((record, step)) => {
                records.push(record);
                match step {
                    Step::Continue(next) => mesh = Arc::new(next),
                    Step::Stop(termination) => {
                        info!("{} {} finished after {} levels: {termination:?}", problem.kind, options.strategy, level + 1);
                        return Ok(RunResult { records, termination });
                    }
                }
            }
            Err(e) => {
                warn!("{} {} failed at level {level}: {e}", problem.kind, options.strategy);
                return Ok(RunResult { records, termination: Termination::Failed(format!("level {level}: {e}")) });
            }
        }
    }
    unreachable!("the level loop only exits by returning")
}

enum Step {
    Continue(Mesh),
    Stop(Termination),
}

fn run_level<F>(
    problem: &BenchmarkProblem,
    options: &RunOptions,
    level: usize,
    mesh: &Arc<Mesh>,
    exact: Option<f64>,
    observer: &mut F,
) -> Result<(IterationRecord, Step)>
where
    F: FnMut(&LevelView<'_>) -> Result<()>,
{
    let solution = solve_level(problem, mesh.clone(), options.degree)?;
    let ind = &solution.indicators;
    let (eta_sq, zeta_sq) = (ind.eta_total_sq(), ind.zeta_total_sq());
    let combined = eta_sq + zeta_sq;
    let mut record = IterationRecord {
        level,
        n_elements: mesh.n_elements(),
        n_dofs: solution.space.n_dofs(),
        eta: eta_sq.sqrt(),
        zeta: zeta_sq.sqrt(),
        product: eta_sq.sqrt() * combined.sqrt(),
        combined,
        goal_value: solution.goal_value,
        goal_error: exact.map(|g| (g - solution.goal_value).abs()),
        n_marked: 0,
        strategy: options.strategy,
        theta: options.theta,
    };
    debug!(
        "level {level}: {} elements, {} dofs, eta {:e}, zeta {:e}",
        record.n_elements, record.n_dofs, record.eta, record.zeta
    );
    let stop = if record.n_dofs > options.max_dofs {
        Some(Termination::DofBudget)
    } else if level >= options.max_levels {
        Some(Termination::LevelCap)
    } else {
        None
    };
    if let Some(termination) = stop {
        observer(&LevelView { level, solution: &solution, record: &record, marked: None, refined: None })?;
        return Ok((record, Step::Stop(termination)));
    }
    let marked = mark(options.strategy, &ind.eta_sq, &ind.zeta_sq, options.theta)?;
    verify_marking(&marked, &ind.eta_sq, &ind.zeta_sq)?;
    record.n_marked = marked.len();
    if marked.is_empty() {
        observer(&LevelView { level, solution: &solution, record: &record, marked: Some(&marked), refined: None })?;
        return Ok((record, Step::Stop(Termination::Converged)));
    }
    let refined = match options.strategy {
        Strategy::Uniform => mesh.uniform_refine(),
        _ => mesh.refine_nvb(&marked.elements)?,
    };
    if options.check_mesh {
        mesh.check_refinement(&refined, &marked.elements).map_err(Error::MeshInvariant)?;
    }
    observer(&LevelView { level, solution: &solution, record: &record, marked: Some(&marked), refined: Some(&refined) })?;
    Ok((record, Step::Continue(refined)))
}

/// Record column used by [`cumulative_cost`] and [`fit_rate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Eta,
    Zeta,
    Product,
    Combined,
    GoalError,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Eta => "eta",
            Quantity::Zeta => "zeta",
            Quantity::Product => "product",
            Quantity::Combined => "combined",
            Quantity::GoalError => "goal_error",
        }
    }

    pub fn of(self, r: &IterationRecord) -> Result<f64> {
        match self {
            Quantity::Eta => Ok(r.eta),
            Quantity::Zeta => Ok(r.zeta),
            Quantity::Product => Ok(r.product),
            Quantity::Combined => Ok(r.combined),
            Quantity::GoalError => r.goal_error.ok_or(Error::MissingGoalError),
        }
    }
}

impl std::str::FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Quantity::Eta, Quantity::Zeta, Quantity::Product, Quantity::Combined, Quantity::GoalError]
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown quantity {s:?}")))
    }
}

/// `Σ #T_ℓ` over the levels whose `quantity` is at least `tau`.
pub fn cumulative_cost(records: &[IterationRecord], tau: f64, quantity: Quantity) -> Result<usize> {
    if records.is_empty() {
        return Err(Error::InsufficientData("no records".into()));
    }
    let mut cost = 0;
    for r in records {
        if quantity.of(r)? >= tau {
            cost += r.n_elements;
        }
    }
    Ok(cost)
}

/// Trailing part of a run used for rate fits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Window {
    /// The last `ceil(f · len)` records.
    Fraction(f64),
    /// Records with `n_elements ≥ N_last / 10^d`.
    Decades(f64),
}

pub const MIN_FIT_RECORDS: usize = 4;

/// Least-squares slope of `log quantity` against `log n_elements` over the
/// trailing window. Nonpositive values are left out of the fit.
pub fn fit_rate(records: &[IterationRecord], quantity: Quantity, window: Window) -> Result<f64> {
    let Some(last) = records.last() else {
        return Err(Error::InsufficientData("no records".into()));
    };
    let tail: &[IterationRecord] = match window {
        Window::Fraction(f) => {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidArgument(format!("window fraction must lie in (0, 1], got {f}")));
            }
            let k = ((f * records.len() as f64).ceil() as usize).min(records.len());
            &records[records.len() - k..]
        }
        Window::Decades(d) => {
            if !(d > 0.0) {
                return Err(Error::InvalidArgument(format!("window must span a positive number of decades, got {d}")));
            }
            let floor = last.n_elements as f64 / 10f64.powf(d);
            let start = records.iter().position(|r| r.n_elements as f64 >= floor).unwrap_or(0);
            &records[start..]
        }
    };
    if tail.len() < MIN_FIT_RECORDS {
        return Err(Error::InsufficientData(format!(
            "{} records in the fit window, need at least {MIN_FIT_RECORDS}",
            tail.len()
        )));
    }
    let mut points = Vec::with_capacity(tail.len());
    for r in tail {
        let v = quantity.of(r)?;
        if v > 0.0 {
            points.push(((r.n_elements as f64).ln(), v.ln()));
        }
    }
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!("fewer than two positive {} values", quantity.name())));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all fit points share one element count".into()));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::weighted_l2_problem;

    fn synthetic(ns: &[usize], f: impl Fn(f64) -> f64) -> Vec<IterationRecord> {
        ns.iter()
            .enumerate()
            .map(|(level, &n)| {
                let v = f(n as f64);
                IterationRecord {
                    level,
                    n_elements: n,
                    n_dofs: n,
                    eta: v,
                    zeta: v,
                    product: v,
                    combined: v,
                    goal_value: 0.0,
                    goal_error: Some(v),
                    n_marked: 0,
                    strategy: Strategy::A,
                    theta: 0.5,
                }
            })
            .collect()
    }

    #[test]
    fn cumulative_cost_examples() {
        let mut r = synthetic(&[4, 8, 16], |_| 0.0);
        for (rec, e) in r.iter_mut().zip([1.0, 0.5, 0.25]) {
            rec.goal_error = Some(e);
        }
        assert_eq!(cumulative_cost(&r, 0.5, Quantity::GoalError).unwrap(), 12);
        assert_eq!(cumulative_cost(&r, 2.0, Quantity::GoalError).unwrap(), 0);
        assert_eq!(cumulative_cost(&r, 0.0, Quantity::GoalError).unwrap(), 28);
        r[1].goal_error = None;
        assert!(matches!(cumulative_cost(&r, 0.5, Quantity::GoalError), Err(Error::MissingGoalError)));
        assert!(cumulative_cost(&[], 0.5, Quantity::Product).is_err());
    }

    #[test]
    fn fit_rate_recovers_power_laws() {
        let ns = [10, 40, 90, 300, 1000, 5000, 20000];
        for rate in [1.0, 2.0, 0.5] {
            let r = synthetic(&ns, |n| 3.0 * n.powf(-rate));
            for w in [Window::Fraction(1.0), Window::Fraction(0.6), Window::Decades(2.0)] {
                let s = fit_rate(&r, Quantity::Product, w).unwrap();
                assert!((s + rate).abs() < 1e-10, "{s}");
            }
        }
    }

    #[test]
    fn fit_rate_input_checks() {
        let r = synthetic(&[10, 20, 40], |n| 1.0 / n);
        assert!(matches!(fit_rate(&r, Quantity::Eta, Window::Fraction(1.0)), Err(Error::InsufficientData(_))));
        let r = synthetic(&[10, 20, 40, 80], |_| 0.0);
        assert!(matches!(fit_rate(&r, Quantity::Eta, Window::Fraction(1.0)), Err(Error::InsufficientData(_))));
        let mut r = synthetic(&[10, 20, 40, 80, 160], |n| 1.0 / n);
        r[1].eta = 0.0;
        assert!((fit_rate(&r, Quantity::Eta, Window::Fraction(1.0)).unwrap() + 1.0).abs() < 1e-12);
        assert!(fit_rate(&r, Quantity::Eta, Window::Fraction(0.0)).is_err());
        assert!(fit_rate(&r, Quantity::Eta, Window::Decades(-1.0)).is_err());
    }

    #[test]
    fn zero_level_cap_gives_initial_record() {
        let problem = weighted_l2_problem(8).unwrap();
        let opts = RunOptions { max_levels: 0, ..Default::default() };
        let run = run_goafem(&problem, &opts).unwrap();
        assert_eq!(run.records.len(), 1);
        assert_eq!(run.termination, Termination::LevelCap);
        assert_eq!(run.records[0].n_elements, 128);
        assert_eq!(run.records[0].n_marked, 0);
    }

    #[test]
    fn options_are_validated() {
        let problem = weighted_l2_problem(8).unwrap();
        for opts in [
            RunOptions { theta: 1.3, ..Default::default() },
            RunOptions { theta: 0.0, ..Default::default() },
            RunOptions { degree: 3, ..Default::default() },
            RunOptions { max_dofs: 10, ..Default::default() },
        ] {
            assert!(run_goafem(&problem, &opts).is_err());
        }
    }

    #[test]
    fn records_are_consistent() {
        let problem = weighted_l2_problem(8).unwrap();
        let opts = RunOptions { max_dofs: 2000, check_mesh: true, ..Default::default() };
        let run = run_goafem(&problem, &opts).unwrap();
        assert_eq!(run.termination, Termination::DofBudget);
        assert!(run.records.last().unwrap().n_dofs > 2000);
        for w in run.records.windows(2) {
            assert!(w[1].n_elements > w[0].n_elements);
            assert!(w[0].n_marked > 0);
        }
        for r in &run.records {
            let expect = r.eta * (r.eta * r.eta + r.zeta * r.zeta).sqrt();
            assert!((r.product - expect).abs() <= 1e-14 * expect);
            assert!(r.goal_error.is_some());
        }
    }

    #[test]
    fn uniform_strategy_marks_every_element() {
        let problem = weighted_l2_problem(4).unwrap();
        let opts = RunOptions { strategy: Strategy::Uniform, max_levels: 3, ..Default::default() };
        let run = run_goafem(&problem, &opts).unwrap();
        let counts: Vec<usize> = run.records.iter().map(|r| r.n_elements).collect();
        assert_eq!(counts, vec![32, 128, 512, 2048]);
        for r in &run.records[..3] {
            assert_eq!(r.n_marked, r.n_elements);
        }
    }

    #[test]
    fn observer_failure_marks_run_incomplete() {
        let problem = weighted_l2_problem(8).unwrap();
        let run = run_goafem_with(&problem, &RunOptions::default(), |v| {
            if v.level == 2 {
                Err(Error::Solver("injected".into()))
            } else {
                Ok(())
            }
        })
        .unwrap();
        assert!(!run.is_complete());
        assert_eq!(run.records.len(), 2);
        assert!(run.failure().unwrap().contains("injected"));
    }
}
