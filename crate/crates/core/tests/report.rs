use goafem::benchmarks::ProblemKind;
use goafem::driver::{IterationRecord, Quantity};
use goafem::marking::Strategy as Marking;
use goafem::report::{execute_run, execute_sweep, parse_records, plot_convergence, records_to_string, PlotOptions, RunConfig, Series};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        Just(0.0),
        1e-300..1e300f64,
        prop::num::f64::POSITIVE | prop::num::f64::SUBNORMAL,
    ]
}

fn record() -> impl Strategy<Value = IterationRecord> {
    (
        (0usize..1000, 1usize..1 << 40, 1usize..1 << 40, 0usize..1 << 30),
        (finite(), finite(), finite(), finite(), finite()),
        prop::option::of(finite()),
        prop::sample::select(Marking::ALL.to_vec()),
        prop_oneof![Just(0.5), 1e-6..=1.0f64],
    )
        .prop_map(|((level, ne, nd, nm), (eta, zeta, product, combined, goal), err, strategy, theta)| IterationRecord {
            level,
            n_elements: ne,
            n_dofs: nd,
            eta,
            zeta,
            product,
            combined,
            goal_value: goal,
            goal_error: err,
            n_marked: nm,
            strategy,
            theta,
        })
}

proptest! {
    #[test]
    fn csv_round_trip(records in prop::collection::vec(record(), 0..20), failure in prop::option::of("[a-z ,:]{1,40}")) {
        let text = records_to_string(&records, failure.as_deref());
        let parsed = parse_records(&text).unwrap();
        prop_assert_eq!(&parsed.records, &records);
        prop_assert_eq!(parsed.failure.as_deref().map(str::trim), failure.as_deref().map(str::trim));
    }

    #[test]
    fn svg_is_deterministic(points in prop::collection::vec((1.0..1e6f64, 1e-12..1.0f64), 1..30)) {
        let series = vec![Series { label: "s".into(), points }];
        let a = plot_convergence(&series, &PlotOptions::default()).unwrap();
        let b = plot_convergence(&series.clone(), &PlotOptions::default()).unwrap();
        prop_assert_eq!(a, b);
    }
}

fn config(dir: &std::path::Path) -> RunConfig {
    RunConfig { out_dir: dir.to_path_buf(), ..RunConfig::default() }
}

#[test]
fn run_writes_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { max_dofs: 2_000, ..config(dir.path()) };
    let outcome = execute_run(&cfg).unwrap();
    assert!(outcome.result.is_complete());
    let text = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    assert!(text.starts_with("level,n_elements,n_dofs,eta,zeta,product,combined,goal_value,goal_error,n_marked,strategy,theta\n"));
    assert_eq!(parse_records(&text).unwrap().records, outcome.result.records);
    let svg = std::fs::read_to_string(dir.path().join("convergence.svg")).unwrap();
    assert_eq!(svg, std::fs::read_to_string(dir.path().join("convergence.svg")).unwrap());
    assert_eq!(svg.matches("<polyline").count(), 1);
}

#[test]
fn single_theta_sweep_reduces_to_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { max_dofs: 2_000, plot: false, ..config(dir.path()) };
    let sweep = execute_sweep(&cfg, &[0.5]).unwrap();
    let run = execute_run(&RunConfig { out_dir: dir.path().join("single"), ..cfg.clone() }).unwrap();
    assert_eq!(sweep.runs.len(), 1);
    assert_eq!(sweep.runs[0].1.records, run.result.records);
    let summary = std::fs::read_to_string(dir.path().join("sweep_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    let costs: Vec<usize> = sweep.costs.iter().map(|c| c.cost).collect();
    assert!(costs.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn strategy_curves_agree_on_weighted_l2() {
    // Product curves of A, B and BET2 stay within a factor 3 at matched mesh sizes.
    let dir = tempfile::tempdir().unwrap();
    let mut curves = Vec::new();
    for strategy in [Marking::A, Marking::B, Marking::Bet2] {
        let cfg = RunConfig { strategy, max_dofs: 20_000, plot: false, ..config(&dir.path().join(strategy.name())) };
        curves.push(execute_run(&cfg).unwrap().result.records);
    }
    let interp = |recs: &[IterationRecord], n: f64| {
        let i = recs.windows(2).position(|w| (w[0].n_elements as f64) <= n && n <= w[1].n_elements as f64).unwrap();
        let (a, b) = (&recs[i], &recs[i + 1]);
        let s = (n.ln() - (a.n_elements as f64).ln()) / ((b.n_elements as f64).ln() - (a.n_elements as f64).ln());
        (a.product.ln() * (1.0 - s) + b.product.ln() * s).exp()
    };
    let n_max = curves.iter().map(|c| c.last().unwrap().n_elements).min().unwrap() as f64;
    let mut n = 200.0;
    while n < n_max {
        let vals: Vec<f64> = curves.iter().map(|c| interp(c, n)).collect();
        let ratio = vals.iter().cloned().fold(0.0, f64::max) / vals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(ratio <= 3.0, "n={n}: {vals:?}");
        n *= 1.5;
    }
}

#[test]
fn cheapest_theta_is_moderate() {
    for kind in [ProblemKind::Convection, ProblemKind::Force] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            problem: kind,
            degree: 2,
            max_dofs: 30_000,
            plot: false,
            cost_quantity: Quantity::Product,
            ..config(dir.path())
        };
        let thetas: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
        let sweep = execute_sweep(&cfg, &thetas).unwrap();
        let tau = sweep.finest_common_tau().unwrap();
        let best = sweep.best_theta(tau).unwrap();
        assert!((0.4..=0.9).contains(&best), "{kind}: best theta {best} at tau {tau:e}");
    }
}
