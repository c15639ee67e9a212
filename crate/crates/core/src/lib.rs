//! Goal-oriented adaptive finite elements for linear elliptic problems on the
//! unit square with quadratic goal functionals.

pub mod benchmarks;
pub mod driver;
pub mod error;
pub mod estimators;
pub mod fem;
pub mod marking;
pub mod mesh;
pub mod quadrature;
pub mod report;

pub use benchmarks::{BenchmarkProblem, GoalDescriptor, ProblemKind};
pub use driver::{cumulative_cost, fit_rate, run_goafem, IterationRecord, Quantity, RunOptions, RunResult, Termination, Window};
pub use error::{Error, Result};
pub use estimators::IndicatorField;
pub use fem::{CoefficientSet, FeSpace, LoadSet};
pub use marking::{MarkedSet, Strategy};
pub use mesh::Mesh;
pub use report::RunConfig;
