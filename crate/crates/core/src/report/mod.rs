//! Configuration, CSV and SVG output, and run orchestration.

pub mod config;
pub mod csv;
pub mod study;
pub mod svg;

pub use config::{parse_thetas, RunConfig};
pub use csv::{parse_records, records_to_string, write_records, ParsedRun, HEADER};
pub use study::{execute_run, execute_sweep, CostRow, RunOutcome, SweepOutcome};
pub use svg::{plot_convergence, PlotOptions, Series};
