//! Lagrange finite elements: spaces, assembly, solves and norms.

pub mod assembly;
pub mod element;
pub mod fields;
pub mod norms;
pub mod solve;
pub mod space;
pub mod sparse;

pub use assembly::{assemble_bilinear, assemble_dual_rhs, assemble_primal_rhs, assemble_source};
pub use element::{ElementGeometry, Jet};
pub use fields::{CoefficientSet, LoadSet, Site, Source, SourceValue};
pub use norms::{energy_norm, energy_norm_error};
pub use solve::{solve_dual, solve_primal, FactoredSystem};
pub use space::FeSpace;
pub use sparse::CsrMatrix;
