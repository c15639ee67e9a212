//! Coefficient and load fields.
//!
//! Fields are closures of a [`Site`]. Besides the evaluation point a site
//! carries the centroid of the element the evaluation belongs to, so fields
//! that jump across initial-mesh edges can be classified by element. This
//! gives one-sided traces on edges without geometric tolerances.

use std::sync::Arc;

use crate::mesh::Point;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Site {
    pub x: Point,
    /// Centroid of the element hosting `x`.
    pub cell: Point,
}

impl Site {
    pub fn interior(x: Point) -> Self {
        Site { x, cell: x }
    }
}

pub type ScalarField = Arc<dyn Fn(Site) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(Site) -> [f64; 2] + Send + Sync>;
pub type MatrixField = Arc<dyn Fn(Site) -> [[f64; 2]; 2] + Send + Sync>;

pub fn constant_scalar(c: f64) -> ScalarField {
    Arc::new(move |_| c)
}

pub fn constant_vector(c: [f64; 2]) -> VectorField {
    Arc::new(move |_| c)
}

pub fn constant_matrix(c: [[f64; 2]; 2]) -> MatrixField {
    Arc::new(move |_| c)
}

/// Coefficients of `a(u, v) = ∫ A∇u·∇v + ∫ (b·∇u) v + ∫ c u v`.
#[derive(Clone)]
pub struct CoefficientSet {
    pub diffusion: MatrixField,
    /// Row-wise divergence of `A`, i.e. `(Σ_j ∂_j A_ij)_i`.
    pub diffusion_div: VectorField,
    pub convection: VectorField,
    pub convection_div: ScalarField,
    pub reaction: ScalarField,
    /// Lower bound required for the smallest eigenvalue of `A`.
    pub ellipticity: f64,
}

impl CoefficientSet {
    /// `A = I`, `b = 0`, `c = 0`.
    pub fn laplace() -> Self {
        Self::constant([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0], 0.0)
    }

    pub fn constant(a: [[f64; 2]; 2], b: [f64; 2], c: f64) -> Self {
        CoefficientSet {
            diffusion: constant_matrix(a),
            diffusion_div: constant_vector([0.0, 0.0]),
            convection: constant_vector(b),
            convection_div: constant_scalar(0.0),
            reaction: constant_scalar(c),
            ellipticity: 1e-12,
        }
    }
}

/// Smallest eigenvalue of a symmetric 2×2 matrix.
pub fn min_eigenvalue(a: [[f64; 2]; 2]) -> f64 {
    let mean = 0.5 * (a[0][0] + a[1][1]);
    let half_diff = 0.5 * (a[0][0] - a[1][1]);
    let off = 0.5 * (a[0][1] + a[1][0]);
    mean - (half_diff * half_diff + off * off).sqrt()
}

/// Pointwise data of a right-hand side `v ↦ ∫ g v − ∫ gvec·∇v`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SourceValue {
    pub g: f64,
    pub gvec: [f64; 2],
    /// `div gvec`, needed by the volume residual.
    pub gvec_div: f64,
}

/// A right-hand side in the form `∫ g v − ∫ gvec·∇v`, evaluated per element.
///
/// The element index lets sources depend on a discrete function, as the
/// linearized dual data `g[w]`, `gvec[w]` do.
pub trait Source: Sync {
    fn eval(&self, element: usize, site: Site) -> SourceValue;
}

impl<F> Source for F
where
    F: Fn(usize, Site) -> SourceValue + Sync,
{
    fn eval(&self, element: usize, site: Site) -> SourceValue {
        self(element, site)
    }
}

/// Primal loads `f` and `fvec` of `F(v) = ∫ f v − ∫ fvec·∇v`.
#[derive(Clone)]
pub struct LoadSet {
    pub f: ScalarField,
    pub fvec: VectorField,
    pub fvec_div: ScalarField,
}

impl LoadSet {
    pub fn zero() -> Self {
        LoadSet {
            f: constant_scalar(0.0),
            fvec: constant_vector([0.0, 0.0]),
            fvec_div: constant_scalar(0.0),
        }
    }

    /// Scalar load only; `fvec = 0`.
    pub fn scalar(f: ScalarField) -> Self {
        LoadSet { f, ..Self::zero() }
    }
}

impl Source for LoadSet {
    fn eval(&self, _element: usize, site: Site) -> SourceValue {
        SourceValue { g: (self.f)(site), gvec: (self.fvec)(site), gvec_div: (self.fvec_div)(site) }
    }
}
