//! Residual refinement indicators for the primal and the linearized dual
//! problem.
//!
//! For a discrete `v` with flux `σ = A∇v + F`, the squared indicator of `T` is
//!
//! ```text
//! h_T² ‖R(v)‖²_{L²(T)} + h_T ‖[σ·n]‖²_{L²(∂T∩Ω)}
//! ```
//!
//! with `h_T = diam(T)`. The primal residual is
//! `R = −div σ + b·∇v + c v − f` with `F = fvec`; the dual residual is
//! `R = −div σ − b·∇v + (c − div b) v − g` with `F = gvec`. Each interior
//! edge jump is charged in full to both neighbors.

use rayon::prelude::*;

use crate::error::Result;
use crate::fem::element::ElementGeometry;
use crate::fem::fields::{CoefficientSet, Site, Source};
use crate::fem::space::FeSpace;
use crate::quadrature::{LineRule, TriangleRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    Primal,
    Dual,
}

/// Squared indicators `η(T)²` and `ζ(T)²` on one mesh level.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IndicatorField {
    pub eta_sq: Vec<f64>,
    pub zeta_sq: Vec<f64>,
}

impl IndicatorField {
    pub fn eta_total_sq(&self) -> f64 {
        self.eta_sq.iter().sum()
    }

    pub fn zeta_total_sq(&self) -> f64 {
        self.zeta_sq.iter().sum()
    }

    pub fn eta(&self) -> f64 {
        self.eta_total_sq().sqrt()
    }

    pub fn zeta(&self) -> f64 {
        self.zeta_total_sq().sqrt()
    }
}

/// `η(T, u_h)²` for every element.
pub fn eta_indicators(space: &FeSpace, u_h: &[f64], coeffs: &CoefficientSet, loads: &dyn Source) -> Result<Vec<f64>> {
    residual_indicators(space, u_h, coeffs, loads, Problem::Primal)
}

/// `ζ(T, z_h)²` for every element, with dual data linearized at the current
/// primal solution.
pub fn zeta_indicators(space: &FeSpace, z_h: &[f64], coeffs: &CoefficientSet, dual: &dyn Source) -> Result<Vec<f64>> {
    residual_indicators(space, z_h, coeffs, dual, Problem::Dual)
}

pub fn residual_indicators(
    space: &FeSpace,
    v: &[f64],
    coeffs: &CoefficientSet,
    source: &dyn Source,
    problem: Problem,
) -> Result<Vec<f64>> {
    space.check_len(v)?;
    let n = space.mesh().n_elements();
    Ok((0..n)
        .into_par_iter()
        .map(|t| volume_term(space, t, v, coeffs, source, problem) + jump_term(space, t, v, coeffs, source))
        .collect())
}

fn volume_term(
    space: &FeSpace,
    t: usize,
    v: &[f64],
    coeffs: &CoefficientSet,
    source: &dyn Source,
    problem: Problem,
) -> f64 {
    let p = space.degree();
    let rule = TriangleRule::for_degree((2 * p + 2).max(5));
    let geo = space.geometry(t);
    let cell = geo.centroid();
    let c = space.local_coeffs(t, v);
    let h = space.mesh().element_diameter(t);
    let mut sum = 0.0;
    for (lam, w) in rule.points.iter().zip(&rule.weights) {
        let site = Site { x: geo.point(*lam), cell };
        let jet = geo.jet(p, &c, *lam);
        let s = source.eval(t, site);
        let a = (coeffs.diffusion)(site);
        let div_a = (coeffs.diffusion_div)(site);
        let b = (coeffs.convection)(site);
        let react = (coeffs.reaction)(site);
        let div_flux = a[0][0] * jet.hess[0][0]
            + a[0][1] * jet.hess[0][1]
            + a[1][0] * jet.hess[1][0]
            + a[1][1] * jet.hess[1][1]
            + div_a[0] * jet.grad[0]
            + div_a[1] * jet.grad[1]
            + s.gvec_div;
        let b_grad = b[0] * jet.grad[0] + b[1] * jet.grad[1];
        let r = match problem {
            Problem::Primal => -div_flux + b_grad + react * jet.value - s.g,
            Problem::Dual => {
                let div_b = (coeffs.convection_div)(site);
                -div_flux - b_grad + (react - div_b) * jet.value - s.g
            }
        };
        sum += w * r * r;
    }
    h * h * geo.area * sum
}

fn flux(space: &FeSpace, t: usize, geo: &ElementGeometry, v: &[f64], coeffs: &CoefficientSet, source: &dyn Source, x: [f64; 2]) -> [f64; 2] {
    let site = Site { x, cell: geo.centroid() };
    let jet = geo.jet(space.degree(), &space.local_coeffs(t, v), geo.barycentric(x));
    let a = (coeffs.diffusion)(site);
    let s = source.eval(t, site);
    [
        a[0][0] * jet.grad[0] + a[0][1] * jet.grad[1] + s.gvec[0],
        a[1][0] * jet.grad[0] + a[1][1] * jet.grad[1] + s.gvec[1],
    ]
}

fn jump_term(space: &FeSpace, t: usize, v: &[f64], coeffs: &CoefficientSet, source: &dyn Source) -> f64 {
    let topo = space.topology();
    let rule = LineRule::gauss(space.degree() + 2);
    let geo = space.geometry(t);
    let h = space.mesh().element_diameter(t);
    let mut sum = 0.0;
    for k in 0..3 {
        let e = topo.element_edges[t][k];
        let Some(other) = topo.neighbor(e, t) else { continue };
        let other_geo = space.geometry(other);
        let (pa, pb) = (geo.vertices[k], geo.vertices[(k + 1) % 3]);
        let d = [pb[0] - pa[0], pb[1] - pa[1]];
        let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let normal = [d[1] / len, -d[0] / len];
        let mut edge_sum = 0.0;
        for (s, w) in rule.points.iter().zip(&rule.weights) {
            let x = [pa[0] + s * d[0], pa[1] + s * d[1]];
            let inner = flux(space, t, &geo, v, coeffs, source, x);
            let outer = flux(space, other, &other_geo, v, coeffs, source, x);
            let jump = (inner[0] - outer[0]) * normal[0] + (inner[1] - outer[1]) * normal[1];
            edge_sum += w * jump * jump;
        }
        sum += len * edge_sum;
    }
    h * sum
}
