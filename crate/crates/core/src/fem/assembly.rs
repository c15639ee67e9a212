//! Element-wise assembly of the bilinear form and of right-hand sides.
//!
//! Local contributions are computed in parallel and scattered sequentially in
//! element order, so repeated runs produce bit-identical systems.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::element::{shape_values, MAX_LOCAL_DOFS};
use crate::fem::fields::{min_eigenvalue, CoefficientSet, Site, Source};
use crate::fem::space::FeSpace;
use crate::fem::sparse::CsrMatrix;
use crate::quadrature::TriangleRule;

pub type LocalMatrix = [[f64; MAX_LOCAL_DOFS]; MAX_LOCAL_DOFS];
pub type LocalVector = [f64; MAX_LOCAL_DOFS];

/// Quadrature for assembly: the 7-point rule, or degree `2p + 2` if higher.
pub fn assembly_rule(p: usize) -> &'static TriangleRule {
    TriangleRule::for_degree((2 * p + 2).max(5))
}

/// Local matrix `K[i][j] = a(φ_j, φ_i)` on element `t`.
pub fn local_bilinear(space: &FeSpace, t: usize, coeffs: &CoefficientSet) -> Result<LocalMatrix> {
    let p = space.degree();
    let nl = space.n_local();
    let geo = space.geometry(t);
    let cell = geo.centroid();
    let rule = assembly_rule(p);
    let mut k = [[0.0; MAX_LOCAL_DOFS]; MAX_LOCAL_DOFS];
    for (lam, w) in rule.points.iter().zip(&rule.weights) {
        let site = Site { x: geo.point(*lam), cell };
        let a = (coeffs.diffusion)(site);
        let lmin = min_eigenvalue(a);
        if !(lmin >= coeffs.ellipticity) || a[0][1] != a[1][0] {
            return Err(Error::Config(format!(
                "diffusion coefficient not symmetric positive definite at {:?} (smallest eigenvalue {lmin})",
                site.x
            )));
        }
        let b = (coeffs.convection)(site);
        let c = (coeffs.reaction)(site);
        let phi = shape_values(p, *lam);
        let grad = geo.shape_grads(p, *lam);
        let scale = w * geo.area;
        for j in 0..nl {
            let agj = [
                a[0][0] * grad[j][0] + a[0][1] * grad[j][1],
                a[1][0] * grad[j][0] + a[1][1] * grad[j][1],
            ];
            let bgj = b[0] * grad[j][0] + b[1] * grad[j][1];
            for i in 0..nl {
                let val = agj[0] * grad[i][0] + agj[1] * grad[i][1] + bgj * phi[i] + c * phi[j] * phi[i];
                k[i][j] += scale * val;
            }
        }
    }
    Ok(k)
}

/// Local load vector `r[i] = ∫ g φ_i − ∫ gvec·∇φ_i` on element `t`.
pub fn local_source(space: &FeSpace, t: usize, source: &dyn Source) -> LocalVector {
    let p = space.degree();
    let nl = space.n_local();
    let geo = space.geometry(t);
    let cell = geo.centroid();
    let rule = assembly_rule(p);
    let mut r = [0.0; MAX_LOCAL_DOFS];
    for (lam, w) in rule.points.iter().zip(&rule.weights) {
        let s = source.eval(t, Site { x: geo.point(*lam), cell });
        let phi = shape_values(p, *lam);
        let grad = geo.shape_grads(p, *lam);
        let scale = w * geo.area;
        for i in 0..nl {
            r[i] += scale * (s.g * phi[i] - s.gvec[0] * grad[i][0] - s.gvec[1] * grad[i][1]);
        }
    }
    r
}

/// Global matrix `M[i][j] = a(φ_j, φ_i)` over all dofs, Dirichlet dofs included.
pub fn assemble_bilinear(space: &FeSpace, coeffs: &CoefficientSet) -> Result<CsrMatrix> {
    let n = space.mesh().n_elements();
    let locals: Vec<LocalMatrix> = (0..n)
        .into_par_iter()
        .map(|t| local_bilinear(space, t, coeffs))
        .collect::<Result<_>>()?;
    let nl = space.n_local();
    let mut triplets = Vec::with_capacity(n * nl * nl);
    for (t, k) in locals.iter().enumerate() {
        let dofs = space.element_dofs(t);
        for i in 0..nl {
            for j in 0..nl {
                triplets.push((dofs[i], dofs[j], k[i][j]));
            }
        }
    }
    CsrMatrix::from_triplets(space.n_dofs(), space.n_dofs(), &triplets)
}

/// Assembles `v ↦ ∫ g v − ∫ gvec·∇v` against every basis function.
pub fn assemble_source(space: &FeSpace, source: &dyn Source) -> Vec<f64> {
    let n = space.mesh().n_elements();
    let locals: Vec<LocalVector> = (0..n).into_par_iter().map(|t| local_source(space, t, source)).collect();
    let mut rhs = vec![0.0; space.n_dofs()];
    for (t, r) in locals.iter().enumerate() {
        for (k, &d) in space.element_dofs(t).iter().enumerate() {
            rhs[d] += r[k];
        }
    }
    rhs
}

/// `F(φ_i) = ∫ f φ_i − ∫ fvec·∇φ_i`.
pub fn assemble_primal_rhs(space: &FeSpace, loads: &crate::fem::fields::LoadSet) -> Vec<f64> {
    assemble_source(space, loads)
}

/// `∫ g φ_i − ∫ gvec·∇φ_i` for dual data produced by a goal functional.
pub fn assemble_dual_rhs(space: &FeSpace, dual: &dyn Source) -> Vec<f64> {
    assemble_source(space, dual)
}
