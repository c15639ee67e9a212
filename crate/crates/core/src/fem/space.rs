use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::element::{local_dofs, ElementGeometry, Jet, MAX_LOCAL_DOFS};
use crate::mesh::{EdgeTopology, Mesh, Point};

/// Continuous P1 or P2 Lagrange space on a mesh, with homogeneous Dirichlet
/// dofs flagged.
///
/// Dofs are numbered vertices first, then (for `p = 2`) edge midpoints in the
/// order of [`EdgeTopology::edges`].
#[derive(Clone, Debug)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    topology: EdgeTopology,
    degree: usize,
    dof_coords: Vec<Point>,
    element_dofs: Vec<[usize; MAX_LOCAL_DOFS]>,
    dirichlet: Vec<bool>,
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Result<Self> {
        if !(1..=2).contains(&degree) {
            return Err(Error::InvalidArgument(format!(
                "polynomial degree must be 1 or 2, got {degree}"
            )));
        }
        let topology = mesh.edge_topology();
        let nv = mesh.n_vertices();
        let mut dof_coords: Vec<Point> = mesh.vertices().iter().map(|v| v.point()).collect();
        let mut dirichlet: Vec<bool> = mesh.vertices().iter().map(|v| v.on_boundary()).collect();
        if degree == 2 {
            for (e, &[a, b]) in topology.edges.iter().enumerate() {
                let (pa, pb) = (dof_coords[a], dof_coords[b]);
                dof_coords.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                dirichlet.push(topology.is_boundary(e));
            }
        }
        let element_dofs = mesh
            .triangles()
            .iter()
            .zip(&topology.element_edges)
            .map(|(tri, edges)| {
                let mut d = [usize::MAX; MAX_LOCAL_DOFS];
                d[..3].copy_from_slice(&tri.v);
                if degree == 2 {
                    for k in 0..3 {
                        d[3 + k] = nv + edges[k];
                    }
                }
                d
            })
            .collect();
        Ok(FeSpace { mesh, topology, degree, dof_coords, element_dofs, dirichlet })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn topology(&self) -> &EdgeTopology {
        &self.topology
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_coords.len()
    }

    pub fn n_free(&self) -> usize {
        self.dirichlet.iter().filter(|&&d| !d).count()
    }

    pub fn n_local(&self) -> usize {
        local_dofs(self.degree)
    }

    pub fn dof_coords(&self) -> &[Point] {
        &self.dof_coords
    }

    pub fn dirichlet_mask(&self) -> &[bool] {
        &self.dirichlet
    }

    pub fn element_dofs(&self, t: usize) -> &[usize] {
        &self.element_dofs[t][..self.n_local()]
    }

    pub fn geometry(&self, t: usize) -> ElementGeometry {
        ElementGeometry::of(&self.mesh, t)
    }

    /// Local coefficients of the global vector `u` on element `t`.
    pub fn local_coeffs(&self, t: usize, u: &[f64]) -> [f64; MAX_LOCAL_DOFS] {
        let mut c = [0.0; MAX_LOCAL_DOFS];
        for (k, &d) in self.element_dofs(t).iter().enumerate() {
            c[k] = u[d];
        }
        c
    }

    /// Jet of the discrete function `u` restricted to element `t`, evaluated
    /// at the physical point `x` (which may lie on the element boundary).
    pub fn jet_at(&self, t: usize, u: &[f64], x: Point) -> Jet {
        let geo = self.geometry(t);
        geo.jet(self.degree, &self.local_coeffs(t, u), geo.barycentric(x))
    }

    /// Nodal interpolant of a continuous function; Dirichlet dofs set to 0.
    pub fn interpolate(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        self.dof_coords
            .iter()
            .zip(&self.dirichlet)
            .map(|(&x, &fixed)| if fixed { 0.0 } else { f(x) })
            .collect()
    }

    pub fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.n_dofs() {
            return Err(Error::LengthMismatch { expected: self.n_dofs(), actual: v.len() });
        }
        Ok(())
    }
}
