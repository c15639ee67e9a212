//! Affine element geometry and the P1/P2 Lagrange shape functions.
//!
//! Shape functions are written in barycentric coordinates `λ`. Local dofs are
//! the three vertices followed, for `p = 2`, by the midpoints of the local
//! edges `(v0,v1)`, `(v1,v2)`, `(v2,v0)`.

use crate::mesh::{Mesh, Point};

pub const MAX_LOCAL_DOFS: usize = 6;

pub fn local_dofs(p: usize) -> usize {
    if p == 1 {
        3
    } else {
        6
    }
}

/// Value, gradient and Hessian of a discrete function at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

impl Jet {
    pub fn laplacian(&self) -> f64 {
        self.hess[0][0] + self.hess[1][1]
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ElementGeometry {
    pub vertices: [Point; 3],
    pub area: f64,
    pub grad_lambda: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn new(vertices: [Point; 3]) -> Self {
        let [p0, p1, p2] = vertices;
        let (a, b) = (p1[0] - p0[0], p2[0] - p0[0]);
        let (c, d) = (p1[1] - p0[1], p2[1] - p0[1]);
        let det = a * d - b * c;
        let g1 = [d / det, -b / det];
        let g2 = [-c / det, a / det];
        let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
        ElementGeometry { vertices, area: 0.5 * det, grad_lambda: [g0, g1, g2] }
    }

    pub fn of(mesh: &Mesh, t: usize) -> Self {
        Self::new(mesh.coords(t))
    }

    pub fn point(&self, lambda: [f64; 3]) -> Point {
        let [p0, p1, p2] = self.vertices;
        [
            lambda[0] * p0[0] + lambda[1] * p1[0] + lambda[2] * p2[0],
            lambda[0] * p0[1] + lambda[1] * p1[1] + lambda[2] * p2[1],
        ]
    }

    /// Barycentric coordinates of a physical point.
    pub fn barycentric(&self, x: Point) -> [f64; 3] {
        let p0 = self.vertices[0];
        let d = [x[0] - p0[0], x[1] - p0[1]];
        let l1 = self.grad_lambda[1][0] * d[0] + self.grad_lambda[1][1] * d[1];
        let l2 = self.grad_lambda[2][0] * d[0] + self.grad_lambda[2][1] * d[1];
        [1.0 - l1 - l2, l1, l2]
    }

    pub fn centroid(&self) -> Point {
        self.point([1.0 / 3.0; 3])
    }

    /// Physical gradients of the local shape functions at `lambda`.
    pub fn shape_grads(&self, p: usize, lambda: [f64; 3]) -> [[f64; 2]; MAX_LOCAL_DOFS] {
        let dl = shape_dlambda(p, lambda);
        let mut out = [[0.0; 2]; MAX_LOCAL_DOFS];
        for (k, row) in dl.iter().enumerate().take(local_dofs(p)) {
            for (i, g) in self.grad_lambda.iter().enumerate() {
                out[k][0] += row[i] * g[0];
                out[k][1] += row[i] * g[1];
            }
        }
        out
    }

    /// Jet of `Σ_k coeffs[k] φ_k` at `lambda`.
    pub fn jet(&self, p: usize, coeffs: &[f64], lambda: [f64; 3]) -> Jet {
        let values = shape_values(p, lambda);
        let grads = self.shape_grads(p, lambda);
        let mut jet = Jet::default();
        for k in 0..local_dofs(p) {
            jet.value += coeffs[k] * values[k];
            jet.grad[0] += coeffs[k] * grads[k][0];
            jet.grad[1] += coeffs[k] * grads[k][1];
        }
        if p == 2 {
            jet.hess = self.p2_hessian(coeffs);
        }
        jet
    }

    /// Constant Hessian of a local P2 function.
    fn p2_hessian(&self, coeffs: &[f64]) -> [[f64; 2]; 2] {
        // Second λ-derivatives: ∂²φ_i/∂λ_i² = 4 for vertices; ∂²φ/∂λ_k∂λ_{k+1} = 4 for edges.
        let mut h_lambda = [[0.0; 3]; 3];
        for i in 0..3 {
            h_lambda[i][i] += 4.0 * coeffs[i];
            let j = (i + 1) % 3;
            h_lambda[i][j] += 4.0 * coeffs[3 + i];
            h_lambda[j][i] += 4.0 * coeffs[3 + i];
        }
        let g = &self.grad_lambda;
        let mut h = [[0.0; 2]; 2];
        for i in 0..3 {
            for j in 0..3 {
                let s = h_lambda[i][j];
                if s == 0.0 {
                    continue;
                }
                for r in 0..2 {
                    for c in 0..2 {
                        h[r][c] += s * g[i][r] * g[j][c];
                    }
                }
            }
        }
        h
    }
}

pub fn shape_values(p: usize, l: [f64; 3]) -> [f64; MAX_LOCAL_DOFS] {
    if p == 1 {
        [l[0], l[1], l[2], 0.0, 0.0, 0.0]
    } else {
        [
            l[0] * (2.0 * l[0] - 1.0),
            l[1] * (2.0 * l[1] - 1.0),
            l[2] * (2.0 * l[2] - 1.0),
            4.0 * l[0] * l[1],
            4.0 * l[1] * l[2],
            4.0 * l[2] * l[0],
        ]
    }
}

/// `∂φ_k/∂λ_i` for every local shape function `k`.
pub fn shape_dlambda(p: usize, l: [f64; 3]) -> [[f64; 3]; MAX_LOCAL_DOFS] {
    let mut d = [[0.0; 3]; MAX_LOCAL_DOFS];
    if p == 1 {
        d[0][0] = 1.0;
        d[1][1] = 1.0;
        d[2][2] = 1.0;
        return d;
    }
    for i in 0..3 {
        d[i][i] = 4.0 * l[i] - 1.0;
        let j = (i + 1) % 3;
        d[3 + i][i] = 4.0 * l[j];
        d[3 + i][j] = 4.0 * l[i];
    }
    d
}
