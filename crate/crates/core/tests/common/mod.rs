//! Reference implementations used as test oracles. Nothing here calls the
//! library's quadrature or shape functions.
#![allow(dead_code)]

use std::sync::Arc;

use goafem::fem::FeSpace;
use goafem::mesh::{Mesh, Point, Triangle, Vertex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Five-point Gauss-Legendre rule on [0, 1].
const GAUSS5_X: [f64; 5] = [
    0.046_910_077_030_668_004,
    0.230_765_344_947_158_45,
    0.5,
    0.769_234_655_052_841_6,
    0.953_089_922_969_332,
];
const GAUSS5_W: [f64; 5] = [
    0.118_463_442_528_094_54,
    0.239_314_335_249_683_23,
    0.284_444_444_444_444_45,
    0.239_314_335_249_683_23,
    0.118_463_442_528_094_54,
];

pub fn gauss01() -> impl Iterator<Item = (f64, f64)> {
    GAUSS5_X.into_iter().zip(GAUSS5_W)
}

/// Collapsed tensor rule on the triangle `v`: points and weights with
/// `∫_T f ≈ Σ w f(x)` (weights include the area). Exact to degree 8.
pub fn triangle_points(v: [Point; 3]) -> Vec<(Point, f64)> {
    let area = 0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1])).abs();
    let mut out = Vec::with_capacity(25);
    for (s, ws) in gauss01() {
        for (t, wt) in gauss01() {
            let l1 = s * (1.0 - t);
            let l2 = t;
            let l0 = 1.0 - l1 - l2;
            let x = [
                l0 * v[0][0] + l1 * v[1][0] + l2 * v[2][0],
                l0 * v[0][1] + l1 * v[1][1] + l2 * v[2][1],
            ];
            out.push((x, 2.0 * area * ws * wt * (1.0 - t)));
        }
    }
    out
}

/// Polynomial of total degree ≤ 2 in shifted, scaled coordinates.
#[derive(Clone, Debug)]
pub struct LocalPoly {
    origin: Point,
    scale: f64,
    degree: usize,
    /// Coefficients of 1, ξ, η, ξ², ξη, η².
    c: [f64; 6],
}

fn monomials(degree: usize) -> usize {
    if degree == 1 { 3 } else { 6 }
}

impl LocalPoly {
    fn local(&self, x: Point) -> (f64, f64) {
        ((x[0] - self.origin[0]) / self.scale, (x[1] - self.origin[1]) / self.scale)
    }

    pub fn value(&self, x: Point) -> f64 {
        let (s, t) = self.local(x);
        let c = &self.c;
        c[0] + c[1] * s + c[2] * t + c[3] * s * s + c[4] * s * t + c[5] * t * t
    }

    pub fn grad(&self, x: Point) -> [f64; 2] {
        let (s, t) = self.local(x);
        let c = &self.c;
        [(c[1] + 2.0 * c[3] * s + c[4] * t) / self.scale, (c[2] + c[4] * s + 2.0 * c[5] * t) / self.scale]
    }

    pub fn hess(&self) -> [[f64; 2]; 2] {
        let h2 = self.scale * self.scale;
        let c = &self.c;
        [[2.0 * c[3] / h2, c[4] / h2], [c[4] / h2, 2.0 * c[5] / h2]]
    }
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, piv);
        b.swap(k, piv);
        assert!(a[k][k].abs() > 1e-14, "singular Vandermonde matrix");
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

/// Unique polynomial of degree `degree` taking `values` at `nodes`.
pub fn interpolant(nodes: &[Point], values: &[f64], degree: usize) -> LocalPoly {
    let m = monomials(degree);
    assert_eq!(nodes.len(), m);
    let origin = nodes[0];
    let scale = nodes
        .iter()
        .flat_map(|a| nodes.iter().map(move |b| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()))
        .fold(0.0, f64::max);
    let probe = LocalPoly { origin, scale, degree, c: [0.0; 6] };
    let rows: Vec<Vec<f64>> = nodes
        .iter()
        .map(|&x| {
            let (s, t) = probe.local(x);
            [1.0, s, t, s * s, s * t, t * t][..m].to_vec()
        })
        .collect();
    let sol = solve_dense(rows, values.to_vec());
    let mut c = [0.0; 6];
    c[..m].copy_from_slice(&sol);
    LocalPoly { origin, scale, degree, c }
}

/// Lagrange basis on the given nodes, in node order.
pub fn lagrange_basis(nodes: &[Point], degree: usize) -> Vec<LocalPoly> {
    (0..nodes.len())
        .map(|i| {
            let mut e = vec![0.0; nodes.len()];
            e[i] = 1.0;
            interpolant(nodes, &e, degree)
        })
        .collect()
}

/// Coordinates of the local dofs of element `t`.
pub fn element_nodes(space: &FeSpace, t: usize) -> Vec<Point> {
    space.element_dofs(t).iter().map(|&d| space.dof_coords()[d]).collect()
}

/// Restriction of a discrete function to element `t` as a polynomial.
pub fn local_function(space: &FeSpace, t: usize, u: &[f64]) -> LocalPoly {
    let dofs = space.element_dofs(t);
    let values: Vec<f64> = dofs.iter().map(|&d| u[d]).collect();
    interpolant(&element_nodes(space, t), &values, space.degree())
}

fn barycentric(v: [Point; 3], x: Point) -> [f64; 3] {
    let det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
    let l1 = ((x[0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (x[1] - v[0][1])) / det;
    let l2 = ((v[1][0] - v[0][0]) * (x[1] - v[0][1]) - (x[0] - v[0][0]) * (v[1][1] - v[0][1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

/// Interpolates a coarse discrete function into a finer nested space by
/// locating every fine dof in the coarse mesh.
pub fn prolongate(coarse: &FeSpace, u: &[f64], fine: &FeSpace) -> Vec<f64> {
    let mesh = coarse.mesh();
    let locals: Vec<LocalPoly> = (0..mesh.n_elements()).map(|t| local_function(coarse, t, u)).collect();
    fine.dof_coords()
        .iter()
        .map(|&x| {
            let t = (0..mesh.n_elements())
                .find(|&t| barycentric(mesh.coords(t), x).iter().all(|&l| l >= -1e-12))
                .expect("fine dof outside the coarse mesh");
            locals[t].value(x)
        })
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn min_angle(v: [Point; 3]) -> f64 {
    (0..3)
        .map(|k| {
            let (a, b, c) = (v[k], v[(k + 1) % 3], v[(k + 2) % 3]);
            let u = [b[0] - a[0], b[1] - a[1]];
            let w = [c[0] - a[0], c[1] - a[1]];
            let cos = (u[0] * w[0] + u[1] * w[1]) / ((u[0] * u[0] + u[1] * u[1]).sqrt() * (w[0] * w[0] + w[1] * w[1]).sqrt());
            cos.clamp(-1.0, 1.0).acos()
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn random_triangle(rng: &mut ChaCha8Rng) -> [Point; 3] {
    loop {
        let mut v: [Point; 3] = std::array::from_fn(|_| [rng.random_range(0.05..0.95), rng.random_range(0.05..0.95)]);
        let det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
        if det < 0.0 {
            v.swap(1, 2);
        }
        if det.abs() > 0.01 && min_angle(v) > 0.25 {
            return v;
        }
    }
}

pub fn single_element_space(v: [Point; 3], p: usize) -> FeSpace {
    let mesh = Mesh::from_parts(
        v.iter().map(|x| Vertex::new(x[0], x[1])).collect(),
        vec![Triangle { v: [0, 1, 2], generation: 0 }],
    )
    .unwrap();
    FeSpace::new(Arc::new(mesh), p).unwrap()
}

pub fn random_coefficients(rng: &mut ChaCha8Rng) -> ([[f64; 2]; 2], [f64; 2], f64) {
    let l = [[rng.random_range(0.5..2.0), 0.0], [rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0)]];
    let a01 = l[0][0] * l[1][0];
    let a = [[l[0][0] * l[0][0], a01], [a01, l[1][0] * l[1][0] + l[1][1] * l[1][1]]];
    let b = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
    (a, b, rng.random_range(0.0..2.0))
}

pub fn oracle_local_matrix(nodes: &[Point], v: [Point; 3], p: usize, a: [[f64; 2]; 2], b: [f64; 2], c: f64) -> Vec<Vec<f64>> {
    let basis = lagrange_basis(nodes, p);
    let n = basis.len();
    let mut k = vec![vec![0.0; n]; n];
    for (x, w) in triangle_points(v) {
        for i in 0..n {
            let (pi, gi) = (basis[i].value(x), basis[i].grad(x));
            for j in 0..n {
                let (pj, gj) = (basis[j].value(x), basis[j].grad(x));
                let agj = [a[0][0] * gj[0] + a[0][1] * gj[1], a[1][0] * gj[0] + a[1][1] * gj[1]];
                k[i][j] += w * (agj[0] * gi[0] + agj[1] * gi[1] + (b[0] * gj[0] + b[1] * gj[1]) * pi + c * pj * pi);
            }
        }
    }
    k
}
