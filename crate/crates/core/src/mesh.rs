//! Conforming triangulations of the unit square and newest vertex bisection.
//!
//! Every triangle stores its vertices counterclockwise with the refinement
//! edge between `v[0]` and `v[1]`; the vertex `v[2]` is the newest vertex.
//! Bisection of `(a, b, c)` through the midpoint `m` of `ab` yields the sons
//! `(c, a, m)` and `(b, c, m)`, so the refinement edges of the sons are the
//! two remaining edges of the father.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

const BOUNDARY_TOL: f64 = 1e-12;
const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vertex {
    pub x: f64,
    pub y: f64,
}

impl Vertex {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn point(&self) -> Point {
        [self.x, self.y]
    }

    /// Whether the vertex lies on the boundary of the unit square.
    pub fn on_boundary(&self) -> bool {
        self.x.abs() < BOUNDARY_TOL
            || (self.x - 1.0).abs() < BOUNDARY_TOL
            || self.y.abs() < BOUNDARY_TOL
            || (self.y - 1.0).abs() < BOUNDARY_TOL
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Triangle {
    /// Counterclockwise vertex indices; `v[0]–v[1]` is the refinement edge.
    pub v: [usize; 3],
    /// Number of bisections separating the triangle from its initial ancestor.
    pub generation: u32,
}

/// Unique edges of a mesh together with element/edge incidence.
///
/// Local edge `k` of a triangle joins `v[k]` and `v[(k + 1) % 3]`, so local
/// edge 0 is always the refinement edge.
#[derive(Clone, Debug)]
pub struct EdgeTopology {
    /// Vertex pairs, smaller index first, numbered in order of first
    /// appearance when sweeping elements and their local edges.
    pub edges: Vec<[usize; 2]>,
    pub element_edges: Vec<[usize; 3]>,
    /// Adjacent elements of every edge; the second slot is `None` on ∂Ω.
    pub edge_elements: Vec<[Option<usize>; 2]>,
}

impl EdgeTopology {
    pub fn is_boundary(&self, edge: usize) -> bool {
        self.edge_elements[edge][1].is_none()
    }

    /// The element on the other side of `edge` as seen from `element`.
    pub fn neighbor(&self, edge: usize, element: usize) -> Option<usize> {
        match self.edge_elements[edge] {
            [Some(a), b] if a == element => b,
            [a, Some(b)] if b == element => a,
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    vertices: Vec<Vertex>,
    triangles: Vec<Triangle>,
    boundary_edges: Vec<[usize; 2]>,
}

/// `n × n` grid of squares on (0,1)², each split along its (1,1) diagonal.
///
/// Every line `x = k/n`, `y = k/n` and `x − y = k/n` is a union of edges, and
/// each triangle's refinement edge is its hypotenuse.
pub fn initial_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("initial mesh needs n >= 1".into()));
    }
    let h = 1.0 / n as f64;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            // Pin the far side to exactly 1.0.
            let x = if i == n { 1.0 } else { i as f64 * h };
            let y = if j == n { 1.0 } else { j as f64 * h };
            vertices.push(Vertex::new(x, y));
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (p00, p10) = (idx(i, j), idx(i + 1, j));
            let (p01, p11) = (idx(i, j + 1), idx(i + 1, j + 1));
            triangles.push(Triangle { v: [p11, p00, p10], generation: 0 });
            triangles.push(Triangle { v: [p00, p11, p01], generation: 0 });
        }
    }
    let mut boundary_edges = Vec::with_capacity(4 * n);
    for k in 0..n {
        boundary_edges.push(sorted_pair(idx(k, 0), idx(k + 1, 0)));
        boundary_edges.push(sorted_pair(idx(k, n), idx(k + 1, n)));
        boundary_edges.push(sorted_pair(idx(0, k), idx(0, k + 1)));
        boundary_edges.push(sorted_pair(idx(n, k), idx(n, k + 1)));
    }
    boundary_edges.sort_unstable();
    Ok(Mesh { vertices, triangles, boundary_edges })
}

fn sorted_pair(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

impl Mesh {
    /// Builds a mesh from raw parts, validating orientation and indices.
    ///
    /// Boundary edges are recovered as the edges with a single adjacent
    /// triangle.
    pub fn from_parts(vertices: Vec<Vertex>, triangles: Vec<Triangle>) -> Result<Self> {
        for (t, tri) in triangles.iter().enumerate() {
            for &v in &tri.v {
                if v >= vertices.len() {
                    return Err(Error::IndexOutOfRange { index: v, len: vertices.len() });
                }
            }
            let [a, b, c] = tri.v.map(|v| vertices[v].point());
            if signed_area(a, b, c) <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "triangle {t} is not counterclockwise"
                )));
            }
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::InvalidArgument("non-finite vertex coordinate".into()));
        }
        let mut mesh = Mesh { vertices, triangles, boundary_edges: Vec::new() };
        let topo = mesh.edge_topology();
        mesh.boundary_edges = (0..topo.edges.len())
            .filter(|&e| topo.is_boundary(e))
            .map(|e| topo.edges[e])
            .collect();
        mesh.boundary_edges.sort_unstable();
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    /// Boundary edges as sorted vertex pairs, in ascending order.
    pub fn boundary_edges(&self) -> &[[usize; 2]] {
        &self.boundary_edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn coords(&self, t: usize) -> [Point; 3] {
        self.triangles[t].v.map(|v| self.vertices[v].point())
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.coords(t);
        signed_area(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_elements()).map(|t| self.area(t)).sum()
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.coords(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Diameter of element `t`, i.e. its longest edge.
    pub fn element_diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.coords(t);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        (0..self.n_elements())
            .map(|t| {
                let p = self.coords(t);
                (0..3)
                    .map(|k| angle_at(p[k], p[(k + 1) % 3], p[(k + 2) % 3]))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn edge_topology(&self) -> EdgeTopology {
        let nt = self.triangles.len();
        let mut index: HashMap<[usize; 2], usize> = HashMap::with_capacity(2 * nt + 8);
        let mut edges = Vec::with_capacity(2 * nt + 8);
        let mut edge_elements: Vec<[Option<usize>; 2]> = Vec::with_capacity(2 * nt + 8);
        let mut element_edges = Vec::with_capacity(nt);
        for (t, tri) in self.triangles.iter().enumerate() {
            let mut local = [0; 3];
            for (k, slot) in local.iter_mut().enumerate() {
                let key = sorted_pair(tri.v[k], tri.v[(k + 1) % 3]);
                let e = *index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_elements.push([None, None]);
                    edges.len() - 1
                });
                match &mut edge_elements[e] {
                    [first @ None, _] => *first = Some(t),
                    [_, second @ None] => *second = Some(t),
                    // Three triangles on one edge: left for `check_conforming`.
                    _ => {}
                }
                *slot = e;
            }
            element_edges.push(local);
        }
        EdgeTopology { edges, element_edges, edge_elements }
    }

    /// Verifies conformity by edge/triangle incidence counting: every edge
    /// has two triangles, or one when it lies on ∂Ω. Also checks orientation
    /// and that the triangles cover the unit square.
    pub fn check_conforming(&self) -> std::result::Result<(), String> {
        let mut count: HashMap<[usize; 2], usize> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if self.area(t) <= 0.0 {
                return Err(format!("triangle {t} has non-positive area"));
            }
            for k in 0..3 {
                *count.entry(sorted_pair(tri.v[k], tri.v[(k + 1) % 3])).or_default() += 1;
            }
        }
        let mut boundary = Vec::new();
        for (edge, c) in &count {
            match c {
                2 => {}
                1 => {
                    let [a, b] = edge.map(|v| self.vertices[v]);
                    let on_side = (a.x.abs() < BOUNDARY_TOL && b.x.abs() < BOUNDARY_TOL)
                        || ((a.x - 1.0).abs() < BOUNDARY_TOL && (b.x - 1.0).abs() < BOUNDARY_TOL)
                        || (a.y.abs() < BOUNDARY_TOL && b.y.abs() < BOUNDARY_TOL)
                        || ((a.y - 1.0).abs() < BOUNDARY_TOL && (b.y - 1.0).abs() < BOUNDARY_TOL);
                    if !on_side {
                        return Err(format!("edge {edge:?} has one triangle but is interior"));
                    }
                    boundary.push(*edge);
                }
                _ => return Err(format!("edge {edge:?} is shared by {c} triangles")),
            }
        }
        boundary.sort_unstable();
        if boundary != self.boundary_edges {
            return Err("stored boundary edges disagree with incidence counting".into());
        }
        let area = self.total_area();
        if (area - 1.0).abs() > 1e-12 {
            return Err(format!("triangles cover area {area}, expected 1"));
        }
        Ok(())
    }

    /// Number of triangles of `self` that no longer appear in `fine`.
    pub fn count_refined(&self, fine: &Mesh) -> usize {
        let fine_set: std::collections::HashSet<&Triangle> = fine.triangles.iter().collect();
        self.triangles.iter().filter(|t| !fine_set.contains(t)).count()
    }

    /// Checks that `fine` is a valid refinement of `self` for `marked`:
    /// conforming, area preserving, every marked element refined, and every
    /// refined element replaced by at least two sons.
    pub fn check_refinement(&self, fine: &Mesh, marked: &[usize]) -> std::result::Result<(), String> {
        fine.check_conforming()?;
        if (fine.total_area() - self.total_area()).abs() > 1e-12 {
            return Err(format!("area changed from {} to {}", self.total_area(), fine.total_area()));
        }
        let fine_set: std::collections::HashSet<&Triangle> = fine.triangles.iter().collect();
        if let Some(t) = marked.iter().find(|&&t| fine_set.contains(&self.triangles[t])) {
            return Err(format!("marked element {t} was not refined"));
        }
        let refined = self.count_refined(fine);
        if refined + self.n_elements() > fine.n_elements() {
            return Err(format!(
                "{refined} refined elements but only {} new elements",
                fine.n_elements() - self.n_elements()
            ));
        }
        Ok(())
    }

    /// Coarsest conforming newest-vertex-bisection refinement in which every
    /// marked triangle is bisected at least once.
    pub fn refine_nvb(&self, marked: &[usize]) -> Result<Mesh> {
        let topo = self.edge_topology();
        let mut edge_marked = vec![false; topo.edges.len()];
        let mut stack = Vec::new();
        for &t in marked {
            if t >= self.n_elements() {
                return Err(Error::IndexOutOfRange { index: t, len: self.n_elements() });
            }
            let e = topo.element_edges[t][0];
            if !edge_marked[e] {
                edge_marked[e] = true;
                stack.push(e);
            }
        }
        // Closure: an element with any marked edge gets its refinement edge marked.
        while let Some(e) = stack.pop() {
            for t in topo.edge_elements[e].into_iter().flatten() {
                let r = topo.element_edges[t][0];
                if !edge_marked[r] {
                    edge_marked[r] = true;
                    stack.push(r);
                }
            }
        }
        Ok(self.bisect_marked_edges(&topo, &edge_marked))
    }

    /// Bisects every edge once: each triangle is replaced by four sons.
    pub fn uniform_refine(&self) -> Mesh {
        let topo = self.edge_topology();
        let all = vec![true; topo.edges.len()];
        self.bisect_marked_edges(&topo, &all)
    }

    /// Bisects all edges flagged in `edge_marked`. The flags must be closed:
    /// any triangle with a marked edge has its refinement edge marked.
    fn bisect_marked_edges(&self, topo: &EdgeTopology, edge_marked: &[bool]) -> Mesh {
        let mut vertices = self.vertices.clone();
        let mut midpoint = vec![NONE; topo.edges.len()];
        let mut triangles = self.triangles.clone();
        let mut appended = Vec::new();
        let mut leaves = Vec::with_capacity(4);

        for t in 0..self.triangles.len() {
            let ref_edge = topo.element_edges[t][0];
            if !edge_marked[ref_edge] {
                continue;
            }
            leaves.clear();
            let edges = topo.element_edges[t].map(Some);
            bisect_recursive(
                self.triangles[t],
                edges,
                edge_marked,
                &topo.edges,
                &mut midpoint,
                &mut vertices,
                &mut leaves,
            );
            triangles[t] = leaves[0];
            appended.extend_from_slice(&leaves[1..]);
        }
        triangles.extend(appended);

        let mut boundary_edges = Vec::with_capacity(self.boundary_edges.len() * 2);
        for e in (0..topo.edges.len()).filter(|&e| topo.is_boundary(e)) {
            let [a, b] = topo.edges[e];
            match midpoint[e] {
                NONE => boundary_edges.push([a, b]),
                m => {
                    boundary_edges.push(sorted_pair(a, m));
                    boundary_edges.push(sorted_pair(m, b));
                }
            }
        }
        boundary_edges.sort_unstable();
        Mesh { vertices, triangles, boundary_edges }
    }

    /// Plain-text dump: a header `vertices <n> triangles <m>`, then `x y`
    /// per vertex and `v0 v1 v2 generation` per triangle.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "vertices {} triangles {}", self.n_vertices(), self.n_elements());
        for v in &self.vertices {
            let _ = writeln!(out, "{} {}", v.x, v.y);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "{} {} {} {}", t.v[0], t.v[1], t.v[2], t.generation);
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Mesh> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty mesh dump".into()))?;
        let words: Vec<&str> = header.split_whitespace().collect();
        let (nv, nt) = match words.as_slice() {
            ["vertices", nv, "triangles", nt] => (parse_num::<usize>(nv)?, parse_num::<usize>(nt)?),
            _ => return Err(Error::Parse(format!("bad mesh header `{header}`"))),
        };
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let line = lines.next().ok_or_else(|| Error::Parse("truncated vertex list".into()))?;
            let xy: Vec<f64> = line.split_whitespace().map(parse_num).collect::<Result<_>>()?;
            if xy.len() != 2 {
                return Err(Error::Parse(format!("bad vertex line `{line}`")));
            }
            vertices.push(Vertex::new(xy[0], xy[1]));
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let line = lines.next().ok_or_else(|| Error::Parse("truncated triangle list".into()))?;
            let w: Vec<usize> = line.split_whitespace().map(parse_num).collect::<Result<_>>()?;
            if w.len() != 4 {
                return Err(Error::Parse(format!("bad triangle line `{line}`")));
            }
            triangles.push(Triangle { v: [w[0], w[1], w[2]], generation: w[3] as u32 });
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing data after triangle list".into()));
        }
        Mesh::from_parts(vertices, triangles)
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("cannot parse `{s}`")))
}

#[allow(clippy::too_many_arguments)]
fn bisect_recursive(
    tri: Triangle,
    edges: [Option<usize>; 3],
    edge_marked: &[bool],
    edge_list: &[[usize; 2]],
    midpoint: &mut [usize],
    vertices: &mut Vec<Vertex>,
    leaves: &mut Vec<Triangle>,
) {
    let ref_edge = match edges[0] {
        Some(e) if edge_marked[e] => e,
        _ => {
            leaves.push(tri);
            return;
        }
    };
    if midpoint[ref_edge] == NONE {
        let [p, q] = edge_list[ref_edge];
        let (a, b) = (vertices[p], vertices[q]);
        vertices.push(Vertex::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y)));
        midpoint[ref_edge] = vertices.len() - 1;
    }
    let m = midpoint[ref_edge];
    let [a, b, c] = tri.v;
    let generation = tri.generation + 1;
    let left = Triangle { v: [c, a, m], generation };
    let right = Triangle { v: [b, c, m], generation };
    bisect_recursive(left, [edges[2], None, None], edge_marked, edge_list, midpoint, vertices, leaves);
    bisect_recursive(right, [edges[1], None, None], edge_marked, edge_list, midpoint, vertices, leaves);
}

pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn angle_at(p: Point, q: Point, r: Point) -> f64 {
    let u = [q[0] - p[0], q[1] - p[1]];
    let v = [r[0] - p[0], r[1] - p[1]];
    let cos = (u[0] * v[0] + u[1] * v[1]) / (dist(p, q) * dist(p, r));
    cos.clamp(-1.0, 1.0).acos()
}
