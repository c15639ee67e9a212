//! Benchmark problems on the unit square with `A = I`, `b = 0`, `c = 0` and
//! quadratic goal functionals `G(w) = b(w, w)`.
//!
//! Each goal carries the generator of its linearized dual data: for a
//! discrete `w` the functional `v ↦ b(v, w) + b(w, v)` is returned in the form
//! `∫ g[w] v − ∫ gvec[w]·∇v`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::element::{ElementGeometry, Jet};
use crate::fem::fields::{constant_scalar, CoefficientSet, LoadSet, Site, Source, SourceValue};
use crate::fem::space::FeSpace;
use crate::mesh::{initial_mesh, Mesh, Point};
use crate::quadrature::TriangleRule;

/// `∫_{(1/4,3/4)²} (xy(1−x)(1−y))² dx`.
pub const WEIGHTED_L2_EXACT_GOAL: f64 = 41209.0 / 58982400.0;

/// Unit vector `(1, 1)/√2` of the force goal.
pub const FORCE_DIRECTION: [f64; 2] = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    WeightedL2,
    Convection,
    Force,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 3] = [ProblemKind::WeightedL2, ProblemKind::Convection, ProblemKind::Force];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::WeightedL2 => "weighted_l2",
            ProblemKind::Convection => "convection",
            ProblemKind::Force => "force",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown problem {s:?}; expected weighted_l2, convection or force")))
    }
}

/// Open square `(1/4, 3/4)²`.
pub fn in_u1(x: Point) -> bool {
    x[0] > 0.25 && x[0] < 0.75 && x[1] > 0.25 && x[1] < 0.75
}

/// Open rectangle `(1/2, 1) × (0, 1/2)`.
pub fn in_u2(x: Point) -> bool {
    x[0] > 0.5 && x[1] < 0.5
}

/// Half plane `x − y > 1/4`.
pub fn in_u3(x: Point) -> bool {
    x[0] - x[1] > 0.25
}

/// Convection weight `σ(−1, 1)/√2` with `σ = 1` on the rectangle `(1/2,1)×(0,1/2)`.
pub fn convection_weight(cell: Point) -> [f64; 2] {
    let sigma = if in_u2(cell) { 1.0 } else { -1.0 };
    [-sigma * FRAC_1_SQRT_2, sigma * FRAC_1_SQRT_2]
}

/// Piecewise-linear cutoff equal to 1 on the closed square `[1/4, 3/4]²` and
/// falling to 0 within one element layer of the initial mesh.
#[derive(Clone, Debug)]
pub struct Cutoff {
    n: usize,
    /// Gradients per grid square `(i, j)`: lower triangle, then upper.
    grads: Vec<[[f64; 2]; 2]>,
}

impl Cutoff {
    pub fn new(n: usize) -> Self {
        let h = 1.0 / n as f64;
        let nodal = |i: usize, j: usize| {
            let (x, y) = (i as f64 * h, j as f64 * h);
            let inside = |s: f64| (0.25 - 1e-12..=0.75 + 1e-12).contains(&s);
            if inside(x) && inside(y) {
                1.0
            } else {
                0.0
            }
        };
        let mut grads = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let (x0, y0) = (i as f64 * h, j as f64 * h);
                let p00 = ([x0, y0], nodal(i, j));
                let p10 = ([x0 + h, y0], nodal(i + 1, j));
                let p11 = ([x0 + h, y0 + h], nodal(i + 1, j + 1));
                let p01 = ([x0, y0 + h], nodal(i, j + 1));
                let grad = |tri: [([f64; 2], f64); 3]| {
                    let geo = ElementGeometry::new([tri[0].0, tri[1].0, tri[2].0]);
                    let mut g = [0.0; 2];
                    for k in 0..3 {
                        g[0] += tri[k].1 * geo.grad_lambda[k][0];
                        g[1] += tri[k].1 * geo.grad_lambda[k][1];
                    }
                    g
                };
                grads.push([grad([p11, p00, p10]), grad([p00, p11, p01])]);
            }
        }
        Cutoff { n, grads }
    }

    /// Gradient on the initial-mesh element containing the point `cell`,
    /// which must be interior to that element (an element centroid).
    pub fn grad(&self, cell: Point) -> [f64; 2] {
        let n = self.n as f64;
        let i = ((cell[0] * n).floor() as usize).min(self.n - 1);
        let j = ((cell[1] * n).floor() as usize).min(self.n - 1);
        let (dx, dy) = (cell[0] * n - i as f64, cell[1] * n - j as f64);
        self.grads[j * self.n + i][if dx > dy { 0 } else { 1 }]
    }
}

/// A quadratic goal functional and its linearized dual data.
#[derive(Clone, Debug)]
pub enum GoalDescriptor {
    /// `G(w) = ∫ λ w²` with `λ` the indicator of `(1/4, 3/4)²`.
    WeightedL2,
    /// `G(w) = ∫ w λ·∇w` with the piecewise constant convection weight.
    Convection,
    /// `G(w) = ∫ ∇ψ·(∇w⊗∇w − ½|∇w|² I) χ`.
    Force { cutoff: Arc<Cutoff>, direction: [f64; 2] },
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl GoalDescriptor {
    pub fn kind(&self) -> ProblemKind {
        match self {
            GoalDescriptor::WeightedL2 => ProblemKind::WeightedL2,
            GoalDescriptor::Convection => ProblemKind::Convection,
            GoalDescriptor::Force { .. } => ProblemKind::Force,
        }
    }

    /// Whether the goal stems from a compact operator.
    pub fn is_compact(&self) -> bool {
        !matches!(self, GoalDescriptor::Force { .. })
    }

    pub fn exact_goal(&self) -> Option<f64> {
        match self {
            GoalDescriptor::WeightedL2 => Some(WEIGHTED_L2_EXACT_GOAL),
            _ => None,
        }
    }

    /// Integrand of `G` at a point where `w` has jet `jet`.
    pub fn integrand(&self, site: Site, jet: &Jet) -> f64 {
        match self {
            GoalDescriptor::WeightedL2 => {
                if in_u1(site.cell) {
                    jet.value * jet.value
                } else {
                    0.0
                }
            }
            GoalDescriptor::Convection => jet.value * dot(convection_weight(site.cell), jet.grad),
            GoalDescriptor::Force { cutoff, direction } => {
                let gpsi = cutoff.grad(site.cell);
                let g = jet.grad;
                dot(gpsi, g) * dot(g, *direction) - 0.5 * dot(g, g) * dot(gpsi, *direction)
            }
        }
    }

    /// `g[w]`, `gvec[w]` and `div gvec[w]` at a point where `w` has jet `jet`.
    pub fn dual_data(&self, site: Site, jet: &Jet) -> SourceValue {
        match self {
            GoalDescriptor::WeightedL2 => {
                let g = if in_u1(site.cell) { 2.0 * jet.value } else { 0.0 };
                SourceValue { g, ..Default::default() }
            }
            GoalDescriptor::Convection => {
                let lam = convection_weight(site.cell);
                let lg = dot(lam, jet.grad);
                SourceValue { g: lg, gvec: [-jet.value * lam[0], -jet.value * lam[1]], gvec_div: -lg }
            }
            GoalDescriptor::Force { cutoff, direction } => {
                let gpsi = cutoff.grad(site.cell);
                let chi = *direction;
                let g = jet.grad;
                let (pc, pg, cg) = (dot(gpsi, chi), dot(gpsi, g), dot(chi, g));
                let h = jet.hess;
                let h_chi = [h[0][0] * chi[0] + h[0][1] * chi[1], h[1][0] * chi[0] + h[1][1] * chi[1]];
                let h_psi = [h[0][0] * gpsi[0] + h[0][1] * gpsi[1], h[1][0] * gpsi[0] + h[1][1] * gpsi[1]];
                SourceValue {
                    g: 0.0,
                    gvec: [
                        pc * g[0] - pg * chi[0] - cg * gpsi[0],
                        pc * g[1] - pg * chi[1] - cg * gpsi[1],
                    ],
                    gvec_div: pc * jet.laplacian() - dot(gpsi, h_chi) - dot(chi, h_psi),
                }
            }
        }
    }

    /// Dual data linearized at the discrete function `w`.
    pub fn dual_source<'a>(&'a self, space: &'a FeSpace, w: &'a [f64]) -> Result<DualSource<'a>> {
        space.check_len(w)?;
        Ok(DualSource { goal: self, space, w })
    }

    /// `G(w)` by per-element quadrature, exact for the polynomial integrands.
    pub fn evaluate(&self, space: &FeSpace, w: &[f64]) -> Result<f64> {
        space.check_len(w)?;
        let p = space.degree();
        let rule = TriangleRule::for_degree((2 * p + 2).max(5));
        let parts: Vec<f64> = (0..space.mesh().n_elements())
            .into_par_iter()
            .map(|t| {
                let geo = space.geometry(t);
                let cell = geo.centroid();
                let c = space.local_coeffs(t, w);
                let mut sum = 0.0;
                for (lam, wt) in rule.points.iter().zip(&rule.weights) {
                    let jet = geo.jet(p, &c, *lam);
                    sum += wt * self.integrand(Site { x: geo.point(*lam), cell }, &jet);
                }
                sum * geo.area
            })
            .collect();
        Ok(parts.iter().sum())
    }
}

/// [`Source`] view of the dual data of a goal at a fixed discrete function.
pub struct DualSource<'a> {
    goal: &'a GoalDescriptor,
    space: &'a FeSpace,
    w: &'a [f64],
}

impl Source for DualSource<'_> {
    fn eval(&self, element: usize, site: Site) -> SourceValue {
        let jet = self.space.jet_at(element, self.w, site.x);
        self.goal.dual_data(site, &jet)
    }
}

/// Closed-form solution with its gradient.
#[derive(Clone, Copy, Debug)]
pub struct ExactSolution {
    pub value: fn(Point) -> f64,
    pub grad: fn(Point) -> [f64; 2],
}

/// A benchmark: coefficients, loads, goal and initial grid resolution.
#[derive(Clone)]
pub struct BenchmarkProblem {
    pub kind: ProblemKind,
    pub coeffs: CoefficientSet,
    pub loads: LoadSet,
    pub goal: GoalDescriptor,
    /// Grid size of the initial criss-cross mesh.
    pub n: usize,
    pub exact_solution: Option<ExactSolution>,
}

impl fmt::Debug for BenchmarkProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BenchmarkProblem").field("kind", &self.kind).field("n", &self.n).finish_non_exhaustive()
    }
}

pub const DEFAULT_INITIAL_N: usize = 8;

fn check_grid(n: usize) -> Result<Mesh> {
    if n == 0 || !n.is_multiple_of(4) {
        return Err(Error::Config(format!(
            "initial grid size must be a positive multiple of 4 to resolve the data regions, got {n}"
        )));
    }
    let mesh = initial_mesh(n)?;
    check_resolved(&mesh, &[in_u1, in_u2, in_u3])?;
    Ok(mesh)
}

/// Samples every element interior and fails if any region predicate changes
/// value inside an element.
pub fn check_resolved(mesh: &Mesh, regions: &[fn(Point) -> bool]) -> Result<()> {
    const STEPS: usize = 9;
    for t in 0..mesh.n_elements() {
        let geo = ElementGeometry::of(mesh, t);
        let reference = regions.iter().map(|r| r(geo.centroid())).collect::<Vec<_>>();
        for i in 1..STEPS {
            for j in 1..STEPS - i {
                let k = STEPS - i - j;
                let lam = [i as f64 / STEPS as f64, j as f64 / STEPS as f64, k as f64 / STEPS as f64];
                let x = geo.point(lam);
                for (r, &inside) in regions.iter().zip(&reference) {
                    if r(x) != inside {
                        return Err(Error::Config(format!("element {t} is cut by a data discontinuity near {x:?}")));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Solution of `−Δu = 2x(x−1) + 2y(y−1)`: `u = −xy(1−x)(1−y)`.
fn weighted_l2_u(x: Point) -> f64 {
    -x[0] * x[1] * (1.0 - x[0]) * (1.0 - x[1])
}

fn weighted_l2_grad(x: Point) -> [f64; 2] {
    [
        -(1.0 - 2.0 * x[0]) * x[1] * (1.0 - x[1]),
        -(1.0 - 2.0 * x[1]) * x[0] * (1.0 - x[0]),
    ]
}

/// `−Δu = 2x(x−1) + 2y(y−1)`, goal `∫_{U₁} u²`. The goal is even in `u`, so its
/// value is that of `xy(1−x)(1−y)`.
pub fn weighted_l2_problem(n: usize) -> Result<BenchmarkProblem> {
    check_grid(n)?;
    let f = Arc::new(|s: Site| {
        let [x, y] = s.x;
        2.0 * x * (x - 1.0) + 2.0 * y * (y - 1.0)
    });
    Ok(BenchmarkProblem {
        kind: ProblemKind::WeightedL2,
        coeffs: CoefficientSet::laplace(),
        loads: LoadSet::scalar(f),
        goal: GoalDescriptor::WeightedL2,
        n,
        exact_solution: Some(ExactSolution { value: weighted_l2_u, grad: weighted_l2_grad }),
    })
}

/// Primal load `fvec = (−1, 1)/√2` on the half plane `x − y > 1/4`, goal
/// `∫ w λ·∇w`.
pub fn convection_problem(n: usize) -> Result<BenchmarkProblem> {
    check_grid(n)?;
    let fvec = Arc::new(|s: Site| if in_u3(s.cell) { [-FRAC_1_SQRT_2, FRAC_1_SQRT_2] } else { [0.0, 0.0] });
    Ok(BenchmarkProblem {
        kind: ProblemKind::Convection,
        coeffs: CoefficientSet::laplace(),
        loads: LoadSet { fvec, ..LoadSet::zero() },
        goal: GoalDescriptor::Convection,
        n,
        exact_solution: None,
    })
}

/// `f = 1`, goal: force in direction `(1,1)/√2` through the Maxwell stress
/// tensor weighted by a cutoff around `(1/4, 3/4)²`.
pub fn force_problem(n: usize) -> Result<BenchmarkProblem> {
    check_grid(n)?;
    Ok(BenchmarkProblem {
        kind: ProblemKind::Force,
        coeffs: CoefficientSet::laplace(),
        loads: LoadSet::scalar(constant_scalar(1.0)),
        goal: GoalDescriptor::Force { cutoff: Arc::new(Cutoff::new(n)), direction: FORCE_DIRECTION },
        n,
        exact_solution: None,
    })
}

impl BenchmarkProblem {
    pub fn new(kind: ProblemKind, n: usize) -> Result<Self> {
        match kind {
            ProblemKind::WeightedL2 => weighted_l2_problem(n),
            ProblemKind::Convection => convection_problem(n),
            ProblemKind::Force => force_problem(n),
        }
    }

    pub fn initial_mesh(&self) -> Result<Mesh> {
        initial_mesh(self.n)
    }
}
