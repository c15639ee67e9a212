//! Quadrature on the reference triangle and the unit interval.
//!
//! Triangle rules are stated in barycentric coordinates with weights summing
//! to one, so `∫_T f ≈ |T| Σ w_q f(x_q)`.

use std::sync::OnceLock;

#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

#[derive(Clone, Debug)]
pub struct LineRule {
    /// Nodes in [0, 1].
    pub points: Vec<f64>,
    /// Weights summing to one.
    pub weights: Vec<f64>,
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Value and derivative of the Legendre polynomial of degree `n` at `z`.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

impl LineRule {
    /// Gauss rule on [0, 1] exact for polynomials of degree `2n − 1`.
    pub fn gauss(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        LineRule {
            points: x.iter().map(|&t| 0.5 * (t + 1.0)).collect(),
            weights: w.iter().map(|&v| 0.5 * v).collect(),
        }
    }
}

impl TriangleRule {
    /// The 7-point degree-5 rule of Radon.
    pub fn seven_point() -> Self {
        let s = 15f64.sqrt();
        let a1 = (6.0 - s) / 21.0;
        let a2 = (6.0 + s) / 21.0;
        let w1 = (155.0 - s) / 1200.0;
        let w2 = (155.0 + s) / 1200.0;
        let third = 1.0 / 3.0;
        let mut points = vec![[third, third, third]];
        let mut weights = vec![9.0 / 40.0];
        for (a, w) in [(a1, w1), (a2, w2)] {
            let b = 1.0 - 2.0 * a;
            points.extend([[a, a, b], [a, b, a], [b, a, a]]);
            weights.extend([w, w, w]);
        }
        TriangleRule { points, weights, degree: 5 }
    }

    /// Collapsed tensor Gauss rule exact for total degree `degree`.
    pub fn collapsed_gauss(degree: usize) -> Self {
        let n = (degree + 3) / 2;
        let line = LineRule::gauss(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&u, &wu) in line.points.iter().zip(&line.weights) {
            for (&v, &wv) in line.points.iter().zip(&line.weights) {
                // (u, v) ∈ [0,1]² ↦ (ξ, η) = (u, v(1 − u)), Jacobian (1 − u).
                let xi = u;
                let eta = v * (1.0 - u);
                points.push([1.0 - xi - eta, xi, eta]);
                // Reference area 1/2 is divided out to make weights sum to one.
                weights.push(2.0 * wu * wv * (1.0 - u));
            }
        }
        TriangleRule { points, weights, degree }
    }

    /// A cached rule exact for total degree at least `degree`.
    pub fn for_degree(degree: usize) -> &'static TriangleRule {
        static SEVEN: OnceLock<TriangleRule> = OnceLock::new();
        static HIGH: OnceLock<Vec<TriangleRule>> = OnceLock::new();
        if degree <= 5 {
            return SEVEN.get_or_init(TriangleRule::seven_point);
        }
        let high = HIGH.get_or_init(|| (0..=24).map(TriangleRule::collapsed_gauss).collect());
        let d = degree.min(24);
        &high[d]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
