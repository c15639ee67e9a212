use crate::fem::fields::{CoefficientSet, Site};
use crate::fem::space::FeSpace;
use crate::mesh::Point;
use crate::quadrature::TriangleRule;

/// `(∫ A∇(u − u_h)·∇(u − u_h))^{1/2}` for a closed-form gradient `∇u`,
/// with a rule exact for degree `2p + 4`.
pub fn energy_norm_error(
    space: &FeSpace,
    u_h: &[f64],
    coeffs: &CoefficientSet,
    exact_grad: impl Fn(Point) -> [f64; 2],
) -> f64 {
    energy_integral(space, u_h, coeffs, |x, g| {
        let e = exact_grad(x);
        [e[0] - g[0], e[1] - g[1]]
    })
    .sqrt()
}

/// Energy norm `⫼v_h⫼` of a discrete function.
pub fn energy_norm(space: &FeSpace, v_h: &[f64], coeffs: &CoefficientSet) -> f64 {
    energy_integral(space, v_h, coeffs, |_, g| g).sqrt()
}

fn energy_integral(
    space: &FeSpace,
    u_h: &[f64],
    coeffs: &CoefficientSet,
    integrand_grad: impl Fn(Point, [f64; 2]) -> [f64; 2],
) -> f64 {
    let p = space.degree();
    let rule = TriangleRule::for_degree(2 * p + 4);
    let mut total = 0.0;
    for t in 0..space.mesh().n_elements() {
        let geo = space.geometry(t);
        let cell = geo.centroid();
        let c = space.local_coeffs(t, u_h);
        let mut local = 0.0;
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            let x = geo.point(*lam);
            let g = integrand_grad(x, geo.jet(p, &c, *lam).grad);
            let a = (coeffs.diffusion)(Site { x, cell });
            let ag = [a[0][0] * g[0] + a[0][1] * g[1], a[1][0] * g[0] + a[1][1] * g[1]];
            local += w * (ag[0] * g[0] + ag[1] * g[1]);
        }
        total += geo.area * local;
    }
    total
}
