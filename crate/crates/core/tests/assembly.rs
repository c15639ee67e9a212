mod common;

use std::sync::Arc;

use goafem::benchmarks::{BenchmarkProblem, ProblemKind};
use goafem::driver::{run_goafem_with, solve_level, RunOptions};
use goafem::fem::assembly::{local_bilinear, local_source};
use goafem::fem::{
    assemble_bilinear, assemble_dual_rhs, assemble_primal_rhs, energy_norm, energy_norm_error, solve_dual, solve_primal,
    CoefficientSet, CsrMatrix, FeSpace, LoadSet, Site,
};
use goafem::mesh::{initial_mesh, Mesh, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{dot, element_nodes, oracle_local_matrix, prolongate, random_coefficients, random_triangle, single_element_space, triangle_points};
use common::lagrange_basis;

#[test]
fn oracle_quadrature_is_exact_for_monomials() {
    let v = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    for a in 0..=4u32 {
        for b in 0..=(8 - a).min(4) {
            let q: f64 = triangle_points(v).iter().map(|(x, w)| w * x[0].powi(a as i32) * x[1].powi(b as i32)).sum();
            let exact = fact(a) * fact(b) / fact(a + b + 2);
            assert!((q - exact).abs() < 1e-15, "x^{a} y^{b}");
        }
    }
}

#[test]
fn local_matrices_match_oracle_on_random_triangles() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..100 {
        let v = random_triangle(&mut rng);
        let (a, b, c) = random_coefficients(&mut rng);
        let coeffs = CoefficientSet::constant(a, b, c);
        for p in [1, 2] {
            let space = single_element_space(v, p);
            let nodes = element_nodes(&space, 0);
            for (k, vert) in v.iter().enumerate() {
                assert_eq!(nodes[k], *vert);
            }
            if p == 2 {
                for k in 0..3 {
                    let (pa, pb) = (v[k], v[(k + 1) % 3]);
                    let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
                    assert!(nodes[3..].iter().any(|n| (n[0] - mid[0]).abs() < 1e-15 && (n[1] - mid[1]).abs() < 1e-15));
                }
            }
            let got = local_bilinear(&space, 0, &coeffs).unwrap();
            let want = oracle_local_matrix(&nodes, v, p, a, b, c);
            let scale = want.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
            for i in 0..nodes.len() {
                for j in 0..nodes.len() {
                    assert!(
                        (got[i][j] - want[i][j]).abs() <= 1e-12 * scale,
                        "trial {trial}, p={p}, entry ({i},{j}): {} vs {}",
                        got[i][j],
                        want[i][j]
                    );
                }
            }
        }
    }
}

#[test]
fn local_loads_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let v = random_triangle(&mut rng);
        let (a0, a1, a2) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let f = move |x: Point| a0 + a1 * x[0] * x[1] + a2 * x[1] * x[1];
        let fvec = move |x: Point| [a1 * x[0], a0 + a2 * x[1]];
        let loads = LoadSet {
            f: Arc::new(move |s: Site| f(s.x)),
            fvec: Arc::new(move |s: Site| fvec(s.x)),
            fvec_div: Arc::new(move |_| a1 + a2),
        };
        for p in [1, 2] {
            let space = single_element_space(v, p);
            let nodes = element_nodes(&space, 0);
            let basis = lagrange_basis(&nodes, p);
            let got = local_source(&space, 0, &loads);
            for (i, phi) in basis.iter().enumerate() {
                let want: f64 = triangle_points(v)
                    .iter()
                    .map(|&(x, w)| {
                        let g = phi.grad(x);
                        let fv = fvec(x);
                        w * (f(x) * phi.value(x) - fv[0] * g[0] - fv[1] * g[1])
                    })
                    .sum();
                assert!((got[i] - want).abs() < 1e-13, "p={p}, dof {i}: {} vs {want}", got[i]);
            }
        }
    }
}

fn graded_mesh() -> Arc<Mesh> {
    let mut mesh = initial_mesh(4).unwrap();
    for _ in 0..3 {
        let marked: Vec<usize> = (0..mesh.n_elements()).filter(|&t| mesh.centroid(t)[0] < 0.4).collect();
        mesh = mesh.refine_nvb(&marked).unwrap();
    }
    Arc::new(mesh)
}

#[test]
fn global_matrix_is_sum_of_oracle_local_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (a, b, c) = random_coefficients(&mut rng);
    let coeffs = CoefficientSet::constant(a, b, c);
    let mesh = graded_mesh();
    for p in [1, 2] {
        let space = FeSpace::new(mesh.clone(), p).unwrap();
        let n = space.n_dofs();
        let mut dense = vec![vec![0.0; n]; n];
        for t in 0..mesh.n_elements() {
            let nodes = element_nodes(&space, t);
            let k = oracle_local_matrix(&nodes, mesh.coords(t), p, a, b, c);
            let dofs = space.element_dofs(t);
            for i in 0..dofs.len() {
                for j in 0..dofs.len() {
                    dense[dofs[i]][dofs[j]] += k[i][j];
                }
            }
        }
        let m = assemble_bilinear(&space, &coeffs).unwrap();
        for (i, row) in dense.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                assert!((m.get(i, j) - want).abs() <= 1e-12, "p={p} ({i},{j})");
            }
        }
    }
}

#[test]
fn benchmark_matrices_are_symmetric() {
    for kind in ProblemKind::ALL {
        let problem = BenchmarkProblem::new(kind, 8).unwrap();
        for p in [1, 2] {
            let space = FeSpace::new(graded_mesh(), p).unwrap();
            let m = assemble_bilinear(&space, &problem.coeffs).unwrap();
            assert!(m.asymmetry() <= 1e-13, "{kind} p={p}");
        }
    }
}

#[test]
fn transpose_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (a, b, c) = random_coefficients(&mut rng);
    let space = FeSpace::new(graded_mesh(), 2).unwrap();
    let m = assemble_bilinear(&space, &CoefficientSet::constant(a, b, c)).unwrap();
    assert!(m.asymmetry() > 1e-6);
    let n = space.n_dofs();
    for _ in 0..10 {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lhs = dot(&x, &m.mul_vec(&y));
        let rhs = dot(&m.transpose_mul_vec(&x), &y);
        assert!((lhs - rhs).abs() <= 1e-13 * (1.0 + lhs.abs()));
    }
    // Dual solve with M equals primal solve with Mᵀ.
    let g: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let z = solve_dual(&m, &g, space.dirichlet_mask()).unwrap();
    let mt: CsrMatrix = m.transpose();
    let z2 = solve_primal(&mt, &g, space.dirichlet_mask()).unwrap();
    for (u, v) in z.iter().zip(&z2) {
        assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()));
    }
    // Duality: z·F = u·G for Mu = F, Mᵀz = G on the free block.
    let f: Vec<f64> = (0..n).map(|i| if space.dirichlet_mask()[i] { 0.0 } else { rng.random_range(-1.0..1.0) }).collect();
    let gm: Vec<f64> = g.iter().zip(space.dirichlet_mask()).map(|(v, d)| if *d { 0.0 } else { *v }).collect();
    let u = solve_primal(&m, &f, space.dirichlet_mask()).unwrap();
    let lhs = dot(&z, &f);
    let rhs = dot(&u, &gm);
    assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1e-3));
}

fn nested_levels(levels: &[usize]) -> Vec<Arc<Mesh>> {
    let problem = BenchmarkProblem::new(ProblemKind::WeightedL2, 8).unwrap();
    let max = *levels.iter().max().unwrap();
    let options = RunOptions { max_levels: max, ..RunOptions::default() };
    let mut meshes = Vec::new();
    run_goafem_with(&problem, &options, |view| {
        if levels.contains(&view.level) {
            meshes.push(view.solution.space.mesh_arc().clone());
        }
        Ok(())
    })
    .unwrap();
    meshes
}

#[test]
fn galerkin_orthogonality_on_nested_adaptive_meshes() {
    let problem = BenchmarkProblem::new(ProblemKind::WeightedL2, 8).unwrap();
    let meshes = nested_levels(&[2, 4, 6]);
    assert_eq!(meshes.len(), 3);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for p in [1, 2] {
        let sols: Vec<_> = meshes.iter().map(|m| solve_level(&problem, m.clone(), p).unwrap()).collect();
        for (ci, fi) in [(0, 1), (1, 2), (0, 2)] {
            let (coarse, fine) = (&sols[ci], &sols[fi]);
            let m = assemble_bilinear(&fine.space, &problem.coeffs).unwrap();
            let uc = prolongate(&coarse.space, &coarse.primal, &fine.space);
            let diff: Vec<f64> = fine.primal.iter().zip(&uc).map(|(a, b)| a - b).collect();
            let diff_norm = energy_norm(&fine.space, &diff, &problem.coeffs);
            assert!(diff_norm > 0.0);
            for _ in 0..10 {
                let v: Vec<f64> = (0..coarse.space.n_dofs())
                    .map(|i| if coarse.space.dirichlet_mask()[i] { 0.0 } else { rng.random_range(-1.0..1.0) })
                    .collect();
                let vf = prolongate(&coarse.space, &v, &fine.space);
                let a = dot(&vf, &m.mul_vec(&diff));
                let bound = diff_norm * energy_norm(&fine.space, &vf, &problem.coeffs);
                assert!(a.abs() <= 1e-8 * bound, "p={p}, levels {ci}->{fi}: {a:e} vs {bound:e}");
            }
        }
    }
}

#[test]
fn dual_solution_is_linear_in_the_linearization_point() {
    let mesh = graded_mesh();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for kind in ProblemKind::ALL {
        let problem = BenchmarkProblem::new(kind, 8).unwrap();
        let space = FeSpace::new(mesh.clone(), 2).unwrap();
        let m = assemble_bilinear(&space, &problem.coeffs).unwrap();
        let rand_fn = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..space.n_dofs()).map(|i| if space.dirichlet_mask()[i] { 0.0 } else { rng.random_range(-1.0..1.0) }).collect()
        };
        let (w1, w2) = (rand_fn(&mut rng), rand_fn(&mut rng));
        let sum: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
        let z = |w: &[f64]| {
            let src = problem.goal.dual_source(&space, w).unwrap();
            solve_dual(&m, &assemble_dual_rhs(&space, &src), space.dirichlet_mask()).unwrap()
        };
        let (z1, z2, zs) = (z(&w1), z(&w2), z(&sum));
        let scale = zs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..zs.len() {
            assert!((zs[i] - z1[i] - z2[i]).abs() <= 1e-10 * scale, "{kind}");
        }
    }
}

#[test]
fn energy_error_decreases_under_uniform_refinement() {
    let problem = BenchmarkProblem::new(ProblemKind::WeightedL2, 4).unwrap();
    let exact = problem.exact_solution.unwrap();
    for p in [1, 2] {
        let mut mesh = problem.initial_mesh().unwrap();
        let mut errors = Vec::new();
        for _ in 0..4 {
            let space = FeSpace::new(Arc::new(mesh.clone()), p).unwrap();
            let m = assemble_bilinear(&space, &problem.coeffs).unwrap();
            let u = solve_primal(&m, &assemble_primal_rhs(&space, &problem.loads), space.dirichlet_mask()).unwrap();
            errors.push(energy_norm_error(&space, &u, &problem.coeffs, exact.grad));
            mesh = mesh.uniform_refine();
        }
        assert!(errors.windows(2).all(|w| w[1] < w[0]), "p={p}: {errors:?}");
        // Two bisection sweeps halve h: ratio 2^p in the energy norm.
        let rate = (errors[2] / errors[3]).log2();
        assert!((rate - p as f64).abs() < 0.15, "p={p}: rate {rate}");
    }
}

#[test]
fn energy_norm_of_exact_solution_matches_oracle() {
    let problem = BenchmarkProblem::new(ProblemKind::WeightedL2, 4).unwrap();
    let exact = problem.exact_solution.unwrap();
    let space = FeSpace::new(Arc::new(initial_mesh(4).unwrap()), 1).unwrap();
    let zero = vec![0.0; space.n_dofs()];
    let got = energy_norm_error(&space, &zero, &problem.coeffs, exact.grad);
    let mesh = space.mesh();
    let want: f64 = (0..mesh.n_elements())
        .flat_map(|t| triangle_points(mesh.coords(t)))
        .map(|(x, w)| {
            let g = (exact.grad)(x);
            w * (g[0] * g[0] + g[1] * g[1])
        })
        .sum::<f64>()
        .sqrt();
    // ∫|∇(xy(1−x)(1−y))|² = 1/45.
    assert!((want - (1.0f64 / 45.0).sqrt()).abs() < 1e-14);
    assert!((got - want).abs() < 1e-13);
}
