//! Sparse direct solves on the free (non-Dirichlet) block.
//!
//! Factorizations come from `faer`: sparse Cholesky when the free block is
//! symmetric positive definite, otherwise sparse LU with partial pivoting.
//! One factorization serves both the primal system `M u = F` and the dual
//! system `Mᵀ z = G`. Every solution is polished by iterative refinement and
//! accepted only if `‖b − Mx‖∞ ≤ RESIDUAL_TOL · (‖b‖∞ + ‖M‖∞ ‖x‖∞)`.

use std::panic::{catch_unwind, AssertUnwindSafe};

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::fem::sparse::CsrMatrix;

pub const RESIDUAL_TOL: f64 = 1e-12;
const MAX_REFINEMENT_STEPS: usize = 5;

enum Factor {
    Empty,
    Cholesky(Llt<usize, f64>),
    Lu(Box<Lu<usize, f64>>),
}

/// A factored free block of a global matrix.
pub struct FactoredSystem {
    free: Vec<usize>,
    n_total: usize,
    block: CsrMatrix,
    row_sum_norm: f64,
    col_sum_norm: f64,
    factor: Factor,
}

impl FactoredSystem {
    pub fn new(matrix: &CsrMatrix, dirichlet: &[bool]) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() != dirichlet.len() {
            return Err(Error::LengthMismatch { expected: matrix.nrows(), actual: dirichlet.len() });
        }
        let keep: Vec<bool> = dirichlet.iter().map(|d| !d).collect();
        let free: Vec<usize> = (0..keep.len()).filter(|&i| keep[i]).collect();
        let block = matrix.restrict(&keep);
        let factor = if free.is_empty() { Factor::Empty } else { factorize(&block)? };
        let row_sum_norm = (0..block.nrows()).map(|r| block.row(r).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let mut col_sums = vec![0.0; block.ncols()];
        for r in 0..block.nrows() {
            for (c, v) in block.row(r) {
                col_sums[c] += v.abs();
            }
        }
        let col_sum_norm = col_sums.into_iter().fold(0.0, f64::max);
        Ok(FactoredSystem { free, n_total: matrix.nrows(), block, row_sum_norm, col_sum_norm, factor })
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// Solves `M u = rhs` on the free dofs, `u = 0` on Dirichlet dofs.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.solve_impl(rhs, false)
    }

    /// Solves `Mᵀ z = rhs` on the free dofs, `z = 0` on Dirichlet dofs.
    pub fn solve_transposed(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.solve_impl(rhs, true)
    }

    fn solve_impl(&self, rhs: &[f64], transposed: bool) -> Result<Vec<f64>> {
        if rhs.len() != self.n_total {
            return Err(Error::LengthMismatch { expected: self.n_total, actual: rhs.len() });
        }
        let mut out = vec![0.0; self.n_total];
        if self.free.is_empty() {
            return Ok(out);
        }
        let b: Vec<f64> = self.free.iter().map(|&i| rhs[i]).collect();
        let b_norm = max_norm(&b);
        if b_norm == 0.0 {
            return Ok(out);
        }
        let m_norm = if transposed { self.col_sum_norm } else { self.row_sum_norm };
        let apply = |x: &[f64]| {
            if transposed {
                self.block.transpose_mul_vec(x)
            } else {
                self.block.mul_vec(x)
            }
        };
        let mut x = self.raw_solve(&b, transposed);
        let mut rel = f64::INFINITY;
        for _ in 0..=MAX_REFINEMENT_STEPS {
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Solver("factorization produced non-finite values".into()));
            }
            let ax = apply(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            rel = max_norm(&r) / (b_norm + m_norm * max_norm(&x));
            if rel <= RESIDUAL_TOL {
                break;
            }
            let dx = self.raw_solve(&r, transposed);
            x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);
        }
        if !(rel <= RESIDUAL_TOL) {
            return Err(Error::Solver(format!(
                "backward error {rel:e} above {RESIDUAL_TOL:e}; system is singular or too ill-conditioned"
            )));
        }
        for (k, &i) in self.free.iter().enumerate() {
            out[i] = x[k];
        }
        Ok(out)
    }

    fn raw_solve(&self, b: &[f64], transposed: bool) -> Vec<f64> {
        let mut m = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
        match (&self.factor, transposed) {
            (Factor::Empty, _) => {}
            (Factor::Cholesky(llt), _) => llt.solve_in_place(m.as_mut()),
            (Factor::Lu(lu), false) => lu.solve_in_place(m.as_mut()),
            (Factor::Lu(lu), true) => lu.solve_transpose_in_place(m.as_mut()),
        }
        (0..b.len()).map(|i| m[(i, 0)]).collect()
    }
}

fn factorize(block: &CsrMatrix) -> Result<Factor> {
    let n = block.nrows();
    let triplets: Vec<Triplet<usize, usize, f64>> = (0..n)
        .flat_map(|r| block.row(r).map(move |(c, v)| Triplet::new(r, c, v)))
        .collect();
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::Solver(format!("cannot build sparse matrix: {e:?}")))?;
    if block.asymmetry() <= 1e-14 {
        if let Ok(llt) = a.sp_cholesky(Side::Lower) {
            return Ok(Factor::Cholesky(llt));
        }
    }
    // faer panics on an exactly zero pivot instead of returning an error.
    match catch_unwind(AssertUnwindSafe(|| a.sp_lu())) {
        Ok(Ok(lu)) => Ok(Factor::Lu(Box::new(lu))),
        Ok(Err(e)) => Err(Error::Solver(format!("sparse LU failed: {e:?}"))),
        Err(_) => Err(Error::Solver("sparse LU hit a zero pivot; matrix is singular".into())),
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Solves `a(u, φ_i) = rhs_i` for all free `i`, with `u = 0` on masked dofs.
pub fn solve_primal(matrix: &CsrMatrix, rhs: &[f64], dirichlet: &[bool]) -> Result<Vec<f64>> {
    FactoredSystem::new(matrix, dirichlet)?.solve(rhs)
}

/// Solves `a(φ_i, z) = rhs_i` for all free `i`: the transposed system.
pub fn solve_dual(matrix: &CsrMatrix, rhs: &[f64], dirichlet: &[bool]) -> Result<Vec<f64>> {
    FactoredSystem::new(matrix, dirichlet)?.solve_transposed(rhs)
}
