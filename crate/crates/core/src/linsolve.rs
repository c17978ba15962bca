//! Linear solvers for the reduced velocity system.
//!
//! The direct path wraps faer's sparse LU. The symbolic analysis is done once
//! per sparsity pattern and reused for every numeric factorization. faer is
//! built without its parallel backend, so results are deterministic.

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMat};
use faer::{Conj, MatMut};

use crate::dense;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearSolverKind {
    /// Sparse LU.
    #[default]
    Direct,
    /// Jacobi-preconditioned conjugate gradients; symmetric systems only.
    ConjugateGradient,
}

impl std::str::FromStr for LinearSolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" | "lu" => Ok(Self::Direct),
            "cg" => Ok(Self::ConjugateGradient),
            other => Err(Error::Config(format!(
                "unknown linear solver '{other}' (expected direct or cg)"
            ))),
        }
    }
}

/// Sparse LU bound to one CSR sparsity pattern.
pub struct DirectSolver {
    n: usize,
    symbolic_csc: SymbolicSparseColMat<usize>,
    /// CSR value position -> CSC value position.
    to_csc: Vec<usize>,
    csc_values: Vec<f64>,
    symbolic: SymbolicLu<usize>,
    lu: Option<Lu<usize, f64>>,
}

impl std::fmt::Debug for DirectSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirectSolver")
            .field("n", &self.n)
            .field("nnz", &self.to_csc.len())
            .field("factored", &self.lu.is_some())
            .finish()
    }
}

impl DirectSolver {
    /// Symbolic analysis of a square pattern.
    pub fn new(pattern: &CsrMatrix) -> Result<Self> {
        let n = pattern.nrows();
        if pattern.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "direct solver needs a square matrix, got {}x{}",
                n,
                pattern.ncols()
            )));
        }
        // CSR -> CSC by counting sort on columns; rows stay sorted
        let mut col_ptr = vec![0usize; n + 1];
        for &c in pattern.col_idx() {
            col_ptr[c + 1] += 1;
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        let mut next = col_ptr.clone();
        let mut row_idx = vec![0usize; pattern.nnz()];
        let mut to_csc = vec![0usize; pattern.nnz()];
        for r in 0..n {
            for k in pattern.row_ptr()[r]..pattern.row_ptr()[r + 1] {
                let c = pattern.col_idx()[k];
                row_idx[next[c]] = r;
                to_csc[k] = next[c];
                next[c] += 1;
            }
        }
        let symbolic_csc = SymbolicSparseColMat::new_checked(n, n, col_ptr, None, row_idx);
        let symbolic = SymbolicLu::try_new(symbolic_csc.as_ref())
            .map_err(|e| Error::LinearSolver(format!("symbolic LU failed: {e:?}")))?;
        Ok(Self {
            n,
            symbolic_csc,
            csc_values: vec![0.0; to_csc.len()],
            to_csc,
            symbolic,
            lu: None,
        })
    }

    /// Numeric factorization of `a`, which must share the analysed pattern.
    pub fn factor(&mut self, a: &CsrMatrix) -> Result<()> {
        if a.nnz() != self.to_csc.len() || a.nrows() != self.n {
            return Err(Error::DimensionMismatch(
                "matrix pattern differs from the analysed one".into(),
            ));
        }
        for (k, &v) in a.values().iter().enumerate() {
            self.csc_values[self.to_csc[k]] = v;
        }
        let mat = SparseColMatRef::new(self.symbolic_csc.as_ref(), &self.csc_values);
        let lu = Lu::try_new_with_symbolic(self.symbolic.clone(), mat)
            .map_err(|e| Error::LinearSolver(format!("numeric LU failed: {e:?}")))?;
        self.lu = Some(lu);
        Ok(())
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let lu = self
            .lu
            .as_ref()
            .ok_or_else(|| Error::LinearSolver("solve called before factor".into()))?;
        if b.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "rhs has length {}, expected {}",
                b.len(),
                self.n
            )));
        }
        let mut x = b.to_vec();
        lu.solve_in_place_with_conj(Conj::No, MatMut::from_column_major_slice_mut(&mut x, self.n, 1));
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolver("LU solve produced non-finite values".into()));
        }
        Ok(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradients from the initial guess in `x`.
/// Stops when `‖b - A x‖ <= tol · max(‖b‖, 1e-300)`.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgReport> {
    let n = b.len();
    let inv_diag: Vec<f64> = (0..n)
        .map(|i| {
            let d = a.get(i, i);
            if d > 0.0 {
                Ok(1.0 / d)
            } else {
                Err(Error::LinearSolver(format!(
                    "CG needs a positive diagonal, row {i} has {d}"
                )))
            }
        })
        .collect::<Result<_>>()?;
    let mut r: Vec<f64> = b.iter().zip(a.mul_vec(x)).map(|(b, ax)| b - ax).collect();
    let target = tol * dense::norm(b).max(1e-300);
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dense::dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 0..=max_iter {
        let res = dense::norm(&r);
        if res <= target {
            return Ok(CgReport {
                iterations: it,
                residual: res,
            });
        }
        if it == max_iter {
            return Err(Error::LinearSolver(format!(
                "CG did not converge in {max_iter} iterations (residual {res:.3e})"
            )));
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dense::dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::LinearSolver("CG met a non-positive curvature direction".into()));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dense::dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize, shift: f64) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + shift));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn direct_solves_and_refactors() {
        let a = laplacian_1d(50, 0.0);
        let mut solver = DirectSolver::new(&a).unwrap();
        let x_true: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        solver.factor(&a).unwrap();
        let x = solver.solve(&a.mul_vec(&x_true)).unwrap();
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-11);
        }
        let a2 = laplacian_1d(50, 1.0);
        solver.factor(&a2).unwrap();
        let x = solver.solve(&a2.mul_vec(&x_true)).unwrap();
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn direct_handles_nonsymmetric() {
        let a = CsrMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, -2.0), (1, 1, 1.0), (2, 2, 3.0), (2, 0, 1.0)]);
        let mut s = DirectSolver::new(&a).unwrap();
        s.factor(&a).unwrap();
        let x = s.solve(&[3.0, -1.0, 4.0]).unwrap();
        let ax = a.mul_vec(&x);
        for (u, v) in ax.iter().zip([3.0, -1.0, 4.0]) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn solve_before_factor_is_an_error() {
        let a = laplacian_1d(3, 0.0);
        let s = DirectSolver::new(&a).unwrap();
        assert!(matches!(s.solve(&[1.0; 3]), Err(Error::LinearSolver(_))));
    }

    #[test]
    fn cg_matches_direct() {
        let a = laplacian_1d(40, 0.1);
        let b: Vec<f64> = (0..40).map(|i| 1.0 + i as f64).collect();
        let mut x = vec![0.0; 40];
        let report = conjugate_gradient(&a, &b, &mut x, 1e-13, 200).unwrap();
        assert!(report.iterations <= 40);
        let mut s = DirectSolver::new(&a).unwrap();
        s.factor(&a).unwrap();
        let xd = s.solve(&b).unwrap();
        for (u, v) in x.iter().zip(&xd) {
            assert!((u - v).abs() < 1e-9 * v.abs().max(1.0));
        }
    }

    #[test]
    fn cg_reports_non_convergence() {
        let a = laplacian_1d(40, 0.0);
        let mut x = vec![0.0; 40];
        assert!(conjugate_gradient(&a, &[1.0; 40], &mut x, 1e-14, 3).is_err());
    }
}
