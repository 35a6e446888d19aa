use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::assembly::SparseMatrix;
use crate::error::{Error, Result};

fn to_faer(a: &SparseMatrix) -> Result<SparseColMat<usize, f64>> {
    let trip: Vec<Triplet<usize, usize, f64>> = a.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    SparseColMat::try_new_from_triplets(a.nrows(), a.ncols(), &trip)
        .map_err(|e| Error::solver(format!("sparse matrix conversion failed: {e:?}")))
}

enum Factor {
    Cholesky(Llt<usize, f64>),
    Lu(Box<Lu<usize, f64>>),
}

/// Direct sparse factorization: Cholesky for SPD matrices, LU otherwise.
pub struct SparseFactor {
    n: usize,
    factor: Factor,
}

impl SparseFactor {
    /// Cholesky factorization; fails when the matrix is not positive
    /// definite.
    pub fn cholesky(a: &SparseMatrix) -> Result<Self> {
        check_square(a)?;
        let llt = to_faer(a)?.sp_cholesky(Side::Lower).map_err(|_| {
            Error::solver("matrix is not positive definite (is the problem missing a Dirichlet condition?)")
        })?;
        Ok(Self { n: a.nrows(), factor: Factor::Cholesky(llt) })
    }

    /// Cholesky when possible, LU with partial pivoting otherwise.
    pub fn general(a: &SparseMatrix) -> Result<Self> {
        if let Ok(f) = Self::cholesky(a) {
            return Ok(f);
        }
        let lu = to_faer(a)?.sp_lu().map_err(|e| Error::solver(format!("sparse LU failed: {e:?}")))?;
        Ok(Self { n: a.nrows(), factor: Factor::Lu(Box::new(lu)) })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "right-hand side length mismatch");
        let mut x = Mat::from_fn(self.n, 1, |i, _| b[i]);
        match &self.factor {
            Factor::Cholesky(f) => f.solve_in_place(x.as_mut()),
            Factor::Lu(f) => f.solve_in_place(x.as_mut()),
        }
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }
}

fn check_square(a: &SparseMatrix) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::validation("linear solves need a square matrix"));
    }
    Ok(())
}

/// Solves `A x = b` for symmetric positive definite `A`.
pub fn solve_spd(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.nrows() {
        return Err(Error::validation("right-hand side length differs from the matrix size"));
    }
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let x = SparseFactor::cholesky(a)?.solve(b);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::solver("linear solve produced non-finite values"));
    }
    Ok(x)
}
