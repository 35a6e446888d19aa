use super::SparseMatrix;
use crate::error::{Error, Result};

/// Second operand of a constrained system.
#[derive(Clone, Copy, Debug)]
pub enum Operand<'a> {
    /// Mass matrix of a generalized eigenproblem; only homogeneous
    /// constraints make sense here.
    Mass(&'a SparseMatrix),
    /// Right-hand side of a linear system.
    Load(&'a [f64]),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReducedOperand {
    Mass(SparseMatrix),
    Load(Vec<f64>),
}

/// Reinserts constrained values into full-length vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Recovery {
    len: usize,
    free: Vec<usize>,
    fixed: Vec<usize>,
    values: Vec<f64>,
}

impl Recovery {
    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn fixed(&self) -> &[usize] {
        &self.fixed
    }

    /// Full vector from the reduced solution.
    pub fn expand(&self, reduced: &[f64]) -> Result<Vec<f64>> {
        if reduced.len() != self.free.len() {
            return Err(Error::validation(format!(
                "reduced vector has length {}, expected {}",
                reduced.len(),
                self.free.len()
            )));
        }
        let mut out = vec![0.0; self.len];
        for (&i, &v) in self.free.iter().zip(reduced) {
            out[i] = v;
        }
        for (&i, &v) in self.fixed.iter().zip(&self.values) {
            out[i] = v;
        }
        Ok(out)
    }

    /// Keeps only the free entries of a full-length vector.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| full[i]).collect()
    }
}

/// Removes the rows and columns of `dofs` (elimination, not penalty).
///
/// `values` gives the prescribed values (empty means all zero). For a load
/// vector the known part is moved to the right-hand side; for a mass matrix
/// nonzero values are a usage error.
pub fn apply_dirichlet(
    k: &SparseMatrix,
    operand: Operand<'_>,
    dofs: &[usize],
    values: &[f64],
) -> Result<(SparseMatrix, ReducedOperand, Recovery)> {
    let n = k.nrows();
    if k.ncols() != n {
        return Err(Error::validation("system matrix must be square"));
    }
    if !values.is_empty() && values.len() != dofs.len() {
        return Err(Error::validation(format!("{} constrained DOFs but {} values", dofs.len(), values.len())));
    }
    let mut fixed_value = vec![None; n];
    for (t, &i) in dofs.iter().enumerate() {
        if i >= n {
            return Err(Error::validation(format!("constrained DOF {i} out of range {n}")));
        }
        fixed_value[i] = Some(values.get(t).copied().unwrap_or(0.0));
    }
    let free: Vec<usize> = (0..n).filter(|&i| fixed_value[i].is_none()).collect();
    let fixed: Vec<usize> = (0..n).filter(|&i| fixed_value[i].is_some()).collect();
    let vals: Vec<f64> = fixed.iter().map(|&i| fixed_value[i].unwrap_or(0.0)).collect();
    let reduced_k = k.submatrix(&free, &free);
    let op = match operand {
        Operand::Mass(m) => {
            if vals.iter().any(|&v| v != 0.0) {
                return Err(Error::Usage("eigenproblems accept only homogeneous boundary values".into()));
            }
            if (m.nrows(), m.ncols()) != (n, n) {
                return Err(Error::validation("mass matrix shape differs from the system matrix"));
            }
            ReducedOperand::Mass(m.submatrix(&free, &free))
        }
        Operand::Load(b) => {
            if b.len() != n {
                return Err(Error::validation("load vector length differs from the system size"));
            }
            let mut g = vec![0.0; n];
            for (&i, &v) in fixed.iter().zip(&vals) {
                g[i] = v;
            }
            let kg = k.matvec(&g);
            ReducedOperand::Load(free.iter().map(|&i| b[i] - kg[i]).collect())
        }
    };
    Ok((reduced_k, op, Recovery { len: n, free, fixed, values: vals }))
}
