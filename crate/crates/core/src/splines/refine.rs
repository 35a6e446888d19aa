use super::KnotVector;
use crate::error::{Error, Result};

/// Dense `n_new x n_old` matrix mapping coarse coefficients to refined ones.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TransferMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Refined coefficients `T * coeffs`.
    pub fn apply(&self, coeffs: &[f64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.cols, "coefficient length mismatch");
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(coeffs).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Row `i` as (column, value) pairs with nonzero value.
    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.data[i * self.cols..(i + 1) * self.cols]
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| (j, *v))
    }

    // Left-multiplies by the (n+1) x n single-insertion matrix.
    fn insert_one(&self, lo: usize, hi: usize, alphas: &[f64]) -> Self {
        let rows = self.rows + 1;
        let mut data = vec![0.0; rows * self.cols];
        for i in 0..rows {
            let dst = &mut data[i * self.cols..(i + 1) * self.cols];
            if i < lo {
                dst.copy_from_slice(&self.data[i * self.cols..(i + 1) * self.cols]);
            } else if i > hi {
                dst.copy_from_slice(&self.data[(i - 1) * self.cols..i * self.cols]);
            } else {
                let a = alphas[i - lo];
                for j in 0..self.cols {
                    dst[j] = a * self.data[i * self.cols + j] + (1.0 - a) * self.data[(i - 1) * self.cols + j];
                }
            }
        }
        Self { rows, cols: self.cols, data }
    }
}

/// Inserts `new_knots` one at a time (Boehm's algorithm).
///
/// Returns the refined knot vector and the matrix `T` such that a spline with
/// coefficients `P` on `kv` equals the spline with coefficients `T * P` on the
/// refined vector.
pub fn refine_knots(kv: &KnotVector, new_knots: &[f64]) -> Result<(KnotVector, TransferMatrix)> {
    if new_knots.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::validation("knots to insert must be sorted"));
    }
    let p = kv.degree();
    let mut knots = kv.knots().to_vec();
    let mut t = TransferMatrix::identity(kv.num_basis());
    for &u in new_knots {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::validation(format!("inserted knot {u} must lie strictly inside (0, 1)")));
        }
        let s = knots.iter().filter(|&&k| k == u).count();
        if s + 1 > p + 1 {
            return Err(Error::validation(format!("inserting {u} would exceed multiplicity {}", p + 1)));
        }
        // span k with knots[k] <= u < knots[k+1]
        let k = knots.partition_point(|&x| x <= u) - 1;
        let lo = k + 1 - p;
        let hi = k - s;
        let alphas: Vec<f64> = (lo..=hi).map(|i| (u - knots[i]) / (knots[i + p] - knots[i])).collect();
        t = t.insert_one(lo, hi, &alphas);
        knots.insert(k + 1, u);
    }
    Ok((KnotVector::new(knots, p)?, t))
}
