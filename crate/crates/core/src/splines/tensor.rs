use super::{BasisValues, KnotVector};
use crate::error::{Error, Result};

/// Tensor-product spline space: one knot vector per parametric direction.
///
/// Functions are numbered lexicographically with the first index running
/// fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorBasisSpec {
    pub dirs: Vec<KnotVector>,
}

impl TensorBasisSpec {
    pub fn new(dirs: Vec<KnotVector>) -> Result<Self> {
        if dirs.is_empty() || dirs.len() > 3 {
            return Err(Error::validation(format!("tensor bases need 1 to 3 directions, got {}", dirs.len())));
        }
        Ok(Self { dirs })
    }

    pub fn dim(&self) -> usize {
        self.dirs.len()
    }

    /// Number of functions per direction, padded with 1 up to three entries.
    pub fn shape(&self) -> [usize; 3] {
        let mut s = [1; 3];
        for (d, kv) in self.dirs.iter().enumerate() {
            s[d] = kv.num_basis();
        }
        s
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.dirs.iter().map(KnotVector::degree).collect()
    }

    /// Total dimension, the product of the per-direction counts.
    pub fn size(&self) -> usize {
        self.shape().iter().product()
    }

    #[inline]
    pub fn linear_index(&self, idx: [usize; 3]) -> usize {
        let s = self.shape();
        idx[0] + s[0] * (idx[1] + s[1] * idx[2])
    }

    #[inline]
    pub fn multi_index(&self, mut lin: usize) -> [usize; 3] {
        let s = self.shape();
        let i0 = lin % s[0];
        lin /= s[0];
        [i0, lin % s[1], lin / s[1]]
    }

    pub fn eval(&self, xi: &[f64], max_deriv: usize) -> Result<TensorValues> {
        eval_tensor(self, xi, max_deriv)
    }
}

/// Active tensor-product functions at one point, stored as the univariate
/// factors.
#[derive(Clone, Debug)]
pub struct TensorValues {
    pub dirs: Vec<BasisValues>,
}

impl TensorValues {
    /// Number of active functions per direction, padded with 1.
    pub fn active_shape(&self) -> [usize; 3] {
        let mut s = [1; 3];
        for (d, b) in self.dirs.iter().enumerate() {
            s[d] = b.degree() + 1;
        }
        s
    }

    pub fn first(&self) -> [usize; 3] {
        let mut f = [0; 3];
        for (d, b) in self.dirs.iter().enumerate() {
            f[d] = b.first;
        }
        f
    }

    /// Mixed partial derivative of the active function with local multi-index
    /// `local`; `orders[d]` is the derivative order in direction `d`.
    pub fn derivative(&self, local: [usize; 3], orders: [usize; 3]) -> f64 {
        self.dirs.iter().enumerate().map(|(d, b)| b.get(orders[d], local[d])).product()
    }

    pub fn value(&self, local: [usize; 3]) -> f64 {
        self.derivative(local, [0; 3])
    }

    /// Iterates over `(global multi-index, local multi-index)` of all active
    /// functions, first direction fastest.
    pub fn active(&self) -> impl Iterator<Item = ([usize; 3], [usize; 3])> + '_ {
        let s = self.active_shape();
        let f = self.first();
        (0..s[2]).flat_map(move |k| {
            (0..s[1]).flat_map(move |j| (0..s[0]).map(move |i| ([f[0] + i, f[1] + j, f[2] + k], [i, j, k])))
        })
    }
}

/// Evaluates all active tensor-product functions and their partial
/// derivatives up to `max_deriv` in each direction.
pub fn eval_tensor(spec: &TensorBasisSpec, xi: &[f64], max_deriv: usize) -> Result<TensorValues> {
    if xi.len() != spec.dim() {
        return Err(Error::validation(format!(
            "point has {} coordinates but the basis is {}-variate",
            xi.len(),
            spec.dim()
        )));
    }
    let dirs = spec.dirs.iter().zip(xi).map(|(kv, &x)| kv.eval(x, max_deriv)).collect::<Result<Vec<_>>>()?;
    Ok(TensorValues { dirs })
}
