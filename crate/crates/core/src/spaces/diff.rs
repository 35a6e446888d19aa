use super::DiscreteSpace;
use crate::assembly::SparseMatrix;
use crate::error::{Error, Result};
use crate::splines::{KnotVector, TensorBasisSpec};

/// Univariate derivative as a `(n-1) x n` matrix of `(row, col, value)`
/// entries: `d/dxi sum c_i B_i^p = sum (D c)_i B_i^{p-1}` on the knot vector
/// with its first and last knot removed.
pub fn derivative_matrix_1d(kv: &KnotVector) -> Vec<(usize, usize, f64)> {
    let p = kv.degree();
    let t = kv.knots();
    let mut out = Vec::with_capacity(2 * kv.num_basis());
    for i in 0..kv.num_basis().saturating_sub(1) {
        let h = t[i + p + 1] - t[i + 1];
        // a zero-length support only occurs for fully repeated knots; that
        // reduced function vanishes identically
        let a = if h == 0.0 { 0.0 } else { p as f64 / h };
        out.push((i, i, -a));
        out.push((i, i + 1, a));
    }
    out
}

/// Exterior derivative of a space: grad (kind 0), curl (kind 1) or div
/// (kind 2, 3D). In 2D the curl of a kind-1 field is the scalar
/// `d1 v2 - d2 v1` in the top (kind-3) space.
///
/// Returns the target space and the coefficient map.
pub fn discrete_diff(space: &DiscreteSpace) -> Result<(DiscreteSpace, SparseMatrix)> {
    let d = space.dim();
    let (target_kind, terms): (usize, Vec<(usize, usize, usize, f64)>) = match (space.kind(), d) {
        // (out component, in component, direction, sign)
        (0, _) => (1, (0..d).map(|j| (j, 0, j, 1.0)).collect()),
        (1, 2) => (3, vec![(0, 1, 0, 1.0), (0, 0, 1, -1.0)]),
        (1, 3) => (
            2,
            (0..3).flat_map(|i| [(i, (i + 2) % 3, (i + 1) % 3, 1.0), (i, (i + 1) % 3, (i + 2) % 3, -1.0)]).collect(),
        ),
        (2, 3) => (3, (0..3).map(|j| (0, j, j, 1.0)).collect()),
        (k, _) => return Err(Error::validation(format!("no discrete derivative for kind-{k} forms in {d}D"))),
    };
    let target = DiscreteSpace::new(space.base().clone(), target_kind)?.with_patch(space.patch());
    let mut trip = Vec::new();
    for (oc, ic, dir, sign) in terms {
        push_partial(
            &space.components()[ic],
            space.offset(ic),
            &target.components()[oc],
            target.offset(oc),
            dir,
            sign,
            &mut trip,
        );
    }
    let mat = SparseMatrix::from_triplets(target.dof_count(), space.dof_count(), trip)?;
    Ok((target, mat))
}

// Partial derivative in `dir` mapping component `src` to component `dst`.
fn push_partial(
    src: &TensorBasisSpec,
    src_off: usize,
    dst: &TensorBasisSpec,
    dst_off: usize,
    dir: usize,
    sign: f64,
    trip: &mut Vec<(usize, usize, f64)>,
) {
    let d1 = derivative_matrix_1d(&src.dirs[dir]);
    let shape = dst.shape();
    for k in 0..shape[2] {
        for j in 0..shape[1] {
            for i in 0..shape[0] {
                let idx = [i, j, k];
                let row = dst_off + dst.linear_index(idx);
                for &(_, col, a) in &d1[2 * idx[dir]..2 * idx[dir] + 2] {
                    let mut s = idx;
                    s[dir] = col;
                    trip.push((row, src_off + src.linear_index(s), sign * a));
                }
            }
        }
    }
}
