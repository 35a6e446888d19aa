//! NURBS patches and the geometry mapping `F: [0,1]^d -> R^m`.
//!
//! Control points are stored in Cartesian form with a separate weight per
//! point, lexicographically ordered with the first parametric index running
//! fastest. Homogeneous coordinates appear only inside [`refine_patch`].

pub mod conics;
mod io;
mod multipatch;

pub use conics::{make_conic, ConicSpec, Shape};
pub use io::{bundled, bundled_names, load_geometry, parse_geometry, save_geometry, to_json};
pub(crate) use multipatch::{flatten, unflatten};
pub use multipatch::{Interface, MultiPatch, Side};

use crate::error::{Error, Result};
use crate::splines::{refine_knots, KnotVector, TensorBasisSpec};

/// Jacobians with determinant at or below this value are treated as singular.
pub const SINGULAR_DET: f64 = 1e-14;

/// A single NURBS patch.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    basis: TensorBasisSpec,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
    phys_dim: usize,
    pub(crate) index: usize,
}

/// Derivative of the mapping at one reference point.
///
/// `df[i][j]` is `dF_i / dxi_j`; entries outside the `m x d` block are zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobianSample {
    pub df: [[f64; 3]; 3],
    pub param_dim: usize,
    pub phys_dim: usize,
    /// Determinant when `d == m`, otherwise the length/area element
    /// `sqrt(det(DF^T DF))`.
    pub det: f64,
}

impl Patch {
    /// `points[k]` holds the `phys_dim` coordinates of control point `k`.
    pub fn new(basis: TensorBasisSpec, points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let n = basis.size();
        if points.len() != n || weights.len() != n {
            return Err(Error::validation(format!(
                "basis has {n} functions but {} control points and {} weights were given",
                points.len(),
                weights.len()
            )));
        }
        let phys_dim = points.first().map_or(0, Vec::len);
        if !(1..=3).contains(&phys_dim) || phys_dim < basis.dim() {
            return Err(Error::validation(format!(
                "control points must have between {} and 3 coordinates, got {phys_dim}",
                basis.dim()
            )));
        }
        if points.iter().any(|p| p.len() != phys_dim) {
            return Err(Error::validation("control points have inconsistent dimension"));
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::validation("control point coordinates must be finite"));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::validation(format!("weights must be positive, got {w}")));
        }
        let points = points
            .iter()
            .map(|p| {
                let mut q = [0.0; 3];
                q[..phys_dim].copy_from_slice(p);
                q
            })
            .collect();
        Ok(Self { basis, points, weights, phys_dim, index: 0 })
    }

    pub fn basis(&self) -> &TensorBasisSpec {
        &self.basis
    }

    pub fn param_dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn phys_dim(&self) -> usize {
        self.phys_dim
    }

    /// Position of this patch inside its multipatch (0 for standalone
    /// patches).
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k][..self.phys_dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.iter().map(move |p| &p[..self.phys_dim])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_rational(&self) -> bool {
        self.weights.iter().any(|&w| w != self.weights[0])
    }

    /// Physical point `F(xi)`.
    pub fn eval_map(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let (x, _) = self.eval_raw(xi, false)?;
        Ok(x[..self.phys_dim].to_vec())
    }

    /// Jacobian of the mapping; fails when the determinant (or length/area
    /// element) is not above [`SINGULAR_DET`].
    pub fn eval_jacobian(&self, xi: &[f64]) -> Result<JacobianSample> {
        self.map_and_jacobian(xi).map(|(_, j)| j)
    }

    /// Physical point and Jacobian in one pass.
    pub fn map_and_jacobian(&self, xi: &[f64]) -> Result<([f64; 3], JacobianSample)> {
        let (x, df) = self.eval_raw(xi, true)?;
        let jac = JacobianSample::new(df, self.param_dim(), self.phys_dim);
        if !(jac.det > SINGULAR_DET) {
            return Err(Error::SingularMapping { patch: self.index, point: xi.to_vec(), det: jac.det });
        }
        Ok((x, jac))
    }

    /// Same as [`Patch::map_and_jacobian`] without the singularity check.
    pub(crate) fn map_and_jacobian_unchecked(&self, xi: &[f64]) -> Result<([f64; 3], JacobianSample)> {
        let (x, df) = self.eval_raw(xi, true)?;
        Ok((x, JacobianSample::new(df, self.param_dim(), self.phys_dim)))
    }

    fn eval_raw(&self, xi: &[f64], with_jac: bool) -> Result<([f64; 3], [[f64; 3]; 3])> {
        let d = self.param_dim();
        let tv = self.basis.eval(xi, usize::from(with_jac))?;
        let mut cw = [0.0; 3];
        let mut w = 0.0;
        let mut dcw = [[0.0; 3]; 3];
        let mut dw = [0.0; 3];
        for (g, l) in tv.active() {
            let k = self.basis.linear_index(g);
            let wi = self.weights[k];
            let p = &self.points[k];
            let b = wi * tv.value(l);
            w += b;
            for c in 0..3 {
                cw[c] += b * p[c];
            }
            if with_jac {
                for dir in 0..d {
                    let mut ord = [0; 3];
                    ord[dir] = 1;
                    let db = wi * tv.derivative(l, ord);
                    dw[dir] += db;
                    for c in 0..3 {
                        dcw[c][dir] += db * p[c];
                    }
                }
            }
        }
        let x = [cw[0] / w, cw[1] / w, cw[2] / w];
        let mut df = [[0.0; 3]; 3];
        if with_jac {
            for c in 0..self.phys_dim {
                for dir in 0..d {
                    df[c][dir] = (dcw[c][dir] - x[c] * dw[dir]) / w;
                }
            }
        }
        Ok((x, df))
    }

    /// Control point indices on one side, lexicographic in the remaining
    /// directions.
    pub fn side_point_indices(&self, side: Side) -> Vec<usize> {
        side_indices(&self.basis, side)
    }

    /// Replaces one coordinate (or the weight, `axis == phys_dim`) of a
    /// control point.
    pub fn with_control_value(&self, point: usize, axis: usize, value: f64) -> Result<Patch> {
        if point >= self.num_points() || axis > self.phys_dim {
            return Err(Error::validation(format!("control point {point} / axis {axis} out of range")));
        }
        let mut out = self.clone();
        if axis == self.phys_dim {
            if !(value > 0.0) {
                return Err(Error::validation(format!("weights must be positive, got {value}")));
            }
            out.weights[point] = value;
        } else {
            out.points[point][axis] = value;
        }
        Ok(out)
    }
}

pub(crate) fn side_indices(basis: &TensorBasisSpec, side: Side) -> Vec<usize> {
    let shape = basis.shape();
    let fixed = if side.max { shape[side.dir] - 1 } else { 0 };
    let mut out = Vec::new();
    for k in 0..shape[2] {
        for j in 0..shape[1] {
            for i in 0..shape[0] {
                let idx = [i, j, k];
                if idx[side.dir] == fixed {
                    out.push(basis.linear_index(idx));
                }
            }
        }
    }
    out
}

fn det3(a: &[[f64; 3]; 3]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

impl JacobianSample {
    pub fn new(df: [[f64; 3]; 3], param_dim: usize, phys_dim: usize) -> Self {
        let det = if param_dim == phys_dim {
            det3(&Self::padded(&df, param_dim))
        } else {
            let mut g = [[0.0; 3]; 3];
            for a in 0..param_dim {
                for b in 0..param_dim {
                    g[a][b] = (0..phys_dim).map(|c| df[c][a] * df[c][b]).sum();
                }
            }
            det3(&Self::padded(&g, param_dim)).max(0.0).sqrt()
        };
        Self { df, param_dim, phys_dim, det }
    }

    fn padded(a: &[[f64; 3]; 3], d: usize) -> [[f64; 3]; 3] {
        let mut p = *a;
        for i in d..3 {
            p[i][i] = 1.0;
        }
        p
    }

    pub fn is_square(&self) -> bool {
        self.param_dim == self.phys_dim
    }

    /// Inverse of the square Jacobian (padded with the identity beyond `d`).
    pub fn inverse(&self) -> Result<[[f64; 3]; 3]> {
        if !self.is_square() {
            return Err(Error::validation("inverse requires a square Jacobian"));
        }
        let a = Self::padded(&self.df, self.param_dim);
        let det = det3(&a);
        if det == 0.0 {
            return Err(Error::solver("singular Jacobian"));
        }
        let mut inv = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                inv[i][j] = (a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]) / det;
            }
        }
        Ok(inv)
    }

    /// `DF * v`.
    pub fn apply(&self, v: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate().take(self.phys_dim) {
            *o = (0..self.param_dim).map(|j| self.df[i][j] * v[j]).sum();
        }
        out
    }

    /// `DF^T * v`.
    pub fn apply_transpose(&self, v: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (j, o) in out.iter_mut().enumerate().take(self.param_dim) {
            *o = (0..self.phys_dim).map(|i| self.df[i][j] * v[i]).sum();
        }
        out
    }

    /// `DF^{-T} * v`.
    pub fn apply_inverse_transpose(&self, v: &[f64]) -> Result<[f64; 3]> {
        let inv = self.inverse()?;
        let d = self.param_dim;
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate().take(d) {
            *o = (0..d).map(|j| inv[j][i] * v[j]).sum();
        }
        Ok(out)
    }

    /// `DF^{-1} * v`.
    pub fn apply_inverse(&self, v: &[f64]) -> Result<[f64; 3]> {
        let inv = self.inverse()?;
        let d = self.param_dim;
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate().take(d) {
            *o = (0..d).map(|j| inv[i][j] * v[j]).sum();
        }
        Ok(out)
    }
}

/// Maps reference values of a `kind`-form to physical values (the inverse
/// of the pull-back of that kind).
///
/// kind 0: identity; kind 1: `DF^{-T} v`; kind 2: `DF v / det`;
/// kind 3: `v / det`.
pub fn pushforward(kind: usize, jac: &JacobianSample, values: &[f64]) -> Result<Vec<f64>> {
    let d = jac.param_dim;
    check_form_shape(kind, d, values)?;
    if kind > 0 && !(jac.det > SINGULAR_DET) {
        return Err(Error::solver(format!("singular Jacobian (det = {:e})", jac.det)));
    }
    Ok(match kind {
        0 => values.to_vec(),
        1 => jac.apply_inverse_transpose(values)?[..d].to_vec(),
        2 => jac.apply(values)[..jac.phys_dim].iter().map(|v| v / jac.det).collect(),
        _ => vec![values[0] / jac.det],
    })
}

/// Pull-back of physical values to the reference domain.
///
/// kind 0: identity; kind 1: `DF^T v`; kind 2: `det DF^{-1} v`;
/// kind 3: `det v`.
pub fn pullback(kind: usize, jac: &JacobianSample, values: &[f64]) -> Result<Vec<f64>> {
    let d = jac.param_dim;
    check_form_shape(kind, d, values)?;
    Ok(match kind {
        0 => values.to_vec(),
        1 => jac.apply_transpose(values)[..d].to_vec(),
        2 => jac.apply_inverse(values)?[..d].iter().map(|v| v * jac.det).collect(),
        _ => vec![values[0] * jac.det],
    })
}

fn check_form_shape(kind: usize, d: usize, values: &[f64]) -> Result<()> {
    let expected = match kind {
        0 | 3 => 1,
        1 | 2 => d,
        _ => return Err(Error::validation(format!("form kind {kind} is not in 0..=3"))),
    };
    if values.len() != expected {
        return Err(Error::validation(format!("kind-{kind} values need {expected} components, got {}", values.len())));
    }
    Ok(())
}

/// New patch with control points `P + delta`; weights and basis unchanged.
pub fn displace_controls(patch: &Patch, delta: &[Vec<f64>]) -> Result<Patch> {
    if delta.len() != patch.num_points() || delta.iter().any(|d| d.len() != patch.phys_dim) {
        return Err(Error::validation(format!(
            "displacement must have {} entries of dimension {}",
            patch.num_points(),
            patch.phys_dim
        )));
    }
    let mut out = patch.clone();
    for (p, d) in out.points.iter_mut().zip(delta) {
        for (c, v) in d.iter().enumerate() {
            p[c] += v;
        }
    }
    Ok(out)
}

/// Geometry-preserving h-refinement: every element in direction `d` is split
/// into `counts[d]` equal parts.
pub fn refine_patch(patch: &Patch, counts: &[usize]) -> Result<Patch> {
    let dim = patch.param_dim();
    if counts.len() != dim || counts.contains(&0) {
        return Err(Error::validation(format!("need {dim} subdivision counts, each at least 1")));
    }
    // homogeneous coordinates (w x, w y, w z, w)
    let mut data: Vec<[f64; 4]> =
        patch.points.iter().zip(&patch.weights).map(|(p, &w)| [w * p[0], w * p[1], w * p[2], w]).collect();
    let mut shape = patch.basis.shape();
    let mut dirs = Vec::with_capacity(dim);
    for (d, kv) in patch.basis.dirs.iter().enumerate() {
        let (kv2, t) = refine_knots(kv, &kv.subdivision_knots(counts[d]))?;
        let mut new_shape = shape;
        new_shape[d] = t.rows();
        let mut next = vec![[0.0; 4]; new_shape.iter().product()];
        let lin = |s: [usize; 3], i: [usize; 3]| i[0] + s[0] * (i[1] + s[1] * i[2]);
        for k in 0..new_shape[2] {
            for j in 0..new_shape[1] {
                for i in 0..new_shape[0] {
                    let dst = [i, j, k];
                    let mut acc = [0.0; 4];
                    for (col, a) in t.row_entries(dst[d]) {
                        let mut src = dst;
                        src[d] = col;
                        let v = data[lin(shape, src)];
                        for c in 0..4 {
                            acc[c] += a * v[c];
                        }
                    }
                    next[lin(new_shape, dst)] = acc;
                }
            }
        }
        data = next;
        shape = new_shape;
        dirs.push(kv2);
    }
    let basis = TensorBasisSpec::new(dirs)?;
    let m = patch.phys_dim;
    let points = data.iter().map(|h| (0..m).map(|c| h[c] / h[3]).collect()).collect();
    let weights = data.iter().map(|h| h[3]).collect();
    let mut out = Patch::new(basis, points, weights)?;
    out.index = patch.index;
    Ok(out)
}

/// Convenience: patch from knot vectors and `[coords..., w]` rows.
pub fn patch_from_rows(dirs: Vec<KnotVector>, rows: &[Vec<f64>]) -> Result<Patch> {
    let basis = TensorBasisSpec::new(dirs)?;
    let mut points = Vec::with_capacity(rows.len());
    let mut weights = Vec::with_capacity(rows.len());
    for r in rows {
        if r.len() < 2 {
            return Err(Error::validation("point rows need coordinates and a weight"));
        }
        points.push(r[..r.len() - 1].to_vec());
        weights.push(r[r.len() - 1]);
    }
    Patch::new(basis, points, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Patch {
        let kv = KnotVector::uniform(1, 1).unwrap();
        Patch::new(
            TensorBasisSpec::new(vec![kv.clone(), kv]).unwrap(),
            vec![vec![0., 0.], vec![1., 0.], vec![0., 1.], vec![1., 1.]],
            vec![1.0; 4],
        )
        .unwrap()
    }

    fn scaled_square(sx: f64, sy: f64) -> Patch {
        let p = unit_square();
        let delta: Vec<Vec<f64>> = p.points().map(|q| vec![q[0] * (sx - 1.0), q[1] * (sy - 1.0)]).collect();
        displace_controls(&p, &delta).unwrap()
    }

    #[test]
    fn straight_line_midpoint() {
        let p = conics::line(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(p.eval_map(&[0.5]).unwrap(), vec![0.5, 0.0]);
    }

    #[test]
    fn identity_patch_has_identity_jacobian() {
        let j = unit_square().eval_jacobian(&[0.3, 0.8]).unwrap();
        assert!((j.det - 1.0).abs() < 1e-15);
        for (r, row) in [[1.0, 0.0], [0.0, 1.0]].iter().enumerate() {
            for c in 0..2 {
                assert!((j.df[r][c] - row[c]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn affine_scaling_determinant() {
        let p = scaled_square(2.0, 3.0);
        for xi in [[0.1, 0.2], [0.5, 0.5], [1.0, 0.0]] {
            assert!((p.eval_jacobian(&xi).unwrap().det - 6.0).abs() < 1e-14);
        }
    }

    #[test]
    fn degenerate_patch_reports_singular_mapping() {
        let p = scaled_square(1.0, 0.0);
        let err = p.eval_jacobian(&[0.5, 0.5]).unwrap_err();
        assert!(matches!(err, Error::SingularMapping { patch: 0, .. }));
    }

    #[test]
    fn pushforward_identity_on_identity_map() {
        let j = unit_square().eval_jacobian(&[0.2, 0.7]).unwrap();
        for kind in 0..4 {
            let v: Vec<f64> = if kind == 0 || kind == 3 { vec![1.7] } else { vec![0.3, -2.0] };
            assert_eq!(pushforward(kind, &j, &v).unwrap(), v);
        }
        assert!(pushforward(1, &j, &[1.0]).is_err());
        assert!(pushforward(4, &j, &[1.0]).is_err());
    }

    #[test]
    fn refine_by_one_is_identity() {
        let p = unit_square();
        assert_eq!(refine_patch(&p, &[1, 1]).unwrap(), p);
    }

    #[test]
    fn displacement_shape_checked() {
        let p = unit_square();
        assert!(displace_controls(&p, &[vec![0.0, 0.0]]).is_err());
        let zero = vec![vec![0.0, 0.0]; 4];
        assert_eq!(displace_controls(&p, &zero).unwrap(), p);
    }
}
