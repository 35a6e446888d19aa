use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use super::{gauss_legendre, SparseMatrix};
use crate::error::{Error, Result};
use crate::geometry::{JacobianSample, MultiPatch, Patch};
use crate::spaces::{ActiveFunction, DiscreteSpace, MultiPatchSpace};
use crate::splines::TensorBasisSpec;

/// Material coefficient or source term: a constant or a function of the
/// physical point.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    Field(Arc<PointFn>),
}

/// Scalar function of the physical point.
pub type PointFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

impl Coefficient {
    pub fn field(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::Field(Arc::new(f))
    }

    pub fn at(&self, x: &[f64]) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Field(f) => f(x),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(c: f64) -> Self {
        Coefficient::Constant(c)
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::Field(_) => f.write_str("Field(..)"),
        }
    }
}

/// `(span, points, weights)` of one element in parameter coordinates.
pub type ElementRule = (usize, Vec<f64>, Vec<f64>);

/// Gauss-Legendre points and weights on every non-empty span of each
/// direction.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    /// Per direction, one entry per element.
    pub dirs: Vec<Vec<ElementRule>>,
}

impl QuadratureRule {
    /// `points[d]` Gauss points per span in direction `d`.
    pub fn new(basis: &TensorBasisSpec, points: &[usize]) -> Self {
        let dirs = basis
            .dirs
            .iter()
            .zip(points)
            .map(|(kv, &n)| {
                let (gx, gw) = gauss_legendre(n);
                let t = kv.knots();
                kv.element_spans()
                    .into_iter()
                    .map(|s| {
                        let (a, h) = (t[s], t[s + 1] - t[s]);
                        (s, gx.iter().map(|x| a + h * x).collect(), gw.iter().map(|w| h * w).collect())
                    })
                    .collect()
            })
            .collect();
        Self { dirs }
    }

    /// `p + 1` points per direction for a degree-`p` base space.
    pub fn for_space(space: &DiscreteSpace) -> Self {
        let pts: Vec<usize> = space.base().degrees().iter().map(|p| p + 1).collect();
        Self::new(space.base(), &pts)
    }

    /// Element index triples `(e0, e1, e2)` in lexicographic order.
    pub(crate) fn elements(&self) -> Vec<[usize; 3]> {
        let n: Vec<usize> = (0..3).map(|k| self.dirs.get(k).map_or(1, Vec::len)).collect();
        let mut out = Vec::with_capacity(n.iter().product());
        for c in 0..n[2] {
            for b in 0..n[1] {
                for a in 0..n[0] {
                    out.push([a, b, c]);
                }
            }
        }
        out
    }

    // quadrature points of one element: (xi, weight, base spans)
    pub(crate) fn element_points(&self, e: [usize; 3]) -> (Vec<(Vec<f64>, f64)>, [usize; 3]) {
        let d = self.dirs.len();
        let mut spans = [0; 3];
        let mut pts = vec![(Vec::new(), 1.0)];
        for k in 0..d {
            let (s, x, w) = &self.dirs[k][e[k]];
            spans[k] = *s;
            let mut next = Vec::with_capacity(pts.len() * x.len());
            // first direction fastest
            for (xk, wk) in x.iter().zip(w) {
                for (p, pw) in &pts {
                    let mut q: Vec<f64> = p.clone();
                    q.push(*xk);
                    next.push((q, pw * wk));
                }
            }
            pts = next;
        }
        (pts, spans)
    }
}

/// Quantity integrated against itself in a bilinear form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrand {
    /// Physical value of the form (via its pushforward).
    Value,
    /// Gradient of a kind-0 function.
    Gradient,
    /// Curl of a kind-1 function (scalar in 2D).
    Curl,
    /// Divergence of a kind-2 function.
    Divergence,
}

// physical feature vector of one basis function; returns its length
fn feature(
    space: &DiscreteSpace,
    what: Integrand,
    jac: &JacobianSample,
    f: &ActiveFunction,
    out: &mut [f64; 3],
) -> Result<usize> {
    let d = space.dim();
    let c = f.component;
    Ok(match (what, space.kind()) {
        (Integrand::Value, 0) => {
            out[0] = f.value;
            1
        }
        (Integrand::Value, 3) => {
            out[0] = f.value / jac.det;
            1
        }
        (Integrand::Value, 1) => {
            let mut v = [0.0; 3];
            v[c] = f.value;
            *out = jac.apply_inverse_transpose(&v)?;
            d
        }
        (Integrand::Value, 2) => {
            let mut v = [0.0; 3];
            v[c] = f.value;
            let w = jac.apply(&v);
            for k in 0..3 {
                out[k] = w[k] / jac.det;
            }
            3
        }
        (Integrand::Gradient, 0) => {
            *out = jac.apply_inverse_transpose(&f.grad)?;
            d
        }
        (Integrand::Curl, 1) if d == 2 => {
            out[0] = if c == 0 { -f.grad[1] } else { f.grad[0] } / jac.det;
            1
        }
        (Integrand::Curl, 1) if d == 3 => {
            // curl(B e_c) = grad B x e_c
            let g = f.grad;
            let mut r = [0.0; 3];
            let (a, b) = ((c + 1) % 3, (c + 2) % 3);
            r[a] = g[b];
            r[b] = -g[a];
            let w = jac.apply(&r);
            for k in 0..3 {
                out[k] = w[k] / jac.det;
            }
            3
        }
        (Integrand::Divergence, 2) => {
            out[0] = f.grad[c] / jac.det;
            1
        }
        (w, k) => return Err(Error::validation(format!("{w:?} is not defined for kind-{k} spaces in {d}D"))),
    })
}

fn check_patch(patch: &Patch, space: &DiscreteSpace) -> Result<()> {
    if patch.param_dim() != space.dim() {
        return Err(Error::validation(format!(
            "space is {}-variate but the patch is {}-variate",
            space.dim(),
            patch.param_dim()
        )));
    }
    if space.kind() > 0 && patch.phys_dim() != patch.param_dim() {
        return Err(Error::validation(
            "vector-valued forms need a patch with matching parametric and physical dimension",
        ));
    }
    Ok(())
}

/// `A_ij = int c <Q(phi_i), Q(phi_j)> dOmega` over one patch.
pub fn assemble_bilinear(
    patch: &Patch,
    space: &DiscreteSpace,
    what: Integrand,
    coeff: &Coefficient,
) -> Result<SparseMatrix> {
    check_patch(patch, space)?;
    let rule = QuadratureRule::for_space(space);
    let per_element = rule
        .elements()
        .into_par_iter()
        .map(|e| {
            let (pts, spans) = rule.element_points(e);
            let mut dofs: Vec<usize> = Vec::new();
            let mut local: Vec<f64> = Vec::new();
            let mut feats: Vec<[f64; 3]> = Vec::new();
            for (xi, w) in &pts {
                let (x, jac) = patch.map_and_jacobian(xi)?;
                let act = space.eval_active_in(xi, spans);
                if dofs.is_empty() {
                    dofs = act.iter().map(|f| f.dof).collect();
                    local = vec![0.0; dofs.len() * dofs.len()];
                }
                feats.clear();
                let mut q = 0;
                for f in &act {
                    let mut out = [0.0; 3];
                    q = feature(space, what, &jac, f, &mut out)?;
                    feats.push(out);
                }
                let scale = w * jac.det * coeff.at(&x[..patch.phys_dim()]);
                let n = dofs.len();
                for i in 0..n {
                    for j in i..n {
                        let v: f64 = (0..q).map(|k| feats[i][k] * feats[j][k]).sum();
                        local[i * n + j] += scale * v;
                    }
                }
            }
            let n = dofs.len();
            let mut trip = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    let v = if j >= i { local[i * n + j] } else { local[j * n + i] };
                    trip.push((dofs[i], dofs[j], v));
                }
            }
            Ok(trip)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = space.dof_count();
    SparseMatrix::from_triplets(n, n, per_element.into_iter().flatten().collect())
}

/// Load vector `b_i = int f phi_i dOmega` for a scalar space (kind 0 or 3).
pub fn op_f_v(patch: &Patch, space: &DiscreteSpace, source: &Coefficient) -> Result<Vec<f64>> {
    check_patch(patch, space)?;
    if space.num_components() != 1 {
        return Err(Error::validation("load vectors are assembled for scalar spaces only"));
    }
    let rule = QuadratureRule::for_space(space);
    let per_element = rule
        .elements()
        .into_par_iter()
        .map(|e| {
            let (pts, spans) = rule.element_points(e);
            let mut out: Vec<(usize, f64)> = Vec::new();
            for (xi, w) in &pts {
                let (x, jac) = patch.map_and_jacobian(xi)?;
                let fx = source.at(&x[..patch.phys_dim()]);
                for (k, f) in space.eval_active_in(xi, spans).iter().enumerate() {
                    let mut v = [0.0; 3];
                    feature(space, Integrand::Value, &jac, f, &mut v)?;
                    let c = w * jac.det * fx * v[0];
                    match out.get_mut(k) {
                        Some(slot) => slot.1 += c,
                        None => out.push((f.dof, c)),
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut b = vec![0.0; space.dof_count()];
    for (i, v) in per_element.into_iter().flatten() {
        b[i] += v;
    }
    Ok(b)
}

/// Mass matrix `int c u . v` with the pushforward of the space kind.
pub fn op_u_v(patch: &Patch, space: &DiscreteSpace, coeff: &Coefficient) -> Result<SparseMatrix> {
    assemble_bilinear(patch, space, Integrand::Value, coeff)
}

/// Stiffness matrix `int nu grad u . grad v` (kind 0).
pub fn op_gradu_gradv(patch: &Patch, space: &DiscreteSpace, nu: &Coefficient) -> Result<SparseMatrix> {
    assemble_bilinear(patch, space, Integrand::Gradient, nu)
}

/// Curl-curl matrix `int nu curl u . curl v` (kind 1).
pub fn op_curlu_curlv(patch: &Patch, space: &DiscreteSpace, nu: &Coefficient) -> Result<SparseMatrix> {
    assemble_bilinear(patch, space, Integrand::Curl, nu)
}

fn per_patch<'a>(coeffs: &'a [Coefficient], n: usize) -> Result<impl Fn(usize) -> &'a Coefficient> {
    if coeffs.len() != 1 && coeffs.len() != n {
        return Err(Error::validation(format!("need 1 or {n} coefficients (one per patch), got {}", coeffs.len())));
    }
    Ok(move |k: usize| if coeffs.len() == 1 { &coeffs[0] } else { &coeffs[k] })
}

/// Assembles a scalar bilinear form over all patches into the global
/// numbering of `space`. `coeffs` holds one coefficient per patch (or one
/// for all).
pub fn assemble_multipatch(
    mp: &MultiPatch,
    space: &MultiPatchSpace,
    what: Integrand,
    coeffs: &[Coefficient],
) -> Result<SparseMatrix> {
    let coeff = per_patch(coeffs, mp.patches().len())?;
    let mut trip = Vec::new();
    for (k, (patch, s)) in mp.patches().iter().zip(space.spaces()).enumerate() {
        let local = assemble_bilinear(patch, s, what, coeff(k))?;
        let map = space.global_dofs(k);
        trip.extend(local.triplets().map(|(i, j, v)| (map[i], map[j], v)));
    }
    SparseMatrix::from_triplets(space.dof_count(), space.dof_count(), trip)
}

/// Global load vector over all patches.
pub fn load_multipatch(mp: &MultiPatch, space: &MultiPatchSpace, sources: &[Coefficient]) -> Result<Vec<f64>> {
    let source = per_patch(sources, mp.patches().len())?;
    let mut b = vec![0.0; space.dof_count()];
    for (k, (patch, s)) in mp.patches().iter().zip(space.spaces()).enumerate() {
        for (i, v) in op_f_v(patch, s, source(k))?.into_iter().enumerate() {
            b[space.global_dofs(k)[i]] += v;
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{conics, displace_controls};
    use crate::spaces::{discrete_diff, make_refined_space, make_space, DiscreteSpace};
    use crate::splines::KnotVector;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn linear_element_mass() {
        let p = conics::line(&[0.0], &[1.0]).unwrap();
        let s = make_space(&p, 0).unwrap();
        let m = op_u_v(&p, &s, &1.0.into()).unwrap();
        let want = [[1.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 3.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(m.get(i, j), want[i][j], 1e-15));
            }
        }
    }

    #[test]
    fn bilinear_element_stiffness() {
        let p = conics::rectangle([0.0, 1.0], [0.0, 1.0]).unwrap();
        let s = make_space(&p, 0).unwrap();
        let k = op_gradu_gradv(&p, &s, &1.0.into()).unwrap();
        let want = [[4.0, -1.0, -1.0, -2.0], [-1.0, 4.0, -2.0, -1.0], [-1.0, -2.0, 4.0, -1.0], [-2.0, -1.0, -1.0, 4.0]];
        for i in 0..4 {
            for j in 0..4 {
                assert!(close(k.get(i, j), want[i][j] / 6.0, 1e-15));
            }
        }
        let k2 = op_gradu_gradv(&p, &s, &2.0.into()).unwrap();
        assert_eq!(k2, k.scaled(2.0));
    }

    #[test]
    fn mass_sums_to_area_and_scales_with_det() {
        let p = conics::rectangle([0.0, 1.0], [0.0, 1.0]).unwrap();
        let s = make_refined_space(&p, 0, &[2], &[3]).unwrap();
        let m = op_u_v(&p, &s, &1.0.into()).unwrap();
        assert!(close(m.values().iter().sum(), 1.0, 1e-13));
        let q = conics::rectangle([0.0, 2.0], [0.0, 3.0]).unwrap();
        let m6 = op_u_v(&q, &s, &1.0.into()).unwrap();
        for (i, j, v) in m.triplets() {
            assert!(close(m6.get(i, j), 6.0 * v, 1e-13));
        }
        assert!(m.asymmetry() < 1e-15);
    }

    #[test]
    fn stiffness_annihilates_constants() {
        let mp = conics::disc(1.0).unwrap();
        let sp = crate::spaces::couple_scalar_multipatch(&mp, &[2], &[2]).unwrap();
        let k = assemble_multipatch(&mp, &sp, Integrand::Gradient, &[1.0.into()]).unwrap();
        let r = k.matvec(&vec![1.0; sp.dof_count()]);
        assert!(r.iter().all(|v| v.abs() < 1e-12));
        let m = assemble_multipatch(&mp, &sp, Integrand::Value, &[1.0.into()]).unwrap();
        assert!(close(m.values().iter().sum(), std::f64::consts::PI, 1e-5));
    }

    #[test]
    fn curl_curl_kills_gradients() {
        let p = conics::ring_sector(1.0, 2.0, 0.2, 1.2).unwrap();
        let s0 = make_refined_space(&p, 0, &[2], &[3]).unwrap();
        let (s1, g) = discrete_diff(&s0).unwrap();
        let k = op_curlu_curlv(&p, &s1, &1.0.into()).unwrap();
        assert!(k.asymmetry() < 1e-12);
        let kg = k.matmul(&g).unwrap();
        assert!(kg.max_abs() < 1e-11);
    }

    #[test]
    fn curl_curl_3d_kills_gradients() {
        let p = conics::cuboid([0.0, 1.0], [0.0, 2.0], [0.0, 1.0]).unwrap();
        let delta: Vec<Vec<f64>> = (0..8).map(|k| vec![0.1 * (k % 3) as f64, 0.0, 0.05 * (k / 4) as f64]).collect();
        let p = displace_controls(&p, &delta).unwrap();
        let s0 = make_refined_space(&p, 0, &[2], &[2]).unwrap();
        let (s1, g) = discrete_diff(&s0).unwrap();
        let k = op_curlu_curlv(&p, &s1, &1.0.into()).unwrap();
        assert!(k.matmul(&g).unwrap().max_abs() < 1e-11);
    }

    #[test]
    fn unit_source_integrates_area() {
        let mp = conics::two_squares().unwrap();
        let sp = crate::spaces::couple_scalar_multipatch(&mp, &[2], &[2]).unwrap();
        let b = load_multipatch(&mp, &sp, &[1.0.into(), 3.0.into()]).unwrap();
        assert!(close(b.iter().sum(), 4.0, 1e-12));
        let z = load_multipatch(&mp, &sp, &[0.0.into()]).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn nnz_per_row_bounded_by_band() {
        for p in 1..=3 {
            let kv = KnotVector::uniform(p, 8).unwrap();
            let base = TensorBasisSpec::new(vec![kv.clone(), kv]).unwrap();
            let s = DiscreteSpace::new(base, 0).unwrap();
            let patch = conics::rectangle([0.0, 1.0], [0.0, 1.0]).unwrap();
            let m = op_u_v(&patch, &s, &1.0.into()).unwrap();
            let max = (0..m.nrows()).map(|i| m.row_nnz(i)).max().unwrap();
            assert_eq!(max, (2 * p + 1) * (2 * p + 1));
        }
    }
}
