//! The discrete spline de Rham complex.
//!
//! Form kinds follow the 3D sequence `H1 -> H(curl) -> H(div) -> L2`:
//!
//! | kind | components | reduced directions |
//! |------|------------|--------------------|
//! | 0    | 1          | none               |
//! | 1    | d          | component `j` reduces direction `j` |
//! | 2    | 3 (3D only)| component `j` reduces all but `j` |
//! | 3    | 1          | all                |
//!
//! "Reduced" means degree `p - 1` on the knot vector with the first and last
//! knot removed. In 2D the sequence is `S0 -grad-> S1 -curl-> S3` with the
//! scalar curl `d1 v2 - d2 v1`; in 1D kinds 1 and 3 coincide.

mod diff;
mod multipatch;

pub use diff::{derivative_matrix_1d, discrete_diff};
pub use multipatch::{couple_scalar_multipatch, MultiPatchSpace};

use crate::error::{Error, Result};
use crate::geometry::{Patch, Side};
use crate::splines::{BasisValues, KnotVector, TensorBasisSpec};

/// Spline space of one form kind on one patch.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSpace {
    kind: usize,
    base: TensorBasisSpec,
    components: Vec<TensorBasisSpec>,
    reduced: Vec<[bool; 3]>,
    offsets: Vec<usize>,
    patch: usize,
}

/// One active basis function at a reference point: the scalar tensor
/// B-spline of its component and that B-spline's reference gradient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActiveFunction {
    pub dof: usize,
    pub component: usize,
    pub value: f64,
    pub grad: [f64; 3],
}

impl DiscreteSpace {
    /// Space of the given kind built from the degree-`p` base space.
    pub fn new(base: TensorBasisSpec, kind: usize) -> Result<Self> {
        let d = base.dim();
        let reduced: Vec<[bool; 3]> = match (kind, d) {
            (0, _) => vec![[false; 3]],
            (1, _) => (0..d).map(|j| mask(|k| k == j)).collect(),
            (2, 3) => (0..3).map(|j| mask(|k| k != j)).collect(),
            (3, _) => vec![mask(|k| k < d)],
            (2, _) => return Err(Error::validation(format!("kind-2 spaces exist only in 3D (got dimension {d})"))),
            _ => return Err(Error::validation(format!("form kind {kind} is not in 0..=3"))),
        };
        let mut components = Vec::with_capacity(reduced.len());
        for r in &reduced {
            let dirs = base
                .dirs
                .iter()
                .enumerate()
                .map(|(k, kv)| if r[k] { reduce(kv, kind) } else { Ok(kv.clone()) })
                .collect::<Result<Vec<_>>>()?;
            components.push(TensorBasisSpec::new(dirs)?);
        }
        let mut offsets = vec![0];
        for c in &components {
            offsets.push(offsets.last().copied().unwrap_or(0) + c.size());
        }
        Ok(Self { kind, base, components, reduced, offsets, patch: 0 })
    }

    pub fn kind(&self) -> usize {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// The degree-`p` scalar space the complex is built from.
    pub fn base(&self) -> &TensorBasisSpec {
        &self.base
    }

    pub fn components(&self) -> &[TensorBasisSpec] {
        &self.components
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn offset(&self, component: usize) -> usize {
        self.offsets[component]
    }

    pub fn dof_count(&self) -> usize {
        *self.offsets.last().expect("offsets are non-empty")
    }

    /// Index of the owning patch in its multipatch.
    pub fn patch(&self) -> usize {
        self.patch
    }

    pub(crate) fn with_patch(mut self, patch: usize) -> Self {
        self.patch = patch;
        self
    }

    /// Whether component `c` has reduced degree in direction `dir`.
    pub fn is_reduced(&self, c: usize, dir: usize) -> bool {
        self.reduced[c][dir]
    }

    /// `(component, multi-index)` of a global DOF.
    pub fn locate(&self, dof: usize) -> (usize, [usize; 3]) {
        let c = self.offsets.partition_point(|&o| o <= dof) - 1;
        (c, self.components[c].multi_index(dof - self.offsets[c]))
    }

    pub fn dof(&self, component: usize, idx: [usize; 3]) -> usize {
        self.offsets[component] + self.components[component].linear_index(idx)
    }

    /// Base-space span indices of the element containing `xi`.
    pub fn spans(&self, xi: &[f64]) -> Result<[usize; 3]> {
        if xi.len() != self.dim() {
            return Err(Error::validation(format!(
                "point has {} coordinates, space is {}-variate",
                xi.len(),
                self.dim()
            )));
        }
        let mut s = [0; 3];
        for (k, kv) in self.base.dirs.iter().enumerate() {
            s[k] = kv.find_span(xi[k])?;
        }
        Ok(s)
    }

    /// All functions active at `xi` with values and reference gradients.
    pub fn eval_active(&self, xi: &[f64]) -> Result<Vec<ActiveFunction>> {
        let spans = self.spans(xi)?;
        Ok(self.eval_active_in(xi, spans))
    }

    /// Like [`DiscreteSpace::eval_active`] inside a known element (`spans`
    /// index the base knot vectors).
    pub fn eval_active_in(&self, xi: &[f64], spans: [usize; 3]) -> Vec<ActiveFunction> {
        let d = self.dim();
        let mut full: Vec<Option<BasisValues>> = vec![None; d];
        let mut red: Vec<Option<BasisValues>> = vec![None; d];
        for k in 0..d {
            if self.reduced.iter().any(|r| !r[k]) {
                full[k] = Some(self.base.dirs[k].eval_in_span(spans[k], xi[k], 1));
            }
            if self.reduced.iter().any(|r| r[k]) {
                let kv = &self.components[self.reduced.iter().position(|r| r[k]).expect("some")].dirs[k];
                red[k] = Some(kv.eval_in_span(spans[k] - 1, xi[k], 1));
            }
        }
        let mut out = Vec::new();
        for (c, r) in self.reduced.iter().enumerate() {
            let vals: Vec<&BasisValues> =
                (0..d).map(|k| if r[k] { red[k].as_ref() } else { full[k].as_ref() }.expect("evaluated")).collect();
            let mut shape = [1; 3];
            for k in 0..d {
                shape[k] = vals[k].degree() + 1;
            }
            for l2 in 0..shape[2] {
                for l1 in 0..shape[1] {
                    for l0 in 0..shape[0] {
                        let l = [l0, l1, l2];
                        let mut idx = [0; 3];
                        let mut value = 1.0;
                        let mut grad = [1.0; 3];
                        for k in 0..d {
                            idx[k] = vals[k].first + l[k];
                            let v = vals[k].get(0, l[k]);
                            let dv = vals[k].get(1, l[k]);
                            value *= v;
                            for (g, gk) in grad.iter_mut().enumerate().take(d) {
                                *gk *= if g == k { dv } else { v };
                            }
                        }
                        for gk in grad.iter_mut().skip(d) {
                            *gk = 0.0;
                        }
                        out.push(ActiveFunction { dof: self.dof(c, idx), component: c, value, grad });
                    }
                }
            }
        }
        out
    }

    /// Reference-domain value of a field with coefficients `coeffs`:
    /// one entry for kinds 0 and 3, one per component otherwise.
    pub fn eval_reference(&self, coeffs: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
        self.check_coeffs(coeffs)?;
        let mut out = vec![0.0; self.num_components()];
        for f in self.eval_active(xi)? {
            out[f.component] += coeffs[f.dof] * f.value;
        }
        Ok(out)
    }

    /// Reference gradient of a kind-0 field.
    pub fn eval_reference_grad(&self, coeffs: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
        if self.kind != 0 {
            return Err(Error::validation("gradient evaluation needs a kind-0 space"));
        }
        self.check_coeffs(coeffs)?;
        let mut out = vec![0.0; self.dim()];
        for f in self.eval_active(xi)? {
            for (k, o) in out.iter_mut().enumerate() {
                *o += coeffs[f.dof] * f.grad[k];
            }
        }
        Ok(out)
    }

    pub(crate) fn check_coeffs(&self, coeffs: &[f64]) -> Result<()> {
        if coeffs.len() != self.dof_count() {
            return Err(Error::validation(format!(
                "coefficient vector has length {}, space has {} DOFs",
                coeffs.len(),
                self.dof_count()
            )));
        }
        Ok(())
    }

    /// DOFs with nonzero trace on any of `sides`: all functions touching
    /// the side for kind 0, the tangential components for kind 1, the
    /// normal component for kind 2 and none for kind 3.
    pub fn boundary_dofs(&self, sides: &[Side]) -> Vec<usize> {
        let mut out = Vec::new();
        for side in sides {
            for c in 0..self.num_components() {
                let on_trace = match self.kind {
                    0 => true,
                    1 => self.dim() > 1 && c != side.dir,
                    2 => c == side.dir,
                    _ => false,
                };
                if !on_trace || side.dir >= self.dim() {
                    continue;
                }
                let off = self.offsets[c];
                out.extend(crate::geometry::side_indices(&self.components[c], *side).into_iter().map(|i| i + off));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn mask(f: impl Fn(usize) -> bool) -> [bool; 3] {
    [f(0), f(1), f(2)]
}

fn reduce(kv: &KnotVector, kind: usize) -> Result<KnotVector> {
    if kv.degree() == 0 {
        return Err(Error::validation(format!("kind-{kind} spaces need degree at least 1 in every reduced direction")));
    }
    kv.derivative_space()
}

/// Space of the given kind on the patch's own knot vectors.
pub fn make_space(patch: &Patch, kind: usize) -> Result<DiscreteSpace> {
    Ok(DiscreteSpace::new(patch.basis().clone(), kind)?.with_patch(patch.index()))
}

/// Degree-`p` base space on the geometry's breakpoints with every element
/// split `refine` times. Single entries are broadcast to all directions.
pub fn space_basis(patch: &Patch, degrees: &[usize], refine: &[usize]) -> Result<TensorBasisSpec> {
    let d = patch.param_dim();
    let pick = |v: &[usize], k: usize, what: &str| -> Result<usize> {
        match v.len() {
            1 => Ok(v[0]),
            n if n == d => Ok(v[k]),
            n => Err(Error::validation(format!("{what} has {n} entries for a {d}-variate patch"))),
        }
    };
    let dirs = patch
        .basis()
        .dirs
        .iter()
        .enumerate()
        .map(|(k, kv)| kv.discretization(pick(degrees, k, "degree list")?, pick(refine, k, "refinement list")?))
        .collect::<Result<Vec<_>>>()?;
    TensorBasisSpec::new(dirs)
}

/// [`make_space`] on a discretization of the patch with the given degrees
/// and refinement.
pub fn make_refined_space(patch: &Patch, kind: usize, degrees: &[usize], refine: &[usize]) -> Result<DiscreteSpace> {
    Ok(DiscreteSpace::new(space_basis(patch, degrees, refine)?, kind)?.with_patch(patch.index()))
}
