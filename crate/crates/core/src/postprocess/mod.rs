//! Field sampling and derived quantities: point location, magnetic flux
//! density from a vector potential, multipoles, field flatness, gradient
//! homogeneity and file export.

mod export;
mod metrics;
mod multipole;

pub use export::{parse_vtk, read_csv, write_csv, write_vtk, VtkGrid};
pub use metrics::{field_flatness, gradient_metrics, GradientMetrics, Rect};
pub use multipole::{multipole_coeffs, quadrupole_gradient, MultipoleSet};

use rayon::prelude::*;

use crate::assembly::QuadratureRule;
use crate::error::{Error, Result};
use crate::geometry::{pushforward, Patch};
use crate::solve::Solution;
use crate::spaces::DiscreteSpace;

const NEWTON_ITERS: usize = 20;
const LOCATE_TOL: f64 = 1e-8;
const SEEDS_PER_DIR: usize = 4;

/// What to evaluate at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    /// Physical field value (pushed forward for vector kinds).
    Value,
    /// Physical gradient of a scalar field.
    Gradient,
    /// Curl: for a scalar `u` in 2D the in-plane field `(du/dy, -du/dx)`
    /// of the potential `(0, 0, u)`; for an edge field its physical curl.
    Curl,
}

/// Evaluates a [`Solution`] at physical points.
pub struct FieldSampler<'a> {
    solution: &'a Solution,
    // None on patches a single-patch field does not cover
    locals: Vec<Option<(DiscreteSpace, Vec<f64>)>>,
    // per patch: (xi, x)
    seeds: Vec<Vec<(Vec<f64>, Vec<f64>)>>,
}

fn seed_params(d: usize) -> Vec<Vec<f64>> {
    let t: Vec<f64> = (0..SEEDS_PER_DIR).map(|i| (i as f64 + 0.5) / SEEDS_PER_DIR as f64).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p| {
                t.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

impl<'a> FieldSampler<'a> {
    pub fn new(solution: &'a Solution) -> Result<Self> {
        let mp = solution.geometry();
        let mut locals = Vec::new();
        let mut seeds = Vec::new();
        for (k, patch) in mp.patches().iter().enumerate() {
            locals.push(solution.space().restrict(k, solution.coefficients()).ok().map(|(s, c)| (s.clone(), c)));
            let pts = seed_params(patch.param_dim())
                .into_iter()
                .map(|xi| patch.eval_map(&xi).map(|x| (xi, x)))
                .collect::<Result<Vec<_>>>()?;
            seeds.push(pts);
        }
        Ok(Self { solution, locals, seeds })
    }

    pub fn solution(&self) -> &Solution {
        self.solution
    }

    fn patch(&self, k: usize) -> &Patch {
        &self.solution.geometry().patches()[k]
    }

    /// Patch index and reference coordinates of a physical point.
    pub fn locate(&self, x: &[f64]) -> Result<(usize, Vec<f64>)> {
        let mp = self.solution.geometry();
        if x.len() != mp.phys_dim() {
            return Err(Error::validation(format!(
                "point has {} coordinates, geometry is {}D",
                x.len(),
                mp.phys_dim()
            )));
        }
        let mut starts: Vec<(f64, usize, usize)> = Vec::new();
        for (k, seeds) in self.seeds.iter().enumerate() {
            if self.locals[k].is_none() {
                continue;
            }
            for (i, (_, sx)) in seeds.iter().enumerate() {
                starts.push((dist2(sx, x), k, i));
            }
        }
        starts.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(_, k, i) in &starts {
            if let Some(xi) = self.newton(k, &self.seeds[k][i].0, x) {
                return Ok((k, xi));
            }
        }
        Err(Error::Location { point: x.to_vec() })
    }

    fn newton(&self, k: usize, start: &[f64], x: &[f64]) -> Option<Vec<f64>> {
        let patch = self.patch(k);
        let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut xi = start.to_vec();
        for _ in 0..NEWTON_ITERS {
            let (fx, jac) = patch.map_and_jacobian_unchecked(&xi).ok()?;
            let r: Vec<f64> = (0..x.len()).map(|c| fx[c] - x[c]).collect();
            let res = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if res <= 1e-13 * scale {
                return Some(xi);
            }
            let step = jac.apply_inverse(&r).ok()?;
            let mut moved = 0.0f64;
            for (d, v) in xi.iter_mut().enumerate() {
                let next = (*v - step[d]).clamp(0.0, 1.0);
                moved = moved.max((next - *v).abs());
                *v = next;
            }
            if moved < 1e-15 {
                break;
            }
        }
        let fx = patch.eval_map(&xi).ok()?;
        let res = fx.iter().zip(x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        (res <= LOCATE_TOL * scale).then_some(xi)
    }

    /// Quantity at reference coordinates of one patch.
    pub fn sample_reference(&self, k: usize, xi: &[f64], what: Quantity) -> Result<Vec<f64>> {
        let Some((space, coeffs)) = self.locals.get(k).and_then(Option::as_ref) else {
            return Err(Error::validation(format!("field is not defined on patch {k}")));
        };
        let jac = self.patch(k).eval_jacobian(xi)?;
        let d = space.dim();
        let kind = space.kind();
        // reference Jacobian of the field: rows are components
        let active = space.eval_active(xi)?;
        let mut value = vec![0.0; space.num_components()];
        let mut grad = vec![[0.0; 3]; space.num_components()];
        for f in &active {
            value[f.component] += coeffs[f.dof] * f.value;
            for j in 0..d {
                grad[f.component][j] += coeffs[f.dof] * f.grad[j];
            }
        }
        match what {
            Quantity::Value => pushforward(kind, &jac, &value),
            Quantity::Gradient => {
                if kind != 0 {
                    return Err(Error::validation("gradient sampling needs a scalar field"));
                }
                Ok(jac.apply_inverse_transpose(&grad[0][..d])?[..d].to_vec())
            }
            Quantity::Curl => match (kind, d) {
                (0, 2) => {
                    let g = jac.apply_inverse_transpose(&grad[0][..2])?;
                    Ok(vec![g[1], -g[0]])
                }
                (1, 2) => pushforward(3, &jac, &[grad[1][0] - grad[0][1]]),
                (1, 3) => {
                    let c: Vec<f64> =
                        (0..3).map(|i| grad[(i + 2) % 3][(i + 1) % 3] - grad[(i + 1) % 3][(i + 2) % 3]).collect();
                    pushforward(2, &jac, &c)
                }
                _ => Err(Error::validation(format!("no curl for kind-{kind} fields in {d}D"))),
            },
        }
    }

    /// Quantity at a physical point.
    pub fn sample(&self, x: &[f64], what: Quantity) -> Result<Vec<f64>> {
        let (k, xi) = self.locate(x)?;
        self.sample_reference(k, &xi, what)
    }

    /// Batch version of [`FieldSampler::sample`]; output order follows
    /// `points`.
    pub fn sample_many(&self, points: &[Vec<f64>], what: Quantity) -> Result<Vec<Vec<f64>>> {
        points.par_iter().map(|x| self.sample(x, what)).collect()
    }
}

/// `||u - exact||_{L2}` of a scalar solution, by Gauss quadrature with
/// `p + 2` points per element direction.
pub fn l2_error(solution: &Solution, exact: impl Fn(&[f64]) -> f64) -> Result<f64> {
    if solution.space().kind() != 0 {
        return Err(Error::validation("L2 error is implemented for scalar fields"));
    }
    let mut total = 0.0;
    for (k, patch) in solution.geometry().patches().iter().enumerate() {
        let (space, coeffs) = solution.space().restrict(k, solution.coefficients())?;
        let pts: Vec<usize> = space.base().degrees().iter().map(|p| p + 2).collect();
        let rule = QuadratureRule::new(space.base(), &pts);
        for e in rule.elements() {
            let (qp, spans) = rule.element_points(e);
            for (xi, w) in qp {
                let (x, jac) = patch.map_and_jacobian(&xi)?;
                let uh: f64 = space.eval_active_in(&xi, spans).iter().map(|f| coeffs[f.dof] * f.value).sum();
                total += w * jac.det * (uh - exact(&x[..patch.phys_dim()])).powi(2);
            }
        }
    }
    Ok(total.sqrt())
}
