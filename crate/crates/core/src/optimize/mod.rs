//! Shape optimization on control points: design vectors, finite-difference
//! gradients, projected BFGS, worst-case estimates and the Stern-Gerlach
//! goal function.

mod minimize;
pub mod objectives;
mod worst_case;

pub use minimize::{minimize_bounded, write_trace, MinimizeOptions, Minimum, Termination};
pub use worst_case::{worst_case_direct, worst_case_linear, WorstCase};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::MultiPatch;

/// Which value of a control point an entry moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Coord(usize),
    Weight,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(Axis::Coord(0)),
            "y" => Ok(Axis::Coord(1)),
            "z" => Ok(Axis::Coord(2)),
            "w" => Ok(Axis::Weight),
            other => Err(Error::validation(format!("unknown design axis {other:?} (x, y, z or w)"))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Coord(c) => f.write_str(["x", "y", "z"].get(*c).copied().unwrap_or("?")),
            Axis::Weight => f.write_str("w"),
        }
    }
}

/// One free control-point value; bounds are offsets from `base`.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignEntry {
    pub patch: usize,
    pub point: usize,
    pub axis: Axis,
    pub base: f64,
    pub bounds: [f64; 2],
}

/// Free control-point coordinates and weights of a geometry. Design values
/// are displacements from the base geometry, so the base design is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignVector {
    geometry: MultiPatch,
    entries: Vec<DesignEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EntrySpec {
    patch: usize,
    point: usize,
    axis: String,
    lower: f64,
    upper: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignSpec {
    entries: Vec<EntrySpec>,
}

impl DesignVector {
    /// `entries` holds `(patch, point, axis, lower, upper)` with bounds on
    /// the displacement.
    pub fn new(geometry: &MultiPatch, entries: &[(usize, usize, Axis, f64, f64)]) -> Result<Self> {
        let mut out = Vec::with_capacity(entries.len());
        for (i, &(patch, point, axis, lo, hi)) in entries.iter().enumerate() {
            let p = geometry
                .patches()
                .get(patch)
                .ok_or_else(|| Error::validation(format!("design entry {i}: no patch {patch}")))?;
            if point >= p.num_points() {
                return Err(Error::validation(format!("design entry {i}: no control point {point}")));
            }
            let base = match axis {
                Axis::Coord(c) if c < p.phys_dim() => p.point(point)[c],
                Axis::Coord(c) => {
                    return Err(Error::validation(format!("design entry {i}: axis {c} beyond dimension")))
                }
                Axis::Weight => p.weights()[point],
            };
            if !(lo <= 0.0 && 0.0 <= hi && lo < hi) {
                return Err(Error::validation(format!("design entry {i}: bounds [{lo}, {hi}] must bracket zero")));
            }
            if axis == Axis::Weight && base + lo <= 0.0 {
                return Err(Error::validation(format!("design entry {i}: weight could become non-positive")));
            }
            if out.iter().any(|e: &DesignEntry| e.patch == patch && e.point == point && e.axis == axis) {
                return Err(Error::validation(format!("design entry {i} is a duplicate")));
            }
            out.push(DesignEntry { patch, point, axis, base, bounds: [lo, hi] });
        }
        Ok(Self { geometry: geometry.clone(), entries: out })
    }

    /// Reads `{"entries": [{"patch", "point", "axis", "lower", "upper"}]}`.
    pub fn from_json(geometry: &MultiPatch, text: &str) -> Result<Self> {
        let spec: DesignSpec =
            serde_json::from_str(text).map_err(|e| Error::validation(format!("invalid design file: {e}")))?;
        let entries = spec
            .entries
            .into_iter()
            .map(|e| Ok((e.patch, e.point, e.axis.parse()?, e.lower, e.upper)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(geometry, &entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[DesignEntry] {
        &self.entries
    }

    pub fn bounds(&self) -> Vec<[f64; 2]> {
        self.entries.iter().map(|e| e.bounds).collect()
    }

    /// Same design with every bound widened by `margin`, for probing
    /// tolerances around a point on a bound.
    pub fn with_margin(&self, margin: f64) -> Result<Self> {
        let entries: Vec<_> = self
            .entries
            .iter()
            .map(|e| (e.patch, e.point, e.axis, e.bounds[0] - margin, e.bounds[1] + margin))
            .collect();
        Self::new(&self.geometry, &entries)
    }

    /// Geometry with the displacements `x` applied. Moving a control point
    /// that sits on an interface fails the interface check.
    pub fn apply(&self, x: &[f64]) -> Result<MultiPatch> {
        if x.len() != self.entries.len() {
            return Err(Error::validation(format!(
                "design has {} entries, got {} values",
                self.entries.len(),
                x.len()
            )));
        }
        let mut patches = self.geometry.patches().to_vec();
        for (e, &v) in self.entries.iter().zip(x) {
            if v < e.bounds[0] || v > e.bounds[1] {
                return Err(Error::validation(format!("design value {v} outside [{}, {}]", e.bounds[0], e.bounds[1])));
            }
            let p = &patches[e.patch];
            let axis = match e.axis {
                Axis::Coord(c) => c,
                Axis::Weight => p.phys_dim(),
            };
            patches[e.patch] = p.with_control_value(e.point, axis, e.base + v)?;
        }
        self.geometry.with_patches(patches)
    }
}

/// A scalar function of the design values.
pub trait Objective: Sync {
    fn eval(&self, x: &[f64]) -> Result<f64>;
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    fn eval(&self, x: &[f64]) -> Result<f64> {
        self(x)
    }
}

/// Objective of a geometry evaluated on the design's displaced geometry.
pub struct ShapeObjective<F> {
    design: DesignVector,
    quantity: F,
}

impl<F> ShapeObjective<F>
where
    F: Fn(&MultiPatch) -> Result<f64> + Sync,
{
    pub fn new(design: DesignVector, quantity: F) -> Self {
        Self { design, quantity }
    }

    pub fn design(&self) -> &DesignVector {
        &self.design
    }
}

impl<F> Objective for ShapeObjective<F>
where
    F: Fn(&MultiPatch) -> Result<f64> + Sync,
{
    fn eval(&self, x: &[f64]) -> Result<f64> {
        (self.quantity)(&self.design.apply(x)?)
    }
}

/// Default finite-difference step: `1e-6` of each bound range.
pub fn default_steps(bounds: &[[f64; 2]]) -> Vec<f64> {
    bounds.iter().map(|b| 1e-6 * (b[1] - b[0])).collect()
}

/// Central-difference gradient, one-sided where a central stencil would
/// leave the bounds. Probes run in parallel; results are ordered by entry.
pub fn fd_gradient(obj: &dyn Objective, x: &[f64], bounds: &[[f64; 2]], steps: Option<&[f64]>) -> Result<Vec<f64>> {
    if bounds.len() != x.len() || steps.is_some_and(|h| h.len() != x.len()) {
        return Err(Error::validation("gradient inputs have inconsistent lengths"));
    }
    let default = default_steps(bounds);
    let h = steps.unwrap_or(&default);
    let f0 = if x.iter().zip(bounds).zip(h).all(|((v, b), h)| v - h >= b[0] && v + h <= b[1]) {
        None
    } else {
        Some(obj.eval(x).map_err(|e| Error::Objective { index: 0, source: Box::new(e) })?)
    };
    (0..x.len())
        .into_par_iter()
        .map(|i| {
            let probe = |t: f64| {
                let mut y = x.to_vec();
                y[i] = t;
                obj.eval(&y).map_err(|e| Error::Objective { index: i, source: Box::new(e) })
            };
            let (lo, hi) = (x[i] - h[i], x[i] + h[i]);
            if !(h[i] > 0.0) {
                return Err(Error::validation(format!("step for entry {i} must be positive")));
            }
            let center = || f0.expect("computed when a stencil is one-sided");
            if lo >= bounds[i][0] && hi <= bounds[i][1] {
                Ok((probe(hi)? - probe(lo)?) / (2.0 * h[i]))
            } else if hi <= bounds[i][1] {
                Ok((probe(hi)? - center()) / h[i])
            } else if lo >= bounds[i][0] {
                Ok((center() - probe(lo)?) / h[i])
            } else {
                Err(Error::validation(format!("bound range of entry {i} is narrower than the step")))
            }
        })
        .collect()
}

/// Stern-Gerlach goal `t + eps - t eps` with `t = tau_w / |tau_av|`.
pub fn goal_stern_gerlach(tau_av: f64, eps: f64, tau_w: f64) -> Result<f64> {
    if tau_av == 0.0 {
        return Err(Error::validation("average gradient must be nonzero"));
    }
    let t = tau_w / tau_av.abs();
    Ok(t + eps - t * eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::conics;

    #[test]
    fn quadratic_gradient() {
        let f = |x: &[f64]| -> Result<f64> { Ok(x.iter().map(|v| v * v).sum()) };
        let g = fd_gradient(&f, &[1.0, 2.0], &[[-5.0, 5.0]; 2], None).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-8 && (g[1] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn linear_gradient_at_bound_is_exact() {
        let f = |x: &[f64]| -> Result<f64> { Ok(3.0 * x[0] - 0.5 * x[1]) };
        for h in [1e-3, 1e-6, 0.1] {
            let g = fd_gradient(&f, &[1.0, -1.0], &[[0.0, 1.0], [-1.0, 1.0]], Some(&[h, h])).unwrap();
            assert!((g[0] - 3.0).abs() < 1e-10 && (g[1] + 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn failures_carry_the_entry() {
        let f = |x: &[f64]| -> Result<f64> {
            if x[1] > 0.0 {
                Err(Error::validation("boom"))
            } else {
                Ok(0.0)
            }
        };
        let err = fd_gradient(&f, &[0.0, 0.0], &[[-1.0, 1.0]; 2], None).unwrap_err();
        assert!(matches!(err, Error::Objective { index: 1, .. }));
    }

    #[test]
    fn goal_function_identities() {
        assert_eq!(goal_stern_gerlach(3.0, 0.2, 0.0).unwrap(), 0.2);
        assert!((goal_stern_gerlach(-7.0, 1.0, 0.4).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(goal_stern_gerlach(-2.0, 0.5, 1.0).unwrap(), 0.75);
        assert!(goal_stern_gerlach(0.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn design_moves_one_point() {
        let mp = conics::disc(1.0).unwrap();
        let d = DesignVector::new(&mp, &[(1, 3, Axis::Coord(0), -0.1, 0.1)]).unwrap();
        let moved = d.apply(&[0.05]).unwrap();
        let before = mp.patches()[1].point(3)[0];
        assert!((moved.patches()[1].point(3)[0] - before - 0.05).abs() < 1e-15);
        assert!(d.apply(&[0.2]).is_err());
        // interface points cannot move alone
        let corner = DesignVector::new(&mp, &[(1, 0, Axis::Coord(0), -0.1, 0.1)]).unwrap();
        assert!(corner.apply(&[0.05]).is_err());
    }

    #[test]
    fn design_json_rejects_unknown_keys() {
        let mp = conics::disc(1.0).unwrap();
        let ok = r#"{"entries": [{"patch": 1, "point": 3, "axis": "w", "lower": -0.1, "upper": 0.1}]}"#;
        assert_eq!(DesignVector::from_json(&mp, ok).unwrap().len(), 1);
        let bad = r#"{"entries": [], "extra": 1}"#;
        assert!(DesignVector::from_json(&mp, bad).is_err());
        let weight = r#"{"entries": [{"patch": 1, "point": 3, "axis": "w", "lower": -2, "upper": 0.1}]}"#;
        assert!(DesignVector::from_json(&mp, weight).is_err());
    }
}
