//! Exact rational constructions of lines, circular arcs and the multipatch
//! domains built from them.
//!
//! Angles are in radians. A single arc segment may sweep at most a quarter
//! turn; longer arcs are assembled from several patches.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use super::{Interface, MultiPatch, Patch, Side};
use crate::error::{Error, Result};
use crate::splines::{KnotVector, TensorBasisSpec};

/// Requested conic section.
#[derive(Clone, Debug, PartialEq)]
pub enum ConicSpec {
    Line { from: Vec<f64>, to: Vec<f64> },
    Arc { center: [f64; 2], radius: f64, start: f64, sweep: f64 },
    RingSector { inner: f64, outer: f64, start: f64, sweep: f64 },
    Disc { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Patch(Patch),
    MultiPatch(MultiPatch),
}

impl Shape {
    pub fn into_multipatch(self) -> Result<MultiPatch> {
        match self {
            Shape::Patch(p) => MultiPatch::single(p),
            Shape::MultiPatch(mp) => Ok(mp),
        }
    }
}

pub fn make_conic(spec: &ConicSpec) -> Result<Shape> {
    Ok(match spec {
        ConicSpec::Line { from, to } => Shape::Patch(line(from, to)?),
        ConicSpec::Arc { center, radius, start, sweep } => Shape::Patch(arc(*center, *radius, *start, *sweep)?),
        ConicSpec::RingSector { inner, outer, start, sweep } => {
            Shape::Patch(ring_sector(*inner, *outer, *start, *sweep)?)
        }
        ConicSpec::Disc { radius } => Shape::MultiPatch(disc(*radius)?),
        ConicSpec::Annulus { inner, outer } => Shape::MultiPatch(annulus(*inner, *outer)?),
    })
}

fn check_sweep(sweep: f64) -> Result<()> {
    if !(sweep > 0.0 && sweep <= FRAC_PI_2 * (1.0 + 1e-12)) {
        return Err(Error::validation(format!("arc sweep {:.6} deg must lie in (0, 90]", sweep.to_degrees())));
    }
    Ok(())
}

fn check_radii(inner: f64, outer: f64) -> Result<()> {
    if !(inner > 0.0 && outer > inner && outer.is_finite()) {
        return Err(Error::validation(format!("radii must satisfy 0 < inner < outer, got {inner} and {outer}")));
    }
    Ok(())
}

/// Degree-1 segment from `from` to `to`.
pub fn line(from: &[f64], to: &[f64]) -> Result<Patch> {
    if from.len() != to.len() {
        return Err(Error::validation("line end points differ in dimension"));
    }
    if from == to {
        return Err(Error::validation("line end points coincide"));
    }
    Patch::new(
        TensorBasisSpec::new(vec![KnotVector::uniform(1, 1)?])?,
        vec![from.to_vec(), to.to_vec()],
        vec![1.0, 1.0],
    )
}

// control points and weights of a quadratic arc
fn arc_net(center: [f64; 2], r: f64, start: f64, sweep: f64) -> [([f64; 2], f64); 3] {
    let half = 0.5 * sweep;
    let w = half.cos();
    // snap the O(1e-17) residue of cos(pi/2) and friends to zero
    let clean = |v: f64| if v.abs() < 1e-15 * r { 0.0 } else { v };
    let at = |angle: f64, rad: f64| [clean(center[0] + rad * angle.cos()), clean(center[1] + rad * angle.sin())];
    [(at(start, r), 1.0), (at(start + half, r / w), w), (at(start + sweep, r), 1.0)]
}

/// Quadratic rational arc, counter-clockwise from `start`.
pub fn arc(center: [f64; 2], radius: f64, start: f64, sweep: f64) -> Result<Patch> {
    check_sweep(sweep)?;
    if !(radius > 0.0) {
        return Err(Error::validation(format!("radius must be positive, got {radius}")));
    }
    let net = arc_net(center, radius, start, sweep);
    Patch::new(
        TensorBasisSpec::new(vec![KnotVector::uniform(2, 1)?])?,
        net.iter().map(|(p, _)| p.to_vec()).collect(),
        net.iter().map(|(_, w)| *w).collect(),
    )
}

/// Annular sector; `xi_1` runs radially outward and `xi_2` counter-clockwise.
pub fn ring_sector(inner: f64, outer: f64, start: f64, sweep: f64) -> Result<Patch> {
    check_radii(inner, outer)?;
    check_sweep(sweep)?;
    let a = arc_net([0.0, 0.0], inner, start, sweep);
    let b = arc_net([0.0, 0.0], outer, start, sweep);
    let mut points = Vec::with_capacity(6);
    let mut weights = Vec::with_capacity(6);
    for k in 0..3 {
        for (p, w) in [a[k], b[k]] {
            points.push(p.to_vec());
            weights.push(w);
        }
    }
    Patch::new(TensorBasisSpec::new(vec![KnotVector::uniform(1, 1)?, KnotVector::uniform(2, 1)?])?, points, weights)
}

/// Axis-aligned rectangle as a bilinear patch.
pub fn rectangle(x: [f64; 2], y: [f64; 2]) -> Result<Patch> {
    let kv = KnotVector::uniform(1, 1)?;
    Patch::new(
        TensorBasisSpec::new(vec![kv.clone(), kv])?,
        vec![vec![x[0], y[0]], vec![x[1], y[0]], vec![x[0], y[1]], vec![x[1], y[1]]],
        vec![1.0; 4],
    )
}

/// Axis-aligned box as a trilinear patch.
pub fn cuboid(x: [f64; 2], y: [f64; 2], z: [f64; 2]) -> Result<Patch> {
    let kv = KnotVector::uniform(1, 1)?;
    let mut points = Vec::with_capacity(8);
    for &zk in &z {
        for &yj in &y {
            for &xi in &x {
                points.push(vec![xi, yj, zk]);
            }
        }
    }
    Patch::new(TensorBasisSpec::new(vec![kv.clone(), kv.clone(), kv])?, points, vec![1.0; 8])
}

/// Five-patch disc: a central square with four curved patches around it.
///
/// The square `[-s, s]^2` (`s = 0.4 r`) is a biquadratic patch on a uniform
/// net so that its edges match the quadratic radial patches.
pub fn disc(radius: f64) -> Result<MultiPatch> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::validation(format!("radius must be positive, got {radius}")));
    }
    let s = 0.4 * radius;
    let kv2 = KnotVector::uniform(2, 1)?;
    let mut square_pts = Vec::with_capacity(9);
    for j in 0..3 {
        for i in 0..3 {
            square_pts.push(vec![-s + s * i as f64, -s + s * j as f64]);
        }
    }
    let square = Patch::new(TensorBasisSpec::new(vec![kv2.clone(), kv2.clone()])?, square_pts, vec![1.0; 9])?;
    let mut patches = vec![square];
    let corner = |angle: f64| [s * SQRT_2 * angle.cos(), s * SQRT_2 * angle.sin()];
    for k in 0..4 {
        let a0 = -FRAC_PI_2 / 2.0 + FRAC_PI_2 * k as f64;
        let q0 = corner(a0);
        let q2 = corner(a0 + FRAC_PI_2);
        let q1 = [0.5 * (q0[0] + q2[0]), 0.5 * (q0[1] + q2[1])];
        let outer = arc_net([0.0, 0.0], radius, a0, FRAC_PI_2);
        let mut points = Vec::with_capacity(6);
        let mut weights = Vec::with_capacity(6);
        for (q, (p, w)) in [q0, q1, q2].into_iter().zip(outer) {
            points.extend([q.to_vec(), p.to_vec()]);
            weights.extend([1.0, w]);
        }
        patches.push(Patch::new(
            TensorBasisSpec::new(vec![KnotVector::uniform(1, 1)?, kv2.clone()])?,
            points,
            weights,
        )?);
    }
    let inner = Side::new(0, false);
    let square_sides = [
        (Side::new(0, true), false),
        (Side::new(1, true), true),
        (Side::new(0, false), true),
        (Side::new(1, false), false),
    ];
    let mut interfaces = Vec::new();
    for (k, (side, rev)) in square_sides.into_iter().enumerate() {
        interfaces.push(Interface::new(k + 1, inner, 0, side, vec![rev]));
    }
    for k in 0..4 {
        interfaces.push(Interface::new(k + 1, Side::new(1, true), (k + 1) % 4 + 1, Side::new(1, false), vec![false]));
    }
    MultiPatch::new(patches, interfaces)
}

/// Annulus from four quarter sectors.
pub fn annulus(inner: f64, outer: f64) -> Result<MultiPatch> {
    layered_annulus(&[inner, outer])
}

/// Annulus split at the given radii into rings of four quarter sectors each.
///
/// Patch `4 * ring + quarter`; rings are numbered outward.
pub fn layered_annulus(radii: &[f64]) -> Result<MultiPatch> {
    if radii.len() < 2 {
        return Err(Error::validation("need at least two radii"));
    }
    let mut patches = Vec::new();
    let mut interfaces = Vec::new();
    for (ring, pair) in radii.windows(2).enumerate() {
        for q in 0..4 {
            patches.push(ring_sector(pair[0], pair[1], FRAC_PI_2 * q as f64, FRAC_PI_2)?);
            let me = 4 * ring + q;
            interfaces.push(Interface::new(
                me,
                Side::new(1, true),
                4 * ring + (q + 1) % 4,
                Side::new(1, false),
                vec![false],
            ));
            if ring > 0 {
                interfaces.push(Interface::new(me - 4, Side::new(0, true), me, Side::new(0, false), vec![false]));
            }
        }
    }
    MultiPatch::new(patches, interfaces)
}

/// Two unit squares side by side, `[0,2] x [0,1]`.
pub fn two_squares() -> Result<MultiPatch> {
    MultiPatch::new(
        vec![rectangle([0.0, 1.0], [0.0, 1.0])?, rectangle([1.0, 2.0], [0.0, 1.0])?],
        vec![Interface::new(0, Side::new(0, true), 1, Side::new(0, false), vec![false])],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(p: &[f64]) -> f64 {
        p.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn quarter_circle_is_exact() {
        let p = arc([0.0, 0.0], 1.0, 0.0, FRAC_PI_2).unwrap();
        assert_eq!(p.weights(), &[1.0, SQRT_2 / 2.0, 1.0]);
        for s in 0..=100 {
            let x = p.eval_map(&[s as f64 / 100.0]).unwrap();
            assert!((norm(&x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sweep_limits() {
        assert!(arc([0.0, 0.0], 1.0, 0.0, 0.0).is_err());
        assert!(arc([0.0, 0.0], 1.0, 0.0, 2.0).is_err());
        assert!(arc([0.0, 0.0], 1.0, 0.0, 1.0).is_ok());
        assert!(ring_sector(2.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn disc_boundary_on_circle_and_positive_jacobian() {
        let d = disc(1.0).unwrap();
        for (k, patch) in d.patches().iter().enumerate() {
            for i in 0..=10 {
                for j in 0..=10 {
                    let xi = [i as f64 / 10.0, j as f64 / 10.0];
                    let jac = patch.eval_jacobian(&xi).unwrap();
                    assert!(jac.det > 0.0, "patch {k}");
                }
            }
            if k > 0 {
                for j in 0..=50 {
                    let x = patch.eval_map(&[1.0, j as f64 / 50.0]).unwrap();
                    assert!((norm(&x) - 1.0).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn disc_area_is_pi() {
        let d = disc(1.0).unwrap();
        let (gx, gw) = crate::assembly::gauss_legendre(6);
        let n = 8;
        let mut area = 0.0;
        for patch in d.patches() {
            for a in 0..n {
                for b in 0..n {
                    for (i, &u) in gx.iter().enumerate() {
                        for (j, &v) in gx.iter().enumerate() {
                            let xi = [(a as f64 + u) / n as f64, (b as f64 + v) / n as f64];
                            area += gw[i] * gw[j] * patch.eval_jacobian(&xi).unwrap().det / (n * n) as f64;
                        }
                    }
                }
            }
        }
        assert!((area - std::f64::consts::PI).abs() < 1e-12, "{area}");
    }

    #[test]
    fn annulus_sectors_on_circles() {
        let a = annulus(1.0, 2.0).unwrap();
        assert_eq!(a.patches().len(), 4);
        for patch in a.patches() {
            for j in 0..=20 {
                let t = j as f64 / 20.0;
                assert!((norm(&patch.eval_map(&[0.0, t]).unwrap()) - 1.0).abs() < 1e-14);
                assert!((norm(&patch.eval_map(&[1.0, t]).unwrap()) - 2.0).abs() < 1e-14);
            }
        }
    }
}
