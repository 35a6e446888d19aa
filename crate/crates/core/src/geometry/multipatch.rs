use std::fmt;
use std::str::FromStr;

use super::Patch;
use crate::error::{Error, Result};
use crate::splines::KnotVector;

const KNOT_TOL: f64 = 1e-12;
const POINT_TOL: f64 = 1e-10;

/// One face of the reference cube: `xi_dir = 0` or `xi_dir = 1`.
///
/// Written as `d{k}_min` / `d{k}_max` with a 1-based direction `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Side {
    pub dir: usize,
    pub max: bool,
}

impl Side {
    pub const fn new(dir: usize, max: bool) -> Self {
        Self { dir, max }
    }

    /// All `2d` sides of a `d`-dimensional patch.
    pub fn all(dim: usize) -> impl Iterator<Item = Side> {
        (0..dim).flat_map(|d| [Side::new(d, false), Side::new(d, true)])
    }

    /// Parametric directions along the side, in increasing order.
    pub fn tangential(self, dim: usize) -> Vec<usize> {
        (0..dim).filter(|&d| d != self.dir).collect()
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}_{}", self.dir + 1, if self.max { "max" } else { "min" })
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::validation(format!("side must look like d1_min or d2_max, got {s:?}"));
        let rest = s.strip_prefix('d').ok_or_else(bad)?;
        let (k, end) = rest.split_once('_').ok_or_else(bad)?;
        let k: usize = k.parse().map_err(|_| bad())?;
        if !(1..=3).contains(&k) {
            return Err(bad());
        }
        let max = match end {
            "min" => false,
            "max" => true,
            _ => return Err(bad()),
        };
        Ok(Side::new(k - 1, max))
    }
}

/// Glues `side_a` of `patch_a` to `side_b` of `patch_b`.
///
/// `reverse[t]` flips the `t`-th tangential direction of side b relative to
/// side a.
#[derive(Clone, Debug, PartialEq)]
pub struct Interface {
    pub patch_a: usize,
    pub side_a: Side,
    pub patch_b: usize,
    pub side_b: Side,
    pub reverse: Vec<bool>,
}

impl Interface {
    pub fn new(patch_a: usize, side_a: Side, patch_b: usize, side_b: Side, reverse: Vec<bool>) -> Self {
        Self { patch_a, side_a, patch_b, side_b, reverse }
    }

    /// Maps a multi-index along side a (tangential directions only) to the
    /// matching index along side b, given the side-b sizes.
    pub(crate) fn map_tangential(&self, idx: &[usize], sizes_b: &[usize]) -> Vec<usize> {
        idx.iter().zip(sizes_b).zip(&self.reverse).map(|((&i, &n), &r)| if r { n - 1 - i } else { i }).collect()
    }
}

/// Patches plus the interfaces joining them.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPatch {
    patches: Vec<Patch>,
    interfaces: Vec<Interface>,
}

impl MultiPatch {
    /// Checks that every interface is geometrically watertight and
    /// conforming (same degrees and knots along the shared side).
    pub fn new(mut patches: Vec<Patch>, interfaces: Vec<Interface>) -> Result<Self> {
        let first = patches.first().ok_or_else(|| Error::validation("no patches given"))?;
        let (d, m) = (first.param_dim(), first.phys_dim());
        for (k, p) in patches.iter_mut().enumerate() {
            if p.param_dim() != d || p.phys_dim() != m {
                return Err(Error::validation(format!(
                    "patch {k} has dimensions ({}, {}) but patch 0 has ({d}, {m})",
                    p.param_dim(),
                    p.phys_dim()
                )));
            }
            p.index = k;
        }
        let mp = Self { patches, interfaces };
        let mut seen = std::collections::HashSet::new();
        for (n, iface) in mp.interfaces.iter().enumerate() {
            mp.check_interface(iface).map_err(|e| match e {
                Error::Conformity(msg) => Error::Conformity(format!("interface {n}: {msg}")),
                Error::Geometry(msg) => Error::Geometry(format!("interface {n}: {msg}")),
                other => other,
            })?;
            for key in [(iface.patch_a, iface.side_a), (iface.patch_b, iface.side_b)] {
                if !seen.insert(key) {
                    return Err(Error::validation(format!(
                        "side {} of patch {} appears in more than one interface",
                        key.1, key.0
                    )));
                }
            }
        }
        Ok(mp)
    }

    pub fn single(patch: Patch) -> Result<Self> {
        Self::new(vec![patch], Vec::new())
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    pub fn interfaces(&self) -> &[Interface] {
        &self.interfaces
    }

    pub fn param_dim(&self) -> usize {
        self.patches[0].param_dim()
    }

    pub fn phys_dim(&self) -> usize {
        self.patches[0].phys_dim()
    }

    /// Sides not covered by any interface, i.e. the domain boundary.
    pub fn boundary_sides(&self) -> Vec<(usize, Side)> {
        let d = self.param_dim();
        let mut out = Vec::new();
        for k in 0..self.patches.len() {
            for side in Side::all(d) {
                let inner = self
                    .interfaces
                    .iter()
                    .any(|i| (i.patch_a == k && i.side_a == side) || (i.patch_b == k && i.side_b == side));
                if !inner {
                    out.push((k, side));
                }
            }
        }
        out
    }

    /// Same topology with new patches (e.g. after refinement or a design
    /// update); interfaces are re-validated.
    pub fn with_patches(&self, patches: Vec<Patch>) -> Result<Self> {
        Self::new(patches, self.interfaces.clone())
    }

    fn check_interface(&self, iface: &Interface) -> Result<()> {
        let n = self.patches.len();
        if iface.patch_a >= n || iface.patch_b >= n {
            return Err(Error::validation(format!(
                "interface refers to patch {} but only {n} exist",
                iface.patch_a.max(iface.patch_b)
            )));
        }
        if iface.patch_a == iface.patch_b {
            return Err(Error::validation("periodic self-interfaces are not supported"));
        }
        let d = self.param_dim();
        if iface.side_a.dir >= d || iface.side_b.dir >= d {
            return Err(Error::validation(format!("side direction exceeds dimension {d}")));
        }
        if iface.reverse.len() != d - 1 {
            return Err(Error::validation(format!(
                "interface needs {} reverse flags, got {}",
                d - 1,
                iface.reverse.len()
            )));
        }
        if d == 3 && iface.reverse.iter().any(|&r| r) {
            return Err(Error::validation("reversed interfaces are only supported for curves and surfaces"));
        }
        let pa = &self.patches[iface.patch_a];
        let pb = &self.patches[iface.patch_b];
        let ta = iface.side_a.tangential(d);
        let tb = iface.side_b.tangential(d);
        for (t, (&da, &db)) in ta.iter().zip(&tb).enumerate() {
            let ka = &pa.basis().dirs[da];
            let kb = &pb.basis().dirs[db];
            if !knots_match(ka, kb, iface.reverse[t]) {
                return Err(Error::Conformity(format!(
                    "knot vectors along {} of patch {} and {} of patch {} differ",
                    iface.side_a, iface.patch_a, iface.side_b, iface.patch_b
                )));
            }
        }
        let idx_a = pa.side_point_indices(iface.side_a);
        let sizes_a: Vec<usize> = ta.iter().map(|&t| pa.basis().dirs[t].num_basis()).collect();
        let sizes_b: Vec<usize> = tb.iter().map(|&t| pb.basis().dirs[t].num_basis()).collect();
        let idx_b = pb.side_point_indices(iface.side_b);
        for (pos_a, &ka) in idx_a.iter().enumerate() {
            let loc = unflatten(pos_a, &sizes_a);
            let pos_b = flatten(&iface.map_tangential(&loc, &sizes_b), &sizes_b);
            let kb = idx_b[pos_b];
            let dist = pa.point(ka).iter().zip(pb.point(kb)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if dist > POINT_TOL || (pa.weights()[ka] - pb.weights()[kb]).abs() > POINT_TOL {
                return Err(Error::Geometry(format!(
                    "control points {ka} of patch {} and {kb} of patch {} do not coincide",
                    iface.patch_a, iface.patch_b
                )));
            }
        }
        Ok(())
    }
}

fn knots_match(a: &KnotVector, b: &KnotVector, reverse: bool) -> bool {
    if a.degree() != b.degree() || a.knots().len() != b.knots().len() {
        return false;
    }
    let kb = b.knots();
    let n = kb.len();
    a.knots().iter().enumerate().all(|(i, &x)| {
        let y = if reverse { 1.0 - kb[n - 1 - i] } else { kb[i] };
        (x - y).abs() <= KNOT_TOL
    })
}

pub(crate) fn unflatten(mut pos: usize, sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .map(|&n| {
            let i = pos % n;
            pos /= n;
            i
        })
        .collect()
}

pub(crate) fn flatten(idx: &[usize], sizes: &[usize]) -> usize {
    idx.iter().zip(sizes).rev().fold(0, |acc, (&i, &n)| acc * n + i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::conics::{disc, rectangle, two_squares};

    #[test]
    fn side_names_round_trip() {
        for s in Side::all(3) {
            assert_eq!(s.to_string().parse::<Side>().unwrap(), s);
        }
        assert!("d0_min".parse::<Side>().is_err());
        assert!("d2_top".parse::<Side>().is_err());
    }

    #[test]
    fn two_squares_boundary() {
        let mp = two_squares().unwrap();
        assert_eq!(mp.boundary_sides().len(), 6);
    }

    #[test]
    fn disc_has_only_arcs_on_boundary() {
        let mp = disc(1.0).unwrap();
        let b = mp.boundary_sides();
        assert_eq!(b.len(), 4);
        assert!(b.iter().all(|(k, s)| *k > 0 && *s == Side::new(0, true)));
    }

    #[test]
    fn gap_is_rejected() {
        let a = rectangle([0.0, 1.0], [0.0, 1.0]).unwrap();
        let b = rectangle([1.1, 2.0], [0.0, 1.0]).unwrap();
        let err = MultiPatch::new(
            vec![a, b],
            vec![Interface::new(0, Side::new(0, true), 1, Side::new(0, false), vec![false])],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Geometry(_)));
    }

    #[test]
    fn mismatched_knots_are_nonconforming() {
        let a = rectangle([0.0, 1.0], [0.0, 1.0]).unwrap();
        let b = crate::geometry::refine_patch(&rectangle([1.0, 2.0], [0.0, 1.0]).unwrap(), &[1, 2]).unwrap();
        let err = MultiPatch::new(
            vec![a, b],
            vec![Interface::new(0, Side::new(0, true), 1, Side::new(0, false), vec![false])],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Conformity(_)));
    }

    #[test]
    fn wrong_reverse_flag_detected() {
        let a = rectangle([0.0, 1.0], [0.0, 1.0]).unwrap();
        let b = rectangle([1.0, 2.0], [0.0, 1.0]).unwrap();
        assert!(MultiPatch::new(
            vec![a, b],
            vec![Interface::new(0, Side::new(0, true), 1, Side::new(0, false), vec![true])],
        )
        .is_err());
    }

    #[test]
    fn flatten_round_trip() {
        let sizes = [3, 4, 2];
        for pos in 0..24 {
            assert_eq!(flatten(&unflatten(pos, &sizes), &sizes), pos);
        }
    }
}
