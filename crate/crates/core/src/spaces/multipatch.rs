use super::{make_refined_space, DiscreteSpace};
use crate::error::{Error, Result};
use crate::geometry::{flatten, side_indices, unflatten, MultiPatch, Side};

const ANCHOR_TOL: f64 = 1e-10;

/// Globally continuous scalar spline space over a multipatch.
///
/// Interface DOFs are identified one-to-one; global numbers are assigned in
/// order of first appearance, so lower patch indices keep their numbering.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPatchSpace {
    spaces: Vec<DiscreteSpace>,
    local_to_global: Vec<Vec<usize>>,
    dof_count: usize,
}

impl MultiPatchSpace {
    pub fn spaces(&self) -> &[DiscreteSpace] {
        &self.spaces
    }

    /// Global DOF of every local DOF of `patch`.
    pub fn global_dofs(&self, patch: usize) -> &[usize] {
        &self.local_to_global[patch]
    }

    pub fn dof_count(&self) -> usize {
        self.dof_count
    }

    /// Sum of the local dimensions.
    pub fn local_dof_count(&self) -> usize {
        self.spaces.iter().map(DiscreteSpace::dof_count).sum()
    }

    /// Global DOFs with support touching any of the given patch sides.
    pub fn boundary_dofs(&self, sides: &[(usize, Side)]) -> Vec<usize> {
        let mut out: Vec<usize> = sides
            .iter()
            .flat_map(|&(k, s)| self.spaces[k].boundary_dofs(&[s]).into_iter().map(move |i| self.local_to_global[k][i]))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Local coefficient vector of one patch.
    pub fn restrict(&self, patch: usize, global: &[f64]) -> Vec<f64> {
        self.local_to_global[patch].iter().map(|&g| global[g]).collect()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

/// Kind-0 spaces of the given degree and refinement on every patch, glued
/// along the interfaces.
pub fn couple_scalar_multipatch(mp: &MultiPatch, degrees: &[usize], refine: &[usize]) -> Result<MultiPatchSpace> {
    let spaces = mp.patches().iter().map(|p| make_refined_space(p, 0, degrees, refine)).collect::<Result<Vec<_>>>()?;
    let mut offsets = vec![0];
    for s in &spaces {
        offsets.push(offsets.last().copied().unwrap_or(0) + s.dof_count());
    }
    let d = mp.param_dim();
    let mut uf = UnionFind((0..*offsets.last().unwrap_or(&0)).collect());
    for (n, iface) in mp.interfaces().iter().enumerate() {
        let (sa, sb) = (&spaces[iface.patch_a], &spaces[iface.patch_b]);
        let ta = iface.side_a.tangential(d);
        let tb = iface.side_b.tangential(d);
        let sizes_a: Vec<usize> = ta.iter().map(|&t| sa.base().dirs[t].num_basis()).collect();
        let sizes_b: Vec<usize> = tb.iter().map(|&t| sb.base().dirs[t].num_basis()).collect();
        for (t, (&da, &db)) in ta.iter().zip(&tb).enumerate() {
            let (ka, kb) = (&sa.base().dirs[da], &sb.base().dirs[db]);
            let n_knots = kb.knots().len();
            let same = ka.degree() == kb.degree()
                && ka.knots().len() == n_knots
                && ka.knots().iter().enumerate().all(|(i, &x)| {
                    let y = if iface.reverse[t] { 1.0 - kb.knots()[n_knots - 1 - i] } else { kb.knots()[i] };
                    (x - y).abs() <= 1e-12
                });
            if !same {
                return Err(Error::Conformity(format!("interface {n}: discrete spaces differ along the shared side")));
            }
        }
        let idx_a = side_indices(sa.base(), iface.side_a);
        let idx_b = side_indices(sb.base(), iface.side_b);
        let pa = &mp.patches()[iface.patch_a];
        let pb = &mp.patches()[iface.patch_b];
        for (pos_a, &la) in idx_a.iter().enumerate() {
            let loc = unflatten(pos_a, &sizes_a);
            let pos_b = flatten(&iface.map_tangential(&loc, &sizes_b), &sizes_b);
            let lb = idx_b[pos_b];
            let xa = pa.eval_map(&anchor(sa, la))?;
            let xb = pb.eval_map(&anchor(sb, lb))?;
            let dist = xa.iter().zip(&xb).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if dist > ANCHOR_TOL {
                return Err(Error::Geometry(format!(
                    "interface {n}: anchors of DOF {la} (patch {}) and {lb} (patch {}) are {dist:e} apart",
                    iface.patch_a, iface.patch_b
                )));
            }
            uf.union(offsets[iface.patch_a] + la, offsets[iface.patch_b] + lb);
        }
    }
    let total = uf.0.len();
    let mut number = vec![usize::MAX; total];
    let mut next = 0;
    let mut local_to_global = Vec::with_capacity(spaces.len());
    for (k, s) in spaces.iter().enumerate() {
        let mut map = Vec::with_capacity(s.dof_count());
        for l in 0..s.dof_count() {
            let root = uf.find(offsets[k] + l);
            if number[root] == usize::MAX {
                number[root] = next;
                next += 1;
            }
            map.push(number[root]);
        }
        local_to_global.push(map);
    }
    Ok(MultiPatchSpace { spaces, local_to_global, dof_count: next })
}

// Greville point of a kind-0 DOF.
fn anchor(space: &DiscreteSpace, dof: usize) -> Vec<f64> {
    let (_, idx) = space.locate(dof);
    space.base().dirs.iter().enumerate().map(|(k, kv)| kv.greville()[idx[k]]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::conics;

    #[test]
    fn two_squares_share_an_edge() {
        let mp = conics::two_squares().unwrap();
        let sp = couple_scalar_multipatch(&mp, &[1], &[2]).unwrap();
        assert_eq!(sp.local_dof_count(), 18);
        assert_eq!(sp.dof_count(), 15);
        assert_eq!(sp.global_dofs(0), &(0..9).collect::<Vec<_>>()[..]);
    }

    #[test]
    fn single_patch_is_identity() {
        let mp = MultiPatch::single(conics::rectangle([0.0, 1.0], [0.0, 1.0]).unwrap()).unwrap();
        let sp = couple_scalar_multipatch(&mp, &[2], &[3]).unwrap();
        assert_eq!(sp.dof_count(), 25);
        assert_eq!(sp.global_dofs(0), &(0..25).collect::<Vec<_>>()[..]);
    }

    #[test]
    fn disc_corner_dofs_shared_by_three_patches() {
        let mp = conics::disc(1.0).unwrap();
        let sp = couple_scalar_multipatch(&mp, &[2], &[2]).unwrap();
        // 5 patches of 4x4, 8 shared edges of 4 DOFs, 4 corners counted 3x
        assert_eq!(sp.local_dof_count(), 80);
        assert_eq!(sp.dof_count(), 80 - 8 * 4 + 4);
        assert_eq!(sp.boundary_dofs(&mp.boundary_sides()).len(), 4 * 4 - 4);
    }
}
