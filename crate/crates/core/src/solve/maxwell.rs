use std::fmt;
use std::str::FromStr;

use super::{solve_eigs, EigenOptions, EigenResult, FieldSpace, Solution};
use crate::assembly::{
    apply_dirichlet, assemble_multipatch, op_curlu_curlv, op_u_v, Coefficient, Integrand, Operand, Recovery,
    ReducedOperand, SparseMatrix,
};
use crate::error::{Error, Result};
use crate::geometry::{MultiPatch, Patch, Side};
use crate::spaces::{couple_scalar_multipatch, discrete_diff, make_refined_space, DiscreteSpace};

/// Largest 3D edge space the cavity driver accepts.
pub const MAX_DOFS_3D: usize = 40_000;

/// Cavity formulations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formulation {
    /// In-plane electric field in the curl-conforming space.
    Te2d,
    /// Out-of-plane electric field as a continuous scalar.
    Tm2d,
    /// Full 3D electric field.
    Curl3d,
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::Te2d => "te2d",
            Formulation::Tm2d => "tm2d",
            Formulation::Curl3d => "curl3d",
        })
    }
}

impl FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "te2d" | "te" => Ok(Formulation::Te2d),
            "tm2d" | "tm" => Ok(Formulation::Tm2d),
            "curl3d" => Ok(Formulation::Curl3d),
            other => Err(Error::validation(format!("unknown formulation {other:?} (expected te2d, tm2d or curl3d)"))),
        }
    }
}

/// Cavity modes together with the space the eigenvectors live in.
/// Eigenvectors are full length with zero PEC coefficients.
#[derive(Clone, Debug)]
pub struct Modes {
    pub geometry: MultiPatch,
    pub space: FieldSpace,
    pub result: EigenResult,
}

impl Modes {
    pub fn mode(&self, i: usize) -> Result<Solution> {
        let v =
            self.result.eigenvectors.get(i).ok_or_else(|| {
                Error::validation(format!("only {} modes were computed", self.result.eigenvectors.len()))
            })?;
        Solution::new(self.geometry.clone(), self.space.clone(), v.clone())
    }
}

fn single_patch(mp: &MultiPatch, what: &str) -> Result<Patch> {
    match mp.patches() {
        [p] => Ok(p.clone()),
        ps => Err(Error::Usage(format!("{what} needs a single-patch geometry, got {} patches", ps.len()))),
    }
}

fn expand_all(mut result: EigenResult, recovery: &Recovery) -> Result<EigenResult> {
    result.eigenvectors = result.eigenvectors.iter().map(|v| recovery.expand(v)).collect::<Result<_>>()?;
    Ok(result)
}

fn constrained_eigs(
    k: &SparseMatrix,
    m: &SparseMatrix,
    pec: &[usize],
    count: usize,
    opts: EigenOptions,
) -> Result<(EigenResult, Recovery)> {
    let (kr, op, recovery) = apply_dirichlet(k, Operand::Mass(m), pec, &[])?;
    let ReducedOperand::Mass(mr) = op else { unreachable!("mass operand stays a mass") };
    Ok((solve_eigs(&kr, &mr, count, &opts)?, recovery))
}

// Discrete gradients of interior scalar DOFs, restricted to the free edge
// DOFs: a basis of the curl-curl kernel after PEC elimination.
fn gradient_kernel(space: &DiscreteSpace, free: &[usize]) -> Result<SparseMatrix> {
    let scalar = DiscreteSpace::new(space.base().clone(), 0)?;
    let (_, g) = discrete_diff(&scalar)?;
    let sides: Vec<Side> = Side::all(space.dim()).collect();
    let fixed = scalar.boundary_dofs(&sides);
    let interior: Vec<usize> = (0..scalar.dof_count()).filter(|i| fixed.binary_search(i).is_err()).collect();
    Ok(g.submatrix(free, &interior))
}

fn edge_eigs(
    patch: &Patch,
    space: DiscreteSpace,
    count: usize,
    opts: &EigenOptions,
) -> Result<(FieldSpace, EigenResult)> {
    let k = op_curlu_curlv(patch, &space, &Coefficient::Constant(1.0))?;
    let m = op_u_v(patch, &space, &Coefficient::Constant(1.0))?;
    let sides: Vec<Side> = Side::all(space.dim()).collect();
    let pec = space.boundary_dofs(&sides);
    let free: Vec<usize> = (0..space.dof_count()).filter(|i| pec.binary_search(i).is_err()).collect();
    let mut opts = opts.clone();
    if free.len() > opts.dense_limit && opts.kernel_basis.is_none() {
        opts.kernel_basis = Some(gradient_kernel(&space, &free)?);
    }
    let (result, recovery) = constrained_eigs(&k, &m, &pec, count, opts)?;
    Ok((FieldSpace::Form(space), expand_all(result, &recovery)?))
}

/// Lowest `count` nonzero cavity modes of a 2D domain with perfectly
/// conducting walls.
///
/// TE needs a single patch; TM works on any conforming multipatch.
pub fn maxwell_eigs_2d(
    mp: &MultiPatch,
    formulation: Formulation,
    degrees: &[usize],
    refine: &[usize],
    count: usize,
    opts: &EigenOptions,
) -> Result<Modes> {
    if mp.param_dim() != 2 || mp.phys_dim() != 2 {
        return Err(Error::validation("2D cavity modes need a planar 2D geometry"));
    }
    let (space, result) = match formulation {
        Formulation::Te2d => {
            let patch = single_patch(mp, "the TE formulation")?;
            edge_eigs(&patch, make_refined_space(&patch, 1, degrees, refine)?, count, opts)?
        }
        Formulation::Tm2d => {
            let space = couple_scalar_multipatch(mp, degrees, refine)?;
            let one = [Coefficient::Constant(1.0)];
            let k = assemble_multipatch(mp, &space, Integrand::Gradient, &one)?;
            let m = assemble_multipatch(mp, &space, Integrand::Value, &one)?;
            let pec = space.boundary_dofs(&mp.boundary_sides());
            let (result, recovery) = constrained_eigs(&k, &m, &pec, count, opts.clone())?;
            (FieldSpace::Scalar(space), expand_all(result, &recovery)?)
        }
        Formulation::Curl3d => return Err(Error::Usage("curl3d is a 3D formulation; use maxwell_eigs_3d".into())),
    };
    Ok(Modes { geometry: mp.clone(), space, result })
}

/// Lowest `count` nonzero modes of a 3D single-patch cavity with perfectly
/// conducting walls.
pub fn maxwell_eigs_3d(
    mp: &MultiPatch,
    degrees: &[usize],
    refine: &[usize],
    count: usize,
    opts: &EigenOptions,
) -> Result<Modes> {
    let patch = single_patch(mp, "the 3D cavity solver")?;
    if patch.param_dim() != 3 || patch.phys_dim() != 3 {
        return Err(Error::validation("3D cavity modes need a volumetric 3D patch"));
    }
    let space = make_refined_space(&patch, 1, degrees, refine)?;
    if space.dof_count() > MAX_DOFS_3D {
        return Err(Error::validation(format!(
            "edge space has {} DOFs, above the limit of {MAX_DOFS_3D}; use a coarser mesh or lower degree",
            space.dof_count()
        )));
    }
    let (space, result) = edge_eigs(&patch, space, count, opts)?;
    Ok(Modes { geometry: mp.clone(), space, result })
}
