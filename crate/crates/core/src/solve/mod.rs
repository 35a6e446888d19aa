//! Linear solves, generalized eigenproblems and the Poisson and Maxwell
//! drivers built on them.

mod eigen;
mod linear;
mod maxwell;
mod poisson;

pub use eigen::{lambda_max_estimate, solve_eigs, EigenOptions, EigenResult, KERNEL_TOL, RESIDUAL_TOL};
pub use linear::{solve_spd, SparseFactor};
pub use maxwell::{maxwell_eigs_2d, maxwell_eigs_3d, Formulation, Modes, MAX_DOFS_3D};
pub use poisson::{solve_poisson, BoundaryCondition};

use crate::error::{Error, Result};
use crate::geometry::MultiPatch;
use crate::spaces::{DiscreteSpace, MultiPatchSpace};

/// Space a coefficient vector lives in.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldSpace {
    /// Globally continuous scalar field over all patches.
    Scalar(MultiPatchSpace),
    /// Field of any form kind on a single patch.
    Form(DiscreteSpace),
}

impl FieldSpace {
    pub fn dof_count(&self) -> usize {
        match self {
            FieldSpace::Scalar(s) => s.dof_count(),
            FieldSpace::Form(s) => s.dof_count(),
        }
    }

    pub fn kind(&self) -> usize {
        match self {
            FieldSpace::Scalar(_) => 0,
            FieldSpace::Form(s) => s.kind(),
        }
    }

    /// Local space and coefficients of one patch.
    pub fn restrict<'a>(&'a self, patch: usize, coeffs: &[f64]) -> Result<(&'a DiscreteSpace, Vec<f64>)> {
        match self {
            FieldSpace::Scalar(s) => {
                let space = s.spaces().get(patch).ok_or_else(|| Error::validation(format!("no patch {patch}")))?;
                Ok((space, s.restrict(patch, coeffs)))
            }
            FieldSpace::Form(s) if s.patch() == patch => Ok((s, coeffs.to_vec())),
            FieldSpace::Form(s) => {
                Err(Error::validation(format!("field lives on patch {} only, not on patch {patch}", s.patch())))
            }
        }
    }
}

/// Discrete field: geometry, space and the full coefficient vector
/// (boundary values included).
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    geometry: MultiPatch,
    space: FieldSpace,
    coefficients: Vec<f64>,
}

impl Solution {
    pub fn new(geometry: MultiPatch, space: FieldSpace, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != space.dof_count() {
            return Err(Error::validation(format!(
                "coefficient vector has length {}, space has {} DOFs",
                coefficients.len(),
                space.dof_count()
            )));
        }
        Ok(Self { geometry, space, coefficients })
    }

    pub fn geometry(&self) -> &MultiPatch {
        &self.geometry
    }

    pub fn space(&self) -> &FieldSpace {
        &self.space
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
}

/// Vacuum constants (SI) and relative material scalars.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    pub eps0: f64,
    pub mu0: f64,
    pub eps_r: f64,
    pub mu_r: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { eps0: 8.8541878188e-12, mu0: 1.25663706127e-6, eps_r: 1.0, mu_r: 1.0 }
    }
}

impl PhysicalConstants {
    pub fn new(eps_r: f64, mu_r: f64) -> Result<Self> {
        if !(eps_r > 0.0 && mu_r > 0.0) {
            return Err(Error::validation("relative permittivity and permeability must be positive"));
        }
        Ok(Self { eps_r, mu_r, ..Self::default() })
    }

    pub fn wave_speed(&self) -> f64 {
        1.0 / (self.eps0 * self.eps_r * self.mu0 * self.mu_r).sqrt()
    }

    /// Resonance frequency in Hz of a geometry-unit eigenvalue when one
    /// geometry unit is `length_scale` metres.
    pub fn frequency(&self, lambda: f64, length_scale: f64) -> f64 {
        self.wave_speed() * lambda.max(0.0).sqrt() / (2.0 * std::f64::consts::PI * length_scale)
    }
}

impl EigenResult {
    /// Fills in [`EigenResult::frequencies`].
    pub fn with_frequencies(mut self, constants: &PhysicalConstants, length_scale: f64) -> Result<Self> {
        if !(length_scale > 0.0) {
            return Err(Error::validation("length scale must be positive"));
        }
        self.frequencies = Some(self.eigenvalues.iter().map(|&l| constants.frequency(l, length_scale)).collect());
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pillbox_frequency_scale() {
        // TM010 of a 1 m radius pill-box: c j01 / (2 pi)
        let c = PhysicalConstants::default();
        let f = c.frequency(2.404825557695773f64.powi(2), 1.0);
        assert!((f / 114.743e6 - 1.0).abs() < 1e-4, "{f}");
        assert!((c.wave_speed() / 299_792_458.0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constants_must_be_positive() {
        assert!(PhysicalConstants::new(0.0, 1.0).is_err());
    }
}
