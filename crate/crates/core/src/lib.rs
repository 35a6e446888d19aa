//! Isogeometric analysis for electromagnetic field problems.
//!
//! The crate covers the whole chain from CAD-style geometry to derived field
//! quantities:
//!
//! - [`splines`]: B-spline and NURBS bases, knot insertion.
//! - [`geometry`]: NURBS patches, exact conics, multipatch topology, the
//!   pull-backs of the de Rham sequence.
//! - [`spaces`]: the discrete spline complex, discrete differential
//!   operators, boundary and interface degrees of freedom.
//! - [`assembly`]: Galerkin matrices by Gauss quadrature.
//! - [`solve`]: Poisson solves and Maxwell cavity eigenproblems.
//! - [`postprocess`]: field sampling, multipoles, flatness and gradient
//!   metrics, CSV/VTK export.
//! - [`optimize`]: control-point design vectors, finite-difference shape
//!   gradients, bounded minimization and worst-case estimates.
//! - [`cli`]: the `igakit` command-line front end.

// `!(x > 0.0)` also rejects NaN; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assembly;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod optimize;
pub mod postprocess;
pub mod solve;
pub mod spaces;
pub mod splines;

pub use error::{Error, Result};
