//! Galerkin matrices and load vectors by Gauss quadrature on the spline
//! elements, plus elimination of Dirichlet degrees of freedom.
//!
//! Element contributions are computed in parallel and concatenated in
//! element order, so the assembled values do not depend on the thread
//! count.

mod dirichlet;
mod operators;
mod quadrature;
mod sparse;

pub use dirichlet::{apply_dirichlet, Operand, Recovery, ReducedOperand};
pub use operators::{
    assemble_bilinear, assemble_multipatch, load_multipatch, op_curlu_curlv, op_f_v, op_gradu_gradv, op_u_v,
    Coefficient, Integrand, QuadratureRule,
};
pub use quadrature::gauss_legendre;
pub use sparse::SparseMatrix;
