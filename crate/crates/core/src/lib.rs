//! Numerical laboratory for minimal surfaces in hyperbolic 3-space.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cones;
pub mod conformal;
pub mod curvature;
pub mod curves;
pub mod entropy;
pub mod error;
pub mod harness;
pub mod hyperbolic;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod renormalized;
pub mod surface;

pub use error::{Error, Result};
