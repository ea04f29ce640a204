//! Expected numbers of critical points of Gaussian random polynomials on the
//! circle, the L-torus and round spheres, with Monte Carlo cross-checks.

// `!(x > 0.0)` is used on purpose so that NaN arguments are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circle;
pub mod error;
pub mod numutil;
pub mod specfun;
pub mod sphere;
pub mod symgauss;
pub mod torus;

pub use error::{Error, Result};
pub use numutil::{McEstimate, QuadResult, RngStream};
