//! Spectral computations for the Dirichlet Laplace-Beltrami operator on
//! hyperbolic space.
//!
//! The crate is organised bottom-up:
//!
//! * [`constants`] evaluates the semiclassical and best-known Lieb-Thirring
//!   constants together with the counting-bound coefficients derived from them.
//! * [`discretize`] builds Chebyshev collocation and finite-difference
//!   discretizations of `-d²/dt² + q(t)` with Dirichlet ends.
//! * [`eigen`] provides a dense QR eigensolver and Sturm-sequence bisection.
//! * [`sl_family`] solves the separated family `-ψ'' + κ e^{2t} ψ = ν ψ` with
//!   convergence certificates and assembles the eigenvalue table.
//! * [`counting`] evaluates counting functions and Riesz means and checks
//!   Pólya-type bounds against them.
//! * [`lt_verify`] checks the Lieb-Thirring inequality on box potentials and
//!   the Sobolev-type inequality for single trial functions.

#![allow(
    clippy::excessive_precision,
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord
)]

pub mod constants;
pub mod counting;
pub mod discretize;
pub mod eigen;
mod error;
pub mod lt_verify;
pub mod matrix;
pub mod quadrature;
pub mod sl_family;

pub use error::{Error, Result};
pub use matrix::DenseMatrix;

/// Formats a float with 17 significant digits, the precision used by every
/// CSV artifact the crate writes.
pub fn fmt_sig17(x: f64) -> String {
    format!("{x:.16e}")
}
