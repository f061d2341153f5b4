//! Photon statistics of a weakly driven cavity coupled to an optomechanical
//! cavity.
//!
//! Two independent routes to the second-order correlation of the driven
//! cavity are provided:
//!
//! * [`spectral`]: linearized Langevin equations solved in the frequency
//!   domain, giving g²(τ) for arbitrary delays;
//! * [`lindblad`]: the exact steady state of the master equation on a
//!   truncated Fock space, giving equal-time correlations.
//!
//! [`sweep`] runs either or both over parameter grids.

// `!(x < tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod lindblad;
pub mod model;
pub mod optimum;
pub mod quadrature;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use model::SystemParams;
