//! Truncated-Fock-space master equation: sparse generator, steady state and
//! equal-time correlations.

pub mod correlations;
pub mod liouvillian;
pub mod operators;
pub mod steady;

pub use correlations::{
    correlations_equal_time, truncation_audit, EqualTimeCorrelations, TruncationAudit,
};
pub use liouvillian::{build_liouvillian, build_liouvillian_with, Liouvillian, ThermalForm};
pub use operators::{FockConfig, ModeOperators, Operator};
pub use steady::{steady_density_matrix, SolverKind, SteadyDensityMatrix};

use crate::error::Result;
use crate::model::SystemParams;

/// Builds the generator, solves for ρ and evaluates the correlations.
pub fn solve_point(
    p: &SystemParams,
    fock: &FockConfig,
) -> Result<(SteadyDensityMatrix, EqualTimeCorrelations)> {
    let l = build_liouvillian(p, fock)?;
    let s = steady_density_matrix(&l)?;
    let c = correlations_equal_time(&s)?;
    Ok((s, c))
}
