//! Linearized quantum-Langevin pipeline: mean fields, stability, transfer
//! functions, noise spectra and g²(τ).

pub mod g2;
pub mod spectra;
pub mod steady;
pub mod transfer;

pub use g2::{g2_tau, g2_zero, CorrelationSet, ZeroDelay};
pub use spectra::{correlation_integrals, noise_spectra, CorrelationIntegrals, NoiseSpectra};
pub use steady::{drift_matrix, solve_steady_state, SteadyStateFields};
pub use transfer::{susceptibility, transfer_functions, TransferEval};
