//! Closed-form optimal working point for two-photon suppression in the
//! driven cavity, from the weak-drive two-photon amplitude condition.

use crate::error::{Error, Result};

/// Optimal common detuning
/// `Δ_opt = −½·√(√(9J⁴ + 8κ²J²) − 3J² − κ²)`.
///
/// Defined for J ≥ κ/√2. The inner difference is evaluated in the
/// cancellation-free form `8κ²J² / (√(9J⁴ + 8κ²J²) + 3J²)`.
pub fn optimal_detuning(j: f64, kappa: f64) -> Result<f64> {
    if !(j > 0.0 && kappa > 0.0) {
        return Err(Error::Domain(format!(
            "optimal detuning needs J > 0 and kappa > 0 (J = {j}, kappa = {kappa})"
        )));
    }
    let j2 = j * j;
    let k2 = kappa * kappa;
    let outer = (9.0 * j2 * j2 + 8.0 * k2 * j2).sqrt();
    let radicand = 8.0 * k2 * j2 / (outer + 3.0 * j2) - k2;
    if radicand < 0.0 {
        return Err(Error::Domain(format!(
            "optimal detuning radicand is negative ({radicand:.6e}) for J = {j}, kappa = {kappa}"
        )));
    }
    Ok(-0.5 * radicand.sqrt())
}

/// Relative margin below which 2J² − κ² counts as zero.
const BOUNDARY_MARGIN: f64 = 1e-12;

/// Optimal single-photon coupling at the optimal detuning,
/// `g₀ = √(−ω_m Δ (5κ² + 4Δ²) / (2(2J² − κ²)))`.
///
/// Both numerator and denominator vanish at J = κ/√2; values within
/// rounding of that boundary are rejected.
pub fn optimal_coupling(j: f64, kappa: f64, omega_m: f64) -> Result<f64> {
    let denom = 2.0 * (2.0 * j * j - kappa * kappa);
    if !(denom > 2.0 * BOUNDARY_MARGIN * kappa * kappa) {
        return Err(Error::Domain(format!(
            "optimal coupling needs 2J^2 > kappa^2 (J = {j}, kappa = {kappa})"
        )));
    }
    if !(omega_m > 0.0) {
        return Err(Error::Domain(format!(
            "omega_m must be positive, got {omega_m}"
        )));
    }
    let delta = optimal_detuning(j, kappa)?;
    let numer = -omega_m * delta * (5.0 * kappa * kappa + 4.0 * delta * delta);
    Ok((numer / denom).sqrt())
}

/// J ≫ κ limit of [`optimal_detuning`]: −κ/(2√3).
pub fn asymptotic_detuning(kappa: f64) -> f64 {
    -kappa / (2.0 * 3f64.sqrt())
}

/// J ≫ κ limit of [`optimal_coupling`]:
/// `κ·√(2/(3√3))·√(ω_m/J)·√(κ/J)`.
pub fn asymptotic_coupling(j: f64, kappa: f64, omega_m: f64) -> f64 {
    kappa * (2.0 / (3.0 * 3f64.sqrt())).sqrt() * (omega_m / j).sqrt() * (kappa / j).sqrt()
}
