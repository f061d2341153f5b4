//! Frequency-domain response of the cavity-A fluctuation to the input noises.
//!
//! With the convention `f(t) = ∫ dω/2π f(ω) e^{−iωt}`,
//!
//! ```text
//! δa(ω) = E a_in(ω) + F a_in†(ω) + G b_in(ω) + H b_in†(ω) + Q ξ(ω)
//! ```
//!
//! where the coefficients follow from eliminating δq, δb, δb† and δa† from
//! the linearized equations; `D(ω)` is the determinant of the remaining
//! optical 4×4 system.

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use super::steady::SteadyStateFields;
use crate::error::{Error, Result};
use crate::model::SystemParams;

/// |D(ω)| below this is treated as a singular response.
pub const SINGULAR_THRESHOLD: f64 = 1e-280;

/// Mechanical susceptibility χ(ω) = ω_m² / (ω_m² − ω² − iωγ_m/2).
pub fn susceptibility(p: &SystemParams, omega: f64) -> c64 {
    let wm2 = p.omega_m * p.omega_m;
    wm2 / c64::new(wm2 - omega * omega, -0.5 * omega * p.gamma_m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferEval {
    pub omega: f64,
    #[serde(with = "super::steady::complex_pair")]
    pub e: c64,
    #[serde(with = "super::steady::complex_pair")]
    pub f: c64,
    #[serde(with = "super::steady::complex_pair")]
    pub g: c64,
    #[serde(with = "super::steady::complex_pair")]
    pub h: c64,
    #[serde(with = "super::steady::complex_pair")]
    pub q: c64,
    #[serde(with = "super::steady::complex_pair")]
    pub a11: c64,
    #[serde(with = "super::steady::complex_pair")]
    pub a22: c64,
    #[serde(with = "super::steady::complex_pair")]
    pub a33: c64,
    #[serde(with = "super::steady::complex_pair")]
    pub a44: c64,
    #[serde(with = "super::steady::complex_pair")]
    pub d: c64,
    #[serde(with = "super::steady::complex_pair")]
    pub chi: c64,
    /// Effective cavity-B detuning including the dynamical optical spring.
    #[serde(with = "super::steady::complex_pair")]
    pub delta_b_prime: c64,
}

impl TransferEval {
    /// Coefficients in the order (E, F, G, H, Q).
    pub fn coefficients(&self) -> [c64; 5] {
        [self.e, self.f, self.g, self.h, self.q]
    }
}

/// Evaluates the transfer functions without checking stability; callers
/// that already validated the steady state use this in hot loops.
pub(crate) fn transfer_unchecked(
    p: &SystemParams,
    ss: &SteadyStateFields,
    omega: f64,
) -> Result<TransferEval> {
    let i = c64::i();
    let gb = p.g_b();
    let j = p.coupling;
    let b0 = ss.beta0;
    let x = b0.norm_sqr();
    let chi = susceptibility(p, omega);
    let chi_m = chi / p.omega_m;

    let delta_b_prime = p.delta_b() + gb * ss.q0 - gb * gb * x * chi_m;
    // κ_a/2 − i(Δ_a + ω)
    let va = c64::new(0.5 * p.kappa_a, -(p.delta_a() + omega));
    let kb_w = c64::new(0.5 * p.kappa_b, -omega);

    let a11 = va * (kb_w * kb_w + delta_b_prime * delta_b_prime)
        - va * gb.powi(4) * x * x * chi_m * chi_m
        + j * j * (0.5 * p.kappa_b + i * (delta_b_prime - omega));
    let a22 = -i * j * j * gb * gb * b0 * b0 * chi_m;
    let a33 = -i * j * va * (0.5 * p.kappa_b - i * (delta_b_prime + omega)) - i * j * j * j;
    let a44 = -j * gb * gb * b0 * b0 * chi_m * va;
    let d = c64::new(0.5 * p.kappa_a, p.delta_a() - omega) * a11 + i * j * a33;

    if !(d.norm() >= SINGULAR_THRESHOLD) {
        return Err(Error::SingularResponse {
            omega,
            magnitude: d.norm(),
        });
    }

    let sqrt_ka = p.kappa_a.sqrt();
    let sqrt_kb = p.kappa_b.sqrt();
    Ok(TransferEval {
        omega,
        e: sqrt_ka * a11 / d,
        f: -sqrt_ka * a22 / d,
        g: sqrt_kb * a33 / d,
        h: -sqrt_kb * a44 / d,
        q: -i * gb * chi_m / d * (b0 * a33 + b0.conj() * a44),
        a11,
        a22,
        a33,
        a44,
        d,
        chi,
        delta_b_prime,
    })
}

/// Transfer functions E, F, G, H, Q and their intermediates at `omega`.
pub fn transfer_functions(
    p: &SystemParams,
    ss: &SteadyStateFields,
    omega: f64,
) -> Result<TransferEval> {
    if !ss.stable {
        return Err(Error::Unstable {
            max_real_eigenvalue: ss.max_real_eigenvalue,
        });
    }
    transfer_unchecked(p, ss, omega)
}
