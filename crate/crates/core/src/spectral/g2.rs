//! Second-order correlation of cavity A from the linearized fluctuations.
//!
//! Writing a = α₀ + δa and treating δa as a Gaussian process,
//! g²(τ) = G₁(τ) + G₂(τ): G₁ collects terms at most quadratic in δa,
//! G₂ the pair-factorized quartic terms. Denominators use the stationary
//! equal-time population ⟨δa†δa⟩.

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use super::spectra::{correlation_integrals, CorrelationIntegrals};
use super::steady::{solve_steady_state, SteadyStateFields};
use crate::error::{Error, Result};
use crate::model::SystemParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSet {
    /// Delays in units of 1/κ.
    pub tau_grid: Vec<f64>,
    pub g2: Vec<f64>,
    pub g1_part: Vec<f64>,
    pub g2_part: Vec<f64>,
    /// ⟨δa†δa⟩ at τ = 0.
    pub n_a_fluct: f64,
    pub fields: SteadyStateFields,
}

/// G₁(τ) and G₂(τ) from the coherent amplitude and the fluctuation correlators.
pub fn assemble(alpha: c64, n0: f64, normal: c64, anomalous: c64) -> (f64, f64) {
    let a2 = alpha.norm_sqr();
    let denom = (a2 + n0) * (a2 + n0);
    let g1 = (a2 * a2
        + 2.0 * a2 * n0
        + 2.0 * a2 * normal.re
        + 2.0 * (alpha.conj() * alpha.conj() * anomalous).re)
        / denom;
    let g2 = (n0 * n0 + normal.norm_sqr() + anomalous.norm_sqr()) / denom;
    (g1, g2)
}

fn from_integrals(fields: SteadyStateFields, c: &CorrelationIntegrals) -> CorrelationSet {
    let n0 = c.normal[0].re;
    let (mut g2, mut g1_part, mut g2_part) = (Vec::new(), Vec::new(), Vec::new());
    for (normal, anomalous) in c.normal.iter().zip(&c.anomalous) {
        let (a, b) = assemble(fields.alpha0, n0, *normal, *anomalous);
        g1_part.push(a);
        g2_part.push(b);
        g2.push(a + b);
    }
    CorrelationSet {
        tau_grid: c.tau.clone(),
        g2,
        g1_part,
        g2_part,
        n_a_fluct: n0,
        fields,
    }
}

/// g²(τ) on a delay grid that starts at 0.
pub fn g2_tau(p: &SystemParams, tau_grid: &[f64]) -> Result<CorrelationSet> {
    if p.eps_c == 0.0 {
        return Err(Error::UndefinedCorrelation(
            "zero drive: the cavity is in vacuum".into(),
        ));
    }
    let fields = solve_steady_state(p)?;
    let c = correlation_integrals(p, &fields, tau_grid)?;
    Ok(from_integrals(fields, &c))
}

/// g²(0) with its decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroDelay {
    pub g2: f64,
    pub g1_part: f64,
    pub g2_part: f64,
    pub n_a_fluct: f64,
    #[serde(with = "super::steady::complex_pair")]
    pub anomalous: c64,
    pub fields: SteadyStateFields,
}

pub fn g2_zero(p: &SystemParams) -> Result<ZeroDelay> {
    if p.eps_c == 0.0 {
        return Err(Error::UndefinedCorrelation(
            "zero drive: the cavity is in vacuum".into(),
        ));
    }
    let fields = solve_steady_state(p)?;
    let c = correlation_integrals(p, &fields, &[0.0])?;
    let anomalous = c.anomalous[0];
    let set = from_integrals(fields, &c);
    Ok(ZeroDelay {
        g2: set.g2[0],
        g1_part: set.g1_part[0],
        g2_part: set.g2_part[0],
        n_a_fluct: set.n_a_fluct,
        anomalous,
        fields,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coherent_limit_is_exactly_one() {
        for (j, d) in [(30.0, -0.29), (3.0, 0.4), (0.0, 1.0)] {
            let p = SystemParams {
                g0: 0.0,
                coupling: j,
                delta: d,
                ..SystemParams::default()
            };
            let set = g2_tau(&p, &[0.0, 0.3, 2.0]).unwrap();
            for g in &set.g2 {
                assert!((g - 1.0).abs() < 1e-12, "{g}");
            }
            assert!(set.g2_part.iter().all(|x| *x == 0.0));
        }
    }

    #[test]
    fn zero_drive_is_undefined() {
        let p = SystemParams {
            eps_c: 0.0,
            ..SystemParams::default()
        };
        assert!(matches!(g2_zero(&p), Err(Error::UndefinedCorrelation(_))));
    }

    #[test]
    fn operating_point_is_antibunched() {
        let z = g2_zero(&SystemParams::default()).unwrap();
        assert!(z.g2 < 0.05, "{z:?}");
        assert!(z.g2 >= 0.0);
        assert!(z.g2_part >= 0.0);
        assert!(z.g1_part < 0.0);
        assert!((z.g2 - z.g1_part - z.g2_part).abs() < 1e-15);
    }

    #[test]
    fn assembly_of_pure_coherent_field() {
        let (g1, g2) = assemble(
            c64::new(0.3, -0.1),
            0.0,
            c64::new(0.0, 0.0),
            c64::new(0.0, 0.0),
        );
        assert!((g1 - 1.0).abs() < 1e-15);
        assert_eq!(g2, 0.0);
    }
}
