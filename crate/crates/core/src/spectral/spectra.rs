//! Noise spectra of the cavity-A fluctuation and their Fourier integrals.

use std::f64::consts::PI;

use num_complex::Complex64 as c64;

use super::steady::SteadyStateFields;
use super::transfer::{transfer_functions, transfer_unchecked};
use crate::error::{Error, Result};
use crate::model::{SystemParams, ThermalSpectrum};
use crate::quadrature::{integrate, QuadratureConfig};

/// Quadrature targets relative to the coherent intensity |α₀|².
const ABS_TOL_FRACTION: f64 = 1e-10;
const REL_TOL: f64 = 1e-9;
/// Tail estimates must stay below this fraction of the absolute target.
const MAX_DOMAIN_DOUBLINGS: usize = 6;

/// Spectral densities at one frequency: the real normal-ordered density
/// X_{a†a}(ω) and the complex anomalous density X_{aa}(ω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpectra {
    pub normal: f64,
    pub anomalous: c64,
}

fn spectra_at(
    p: &SystemParams,
    ss: &SteadyStateFields,
    bath: &ThermalSpectrum,
    omega: f64,
) -> Result<NoiseSpectra> {
    let plus = transfer_unchecked(p, ss, omega)?;
    let minus = transfer_unchecked(p, ss, -omega)?;
    let s = bath.eval(omega);
    Ok(NoiseSpectra {
        normal: minus.q.norm_sqr() * s + minus.f.norm_sqr() + minus.h.norm_sqr(),
        anomalous: plus.q * minus.q * s + plus.e * minus.f + plus.g * minus.h,
    })
}

/// X_{a†a}(ω) and X_{aa}(ω).
pub fn noise_spectra(p: &SystemParams, ss: &SteadyStateFields, omega: f64) -> Result<NoiseSpectra> {
    // Stability check happens once here; the hot path skips it.
    transfer_functions(p, ss, omega)?;
    let bath = ThermalSpectrum::new(p)?;
    spectra_at(p, ss, &bath, omega)
}

/// Half-width of the integration window: ω_m + 50·max(κ, γ_m·ω_m/κ).
pub fn integration_half_width(p: &SystemParams) -> f64 {
    let kappa = p.kappa_a.max(p.kappa_b);
    p.omega_m + 50.0 * kappa.max(p.gamma_m * p.omega_m / kappa)
}

/// Forced panel boundaries: the origin, the normal-mode frequencies of the
/// coupled cavities and their mirror images, and a geometric ladder around
/// the narrow mechanical resonances at ±ω_m.
pub fn breakpoints(p: &SystemParams, half_width: f64) -> Vec<f64> {
    let kappa = p.kappa_a.max(p.kappa_b);
    let d = p.delta;
    let j = p.coupling;
    let mut pts = vec![-half_width, 0.0, half_width];
    for centre in [d, j, d + j, d - j] {
        for s in [-1.0, 1.0] {
            let c = s * centre;
            pts.extend([c - kappa, c, c + kappa]);
        }
    }
    let width = 0.5 * p.gamma_m;
    for s in [-1.0, 1.0] {
        let c = s * p.omega_m;
        pts.push(c);
        let mut offset = 0.5 * width;
        while offset < 4.0 * kappa && offset < 0.25 * p.omega_m {
            pts.extend([c - offset, c + offset]);
            offset *= 4.0;
        }
    }
    pts.retain(|x| x.is_finite() && x.abs() <= half_width);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * half_width);
    pts
}

/// Two-time fluctuation correlators on a delay grid:
/// `normal[k] = ⟨δa†(t) δa(t+τ_k)⟩` and
/// `anomalous[k] = ⟨T[δa(t+τ_k) δa(t)]⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationIntegrals {
    pub tau: Vec<f64>,
    pub normal: Vec<c64>,
    pub anomalous: Vec<c64>,
    /// Largest quadrature error estimate over all components.
    pub max_error: f64,
    pub panels: usize,
    pub half_width: f64,
}

pub fn correlation_integrals(
    p: &SystemParams,
    ss: &SteadyStateFields,
    tau_grid: &[f64],
) -> Result<CorrelationIntegrals> {
    if tau_grid.is_empty() || tau_grid[0] != 0.0 || tau_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain(
            "delay grid must start at 0 and be strictly increasing".into(),
        ));
    }
    if !ss.stable {
        return Err(Error::Unstable {
            max_real_eigenvalue: ss.max_real_eigenvalue,
        });
    }
    let bath = ThermalSpectrum::new(p)?;
    let n_tau = tau_grid.len();
    let dim = 4 * n_tau;
    let scale = ss.alpha0.norm_sqr().max(f64::MIN_POSITIVE);
    let tau_max = *tau_grid.last().unwrap_or(&0.0);
    let cfg = QuadratureConfig {
        abs_tol: ABS_TOL_FRACTION * scale,
        rel_tol: REL_TOL,
        max_frequency: tau_max,
        ..QuadratureConfig::default()
    };

    let mut half_width = integration_half_width(p);
    for _ in 0..=MAX_DOMAIN_DOUBLINGS {
        let mut failure: Option<Error> = None;
        let integrand = |omega: f64, out: &mut [f64]| match spectra_at(p, ss, &bath, omega) {
            Ok(x) => {
                for (k, &tau) in tau_grid.iter().enumerate() {
                    let (sin, cos) = (omega * tau).sin_cos();
                    // e^{iωτ} for the normal term, e^{−iωτ} for the anomalous
                    out[2 * k] = x.normal * cos;
                    out[2 * k + 1] = x.normal * sin;
                    let an = x.anomalous * c64::new(cos, -sin);
                    out[2 * n_tau + 2 * k] = an.re;
                    out[2 * n_tau + 2 * k + 1] = an.im;
                }
            }
            Err(e) => {
                failure.get_or_insert(e);
                out.fill(0.0);
            }
        };
        let pts = breakpoints(p, half_width);
        let result = integrate(integrand, dim, &pts, &cfg);
        if let Some(e) = failure {
            return Err(e);
        }
        let result = result?;

        // Power-law tail estimate beyond ±half_width at τ = 0.
        let tail = tail_estimate(p, ss, &bath, half_width)?;
        if tail > cfg.abs_tol {
            half_width *= 2.0;
            continue;
        }

        let norm = 1.0 / (2.0 * PI);
        let normal = (0..n_tau)
            .map(|k| norm * c64::new(result.values[2 * k], result.values[2 * k + 1]))
            .collect();
        let anomalous = (0..n_tau)
            .map(|k| {
                norm * c64::new(
                    result.values[2 * n_tau + 2 * k],
                    result.values[2 * n_tau + 2 * k + 1],
                )
            })
            .collect();
        let max_error = norm * result.errors.iter().cloned().fold(0.0, f64::max);
        return Ok(CorrelationIntegrals {
            tau: tau_grid.to_vec(),
            normal,
            anomalous,
            max_error,
            panels: result.panels,
            half_width,
        });
    }
    Err(Error::Integration {
        error: f64::NAN,
        target: cfg.abs_tol,
        panels: 0,
    })
}

/// Estimates ∫_{|ω|>L} (|X_{a†a}| + |X_{aa}|) dω / 2π assuming power-law
/// decay fitted from the values at L and 2L.
fn tail_estimate(
    p: &SystemParams,
    ss: &SteadyStateFields,
    bath: &ThermalSpectrum,
    l: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for s in [-1.0, 1.0] {
        let near = spectra_at(p, ss, bath, s * l)?;
        let far = spectra_at(p, ss, bath, 2.0 * s * l)?;
        for (a, b) in [
            (near.normal.abs(), far.normal.abs()),
            (near.anomalous.norm(), far.anomalous.norm()),
        ] {
            if a == 0.0 {
                continue;
            }
            let decay = if b > 0.0 {
                (a / b).log2()
            } else {
                f64::INFINITY
            };
            total += if decay > 1.5 {
                a * l / (decay - 1.0)
            } else {
                // too slow to trust an extrapolation
                f64::INFINITY
            };
        }
    }
    Ok(total / (2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::steady::solve_steady_state;

    #[test]
    fn no_mirror_coupling_gives_vanishing_spectra() {
        let p = SystemParams {
            g0: 0.0,
            ..SystemParams::default()
        };
        let ss = solve_steady_state(&p).unwrap();
        for w in [-100.0, -1.0, 0.0, 50.0] {
            let x = noise_spectra(&p, &ss, w).unwrap();
            assert_eq!(x.normal, 0.0);
            assert_eq!(x.anomalous, c64::new(0.0, 0.0));
        }
        let c = correlation_integrals(&p, &ss, &[0.0, 0.5, 1.0]).unwrap();
        assert!(c.normal.iter().chain(&c.anomalous).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn zero_temperature_negative_frequency_keeps_only_optical_terms() {
        let p = SystemParams {
            temperature: 1e-12,
            ..SystemParams::default()
        };
        let ss = solve_steady_state(&p).unwrap();
        let w = -37.0;
        let x = noise_spectra(&p, &ss, w).unwrap();
        let m = transfer_functions(&p, &ss, -w).unwrap();
        let optical = m.f.norm_sqr() + m.h.norm_sqr();
        assert!((x.normal - optical).abs() <= 1e-14 * optical);
    }

    #[test]
    fn normal_spectrum_is_nonnegative() {
        let p = SystemParams::default();
        let ss = solve_steady_state(&p).unwrap();
        for k in -400..=400 {
            let w = 0.4 * k as f64;
            assert!(noise_spectra(&p, &ss, w).unwrap().normal >= 0.0);
        }
    }

    #[test]
    fn equal_time_normal_correlator_is_real_and_positive() {
        let p = SystemParams::default();
        let ss = solve_steady_state(&p).unwrap();
        let c = correlation_integrals(&p, &ss, &[0.0]).unwrap();
        assert!(c.normal[0].re > 0.0);
        assert_eq!(c.normal[0].im, 0.0);
    }

    #[test]
    fn breakpoints_are_sorted_and_bounded() {
        let p = SystemParams::default();
        let l = integration_half_width(&p);
        assert_eq!(l, 150.0);
        let pts = breakpoints(&p, l);
        assert_eq!(pts[0], -l);
        assert_eq!(*pts.last().unwrap(), l);
        assert!(pts.windows(2).all(|w| w[1] > w[0]));
        assert!(pts.contains(&100.0) && pts.contains(&-100.0) && pts.contains(&0.0));
    }

    #[test]
    fn delay_grid_must_start_at_zero() {
        let p = SystemParams::default();
        let ss = solve_steady_state(&p).unwrap();
        assert!(correlation_integrals(&p, &ss, &[0.1, 0.2]).is_err());
        assert!(correlation_integrals(&p, &ss, &[0.0, 0.2, 0.1]).is_err());
    }
}
