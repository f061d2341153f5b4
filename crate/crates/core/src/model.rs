//! Parameter model shared by both solvers.
//!
//! Every frequency and rate is dimensionless, measured in units of the
//! reference cavity linewidth κ. Two physical anchors convert temperatures:
//! `kappa_phys` (κ in rad/s) and `temperature` (Kelvin). The drive frame
//! fixes only detunings; absolute optical frequencies never appear.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// ħ/k_B in K·s.
pub const HBAR_OVER_KB: f64 = 7.638_23e-12;

/// Below this |ħω/2k_BT| the coth factor switches to its Laurent series.
const COTH_SERIES_THRESHOLD: f64 = 1e-6;

/// Physical parameters of the driven two-cavity optomechanical system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Mechanical frequency ω_m.
    pub omega_m: f64,
    /// Photon hopping rate J between the two cavities.
    #[serde(rename = "J")]
    pub coupling: f64,
    /// Single-photon optomechanical coupling g₀.
    pub g0: f64,
    /// Drive amplitude ε_c on cavity A.
    pub eps_c: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
    /// Mechanical damping γ_m.
    pub gamma_m: f64,
    /// Common detuning Δ; cavity A sits at Δ and cavity B at Δ + g₀²/ω_m.
    pub delta: f64,
    /// κ in rad/s, used only to convert the bath temperature.
    pub kappa_phys: f64,
    /// Mechanical bath temperature in Kelvin.
    pub temperature: f64,
}

impl Default for SystemParams {
    /// Resolved-sideband working point: ω_m = 100κ, ω_m/γ_m = 10⁴,
    /// J = 30κ, g₀ = 0.2κ, Δ = −0.29κ, ε_c = 10⁻²κ, T = 1 mK, κ/2π = 1 MHz.
    fn default() -> Self {
        Self {
            omega_m: 100.0,
            coupling: 30.0,
            g0: 0.2,
            eps_c: 1e-2,
            kappa_a: 1.0,
            kappa_b: 1.0,
            gamma_m: 100.0 / 1e4,
            delta: -0.29,
            kappa_phys: 2.0 * std::f64::consts::PI * 1e6,
            temperature: 1e-3,
        }
    }
}

impl SystemParams {
    /// Names accepted by [`SystemParams::get`] and [`SystemParams::set`].
    pub const FIELD_NAMES: [&'static str; 10] = [
        "omega_m",
        "J",
        "g0",
        "eps_c",
        "kappa_a",
        "kappa_b",
        "gamma_m",
        "delta",
        "kappa_phys",
        "temperature",
    ];

    /// Low-frequency mirror working point: ω_m = 10κ, ω_m/γ_m = 10³,
    /// J = 3κ, g₀ = 0.6κ, T = 0.1 mK.
    pub fn low_frequency_mirror() -> Self {
        Self {
            omega_m: 10.0,
            coupling: 3.0,
            g0: 0.6,
            gamma_m: 10.0 / 1e3,
            temperature: 1e-4,
            ..Self::default()
        }
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        Ok(match name {
            "omega_m" => self.omega_m,
            "J" | "j" | "coupling" => self.coupling,
            "g0" => self.g0,
            "eps_c" => self.eps_c,
            "kappa_a" => self.kappa_a,
            "kappa_b" => self.kappa_b,
            "gamma_m" => self.gamma_m,
            "delta" => self.delta,
            "kappa_phys" => self.kappa_phys,
            "temperature" => self.temperature,
            other => return Err(Error::Config(format!("unknown parameter `{other}`"))),
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "omega_m" => &mut self.omega_m,
            "J" | "j" | "coupling" => &mut self.coupling,
            "g0" => &mut self.g0,
            "eps_c" => &mut self.eps_c,
            "kappa_a" => &mut self.kappa_a,
            "kappa_b" => &mut self.kappa_b,
            "gamma_m" => &mut self.gamma_m,
            "delta" => &mut self.delta,
            "kappa_phys" => &mut self.kappa_phys,
            "temperature" => &mut self.temperature,
            other => return Err(Error::Config(format!("unknown parameter `{other}`"))),
        };
        *slot = value;
        Ok(())
    }

    /// g_b = √2·g₀, the coupling to the dimensionless position quadrature.
    pub fn g_b(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.g0
    }

    /// Static Kerr shift g₀²/ω_m.
    pub fn kerr_shift(&self) -> f64 {
        self.g0 * self.g0 / self.omega_m
    }

    pub fn delta_a(&self) -> f64 {
        self.delta
    }

    pub fn delta_b(&self) -> f64 {
        self.delta + self.kerr_shift()
    }

    /// ħω_m/(k_B T) with ω_m converted through `kappa_phys`.
    pub fn mechanical_quantum_ratio(&self) -> Result<f64> {
        if !(self.temperature > 0.0) {
            return Err(Error::Domain(format!(
                "temperature must be positive, got {} K",
                self.temperature
            )));
        }
        Ok(HBAR_OVER_KB * self.omega_m * self.kappa_phys / self.temperature)
    }

    /// Bose-Einstein occupation n̄_m of the mechanical bath.
    pub fn thermal_phonons(&self) -> Result<f64> {
        let x = self.mechanical_quantum_ratio()?;
        Ok(1.0 / x.exp_m1())
    }

    pub fn validate(&self) -> ValidationReport {
        validate_params(self)
    }
}

/// Outcome of a single regime check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    /// Informational; never counts against the report.
    Note,
    /// A regime assumption is violated; results may be unreliable.
    Warn,
    /// A parameter is outside its domain; solvers will reject it.
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    fn push(&mut self, name: &str, status: CheckStatus, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_owned(),
            status,
            detail: detail.into(),
        });
    }

    /// No warnings and no failures.
    pub fn all_pass(&self) -> bool {
        self.checks
            .iter()
            .all(|c| matches!(c.status, CheckStatus::Pass | CheckStatus::Note))
    }

    /// No hard failures (warnings allowed).
    pub fn is_usable(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn with_status(&self, status: CheckStatus) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(move |c| c.status == status)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = match c.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Note => "note",
                CheckStatus::Warn => "WARN",
                CheckStatus::Fail => "FAIL",
            };
            writeln!(f, "[{tag}] {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Checks domain constraints and the regime assumptions the models rely on.
pub fn validate_params(p: &SystemParams) -> ValidationReport {
    let mut report = ValidationReport::default();

    let strictly_positive = [
        ("omega_m", p.omega_m),
        ("kappa_a", p.kappa_a),
        ("kappa_b", p.kappa_b),
        ("gamma_m", p.gamma_m),
        ("kappa_phys", p.kappa_phys),
        ("temperature", p.temperature),
    ];
    let non_negative = [("J", p.coupling), ("g0", p.g0), ("eps_c", p.eps_c)];
    let mut bad = Vec::new();
    for (name, v) in strictly_positive {
        if !(v.is_finite() && v > 0.0) {
            bad.push(format!("{name} = {v} must be > 0"));
        }
    }
    for (name, v) in non_negative {
        if !(v.is_finite() && v >= 0.0) {
            bad.push(format!("{name} = {v} must be >= 0"));
        }
    }
    if !p.delta.is_finite() {
        bad.push(format!("delta = {} must be finite", p.delta));
    }
    if bad.is_empty() {
        report.push("domain", CheckStatus::Pass, "all parameters in range");
    } else {
        report.push("domain", CheckStatus::Fail, bad.join("; "));
        return report;
    }

    let kappa_max = p.kappa_a.max(p.kappa_b);
    if p.omega_m >= 10.0 * kappa_max {
        report.push(
            "resolved sideband",
            CheckStatus::Pass,
            format!("omega_m = {} >= 10 kappa", p.omega_m),
        );
    } else {
        report.push(
            "resolved sideband",
            CheckStatus::Warn,
            format!(
                "omega_m >> kappa violated: omega_m = {} < 10 kappa",
                p.omega_m
            ),
        );
    }

    let kappa_min = p.kappa_a.min(p.kappa_b);
    if p.eps_c == 0.0 {
        report.push(
            "weak drive",
            CheckStatus::Note,
            "zero drive: all correlations undefined (vacuum)",
        );
    } else if p.eps_c <= 0.1 * kappa_min {
        report.push(
            "weak drive",
            CheckStatus::Pass,
            format!("eps_c = {} <= 0.1 kappa", p.eps_c),
        );
    } else {
        report.push(
            "weak drive",
            CheckStatus::Warn,
            format!("weak drive violated: eps_c = {} > 0.1 kappa", p.eps_c),
        );
    }

    if p.coupling < 0.5 * p.omega_m {
        report.push(
            "hopping window",
            CheckStatus::Pass,
            format!("J = {} < omega_m/2 = {}", p.coupling, 0.5 * p.omega_m),
        );
    } else {
        report.push(
            "hopping window",
            CheckStatus::Warn,
            format!(
                "J < omega_m/2 violated: J = {} >= {}",
                p.coupling,
                0.5 * p.omega_m
            ),
        );
    }

    if p.g0 < 0.1 * p.omega_m && p.delta.abs() < 0.1 * p.omega_m {
        report.push(
            "small displacement",
            CheckStatus::Pass,
            "g0/omega_m << 1 and |delta| << omega_m",
        );
    } else {
        report.push(
            "small displacement",
            CheckStatus::Warn,
            format!(
                "g0/omega_m = {:.3}, |delta|/omega_m = {:.3}; displaced-mode approximations degrade",
                p.g0 / p.omega_m,
                p.delta.abs() / p.omega_m
            ),
        );
    }

    if let Ok(nbar) = p.thermal_phonons() {
        report.push(
            "temperature anchor",
            CheckStatus::Note,
            format!(
                "T = {} K converted with kappa_phys = {:.6e} rad/s: n_th = {:.6e}",
                p.temperature, p.kappa_phys, nbar
            ),
        );
    }
    report
}

/// Symmetrized thermal force spectrum of the mechanical bath,
/// `S(ω) = (γ_m/2ω_m)·ω·[1 + coth(ħω/2k_BT)]`, with ω in units of κ.
///
/// Precomputes the temperature scale so that the hot quadrature loop only
/// pays for one `expm1`.
#[derive(Debug, Clone, Copy)]
pub struct ThermalSpectrum {
    prefactor: f64,
    /// 2k_BT/(ħκ): the ω at which ħω/2k_BT = 1.
    scale: f64,
}

impl ThermalSpectrum {
    pub fn new(p: &SystemParams) -> Result<Self> {
        if !(p.temperature > 0.0) {
            return Err(Error::Domain(format!(
                "temperature must be positive, got {} K",
                p.temperature
            )));
        }
        Ok(Self {
            prefactor: p.gamma_m / (2.0 * p.omega_m),
            scale: 2.0 * p.temperature / (HBAR_OVER_KB * p.kappa_phys),
        })
    }

    pub fn eval(&self, omega: f64) -> f64 {
        let x = omega / self.scale;
        // ω(1 + coth x)
        let weighted = if x.abs() < COTH_SERIES_THRESHOLD {
            omega + self.scale + omega * x / 3.0
        } else {
            -2.0 * omega / (-2.0 * x).exp_m1()
        };
        self.prefactor * weighted
    }
}

/// One-shot evaluation of the thermal force spectrum at `omega`.
pub fn thermal_noise_factor(p: &SystemParams, omega: f64) -> Result<f64> {
    Ok(ThermalSpectrum::new(p)?.eval(omega))
}

/// Bare level of the displaced-oscillator Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLevel {
    pub n_a: u32,
    pub n_b: u32,
    pub n_m: u32,
    /// Energy in units of ħκ.
    pub energy: f64,
}

/// Energy of |n_a, n_b, ñ_m⟩ in the decoupled limit, with the shifted
/// cavity-B frequency tuned to `omega_a_ref`. Includes the photon-photon
/// Kerr shift −(g₀²/ω_m)·n_b(n_b − 1).
pub fn energy_level(
    p: &SystemParams,
    n_a: u32,
    n_b: u32,
    n_m: u32,
    omega_a_ref: f64,
) -> EnergyLevel {
    let (na, nb, nm) = (f64::from(n_a), f64::from(n_b), f64::from(n_m));
    let omega_b_shifted = omega_a_ref;
    let energy =
        omega_a_ref * na + omega_b_shifted * nb - p.kerr_shift() * nb * (nb - 1.0) + p.omega_m * nm;
    EnergyLevel {
        n_a,
        n_b,
        n_m,
        energy,
    }
}
