//! Equal-time photon correlations and truncation diagnostics of a steady
//! density matrix.

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use super::operators::{FockConfig, ModeOperators};
use super::steady::{SteadyDensityMatrix, TAIL_THRESHOLD};
use crate::error::{Error, Result};

/// Mean photon numbers below this are treated as vacuum.
pub const VACUUM_THRESHOLD: f64 = 1e-30;

/// Equal-time second-order correlations from the master equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqualTimeCorrelations {
    pub g2_aa: f64,
    pub g2_bb: f64,
    pub g2_ab: f64,
    /// Tr[ρ a†a] and Tr[ρ b†b].
    pub n_a: f64,
    pub n_b: f64,
    /// Tr[ρ a].
    #[serde(with = "crate::spectral::steady::complex_pair")]
    pub mean_a: c64,
}

impl EqualTimeCorrelations {
    /// Tr[ρ a†a] − |Tr[ρ a]|².
    pub fn n_a_fluct(&self) -> f64 {
        self.n_a - self.mean_a.norm_sqr()
    }
}

/// g²_aa(0) = ⟨a†²a²⟩/⟨a†a⟩², g²_bb(0) likewise, g²_ab(0) = ⟨a†b†ba⟩/(⟨a†a⟩⟨b†b⟩).
pub fn correlations_equal_time(s: &SteadyDensityMatrix) -> Result<EqualTimeCorrelations> {
    let fock = &s.fock;
    // Number-type moments are diagonal in the Fock basis.
    let (mut n_a, mut n_b, mut aa, mut bb, mut ab) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for idx in 0..fock.dim() {
        let w = s.population(idx);
        let [ka, kb, _] = fock.occupations(idx);
        let (ka, kb) = (ka as f64, kb as f64);
        n_a += w * ka;
        n_b += w * kb;
        aa += w * ka * (ka - 1.0);
        bb += w * kb * (kb - 1.0);
        ab += w * ka * kb;
    }
    if !(n_a > VACUUM_THRESHOLD && n_b > VACUUM_THRESHOLD) {
        return Err(Error::UndefinedCorrelation(format!(
            "vacuum denominators: <a†a> = {n_a:e}, <b†b> = {n_b:e}"
        )));
    }
    let ops = ModeOperators::new(fock);
    Ok(EqualTimeCorrelations {
        g2_aa: aa / (n_a * n_a),
        g2_bb: bb / (n_b * n_b),
        g2_ab: ab / (n_a * n_b),
        n_a,
        n_b,
        mean_a: ops.a.expect(&s.rho),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationAudit {
    pub fock: FockConfig,
    /// Marginal population of the highest retained level of a, b, mirror.
    pub tail_populations: [f64; 3],
    pub threshold: f64,
    pub passed: bool,
    /// Present when some tail exceeds the threshold.
    pub suggested: Option<FockConfig>,
    /// ‖ρ ↦ (γ_m n̄/2)[c†c − cc†, ρ]‖_F: the amount by which the grouped
    /// thermal form would act differently on this state.
    pub grouped_form_deviation: f64,
}

fn extra_levels(marginal: &[f64], threshold: f64) -> usize {
    let n = marginal.len();
    let top = marginal[n - 1];
    if top <= threshold {
        return 0;
    }
    let ratio = if marginal[n - 2] > 0.0 {
        top / marginal[n - 2]
    } else {
        1.0
    };
    if !(ratio < 1.0) || ratio <= 0.0 {
        return n;
    }
    // top·ratioᵏ < threshold / 10
    ((0.1 * threshold / top).ln() / ratio.ln()).ceil().max(1.0) as usize
}

pub fn truncation_audit(s: &SteadyDensityMatrix) -> TruncationAudit {
    let marginals = [s.marginal(0), s.marginal(1), s.marginal(2)];
    let tail_populations = [0, 1, 2].map(|k| marginals[k].last().copied().unwrap_or(0.0).max(0.0));
    let passed = tail_populations.iter().all(|t| *t < TAIL_THRESHOLD);
    let suggested = (!passed).then(|| {
        let extra = [0, 1, 2].map(|k| extra_levels(&marginals[k], TAIL_THRESHOLD));
        FockConfig {
            n_a: s.fock.n_a + extra[0],
            n_b: s.fock.n_b + extra[1],
            n_m: s.fock.n_m + extra[2],
        }
    });

    // c†c − cc† = −1 + N·P_top, so only [P_top, ρ] survives.
    let fock = &s.fock;
    let top = fock.n_m - 1;
    let mut sum = 0.0;
    for i in 0..fock.dim() {
        for j in 0..fock.dim() {
            let ti = fock.occupations(i)[2] == top;
            let tj = fock.occupations(j)[2] == top;
            if ti != tj {
                sum += s.rho[(i, j)].norm_sqr();
            }
        }
    }
    let grouped_form_deviation = 0.5 * s.thermal_rate * fock.n_m as f64 * sum.sqrt();

    TruncationAudit {
        fock: *fock,
        tail_populations,
        threshold: TAIL_THRESHOLD,
        passed,
        suggested,
        grouped_form_deviation,
    }
}
