use std::fmt;

use serde::{Deserialize, Serialize};

use super::run::{format_number, run_sweep, PointStatus};
use super::spec::{Axis, Method, Output, SweepSpec};
use crate::error::Result;
use crate::model::SystemParams;
use crate::optimum::{
    asymptotic_coupling, asymptotic_detuning, optimal_coupling, optimal_detuning,
};

/// A closed-form value or the reason it is unavailable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formula {
    Value(f64),
    Unavailable(String),
}

impl Formula {
    fn from(r: Result<f64>) -> Self {
        match r {
            Ok(v) => Self::Value(v),
            Err(e) => Self::Unavailable(e.to_string()),
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Value(v) => Some(*v),
            Self::Unavailable(_) => None,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Value(v) => write!(f, "{}", format_number(*v)),
            Self::Unavailable(why) => write!(f, "unavailable ({why})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub delta: f64,
    pub g0: f64,
    pub g2: f64,
    pub delta_step: f64,
    pub g0_step: f64,
    pub points: usize,
    pub flagged: usize,
    /// Scanned minus closed-form location.
    pub delta_deviation: Option<f64>,
    pub g0_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumReport {
    pub coupling: f64,
    pub kappa: f64,
    pub omega_m: f64,
    pub optimal_detuning: Formula,
    pub optimal_g0: Formula,
    pub asymptotic_detuning: f64,
    pub asymptotic_g0: f64,
    /// Relative difference between the exact and asymptotic g₀.
    pub g0_asymptotic_deviation: Option<f64>,
    pub scan: Option<ScanResult>,
}

impl OptimumReport {
    /// True when both closed forms evaluate and any scan has no flagged points.
    pub fn is_clean(&self) -> bool {
        self.optimal_detuning.value().is_some()
            && self.optimal_g0.value().is_some()
            && self.scan.as_ref().is_none_or(|s| s.flagged == 0)
    }
}

impl fmt::Display for OptimumReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = format_number;
        writeln!(
            f,
            "J = {}, kappa = {}, omega_m = {}",
            n(self.coupling),
            n(self.kappa),
            n(self.omega_m)
        )?;
        writeln!(f, "optimal detuning      = {}", self.optimal_detuning)?;
        writeln!(f, "optimal g0            = {}", self.optimal_g0)?;
        writeln!(f, "asymptotic detuning   = {}", n(self.asymptotic_detuning))?;
        write!(f, "asymptotic g0         = {}", n(self.asymptotic_g0))?;
        if let Some(d) = self.g0_asymptotic_deviation {
            write!(f, " (relative difference {})", n(d))?;
        }
        if let Some(s) = &self.scan {
            writeln!(f)?;
            writeln!(
                f,
                "scanned argmin        = (delta {}, g0 {}) with g2 = {} over {} points ({} flagged)",
                n(s.delta),
                n(s.g0),
                n(s.g2),
                s.points,
                s.flagged
            )?;
            let dev = |d: Option<f64>| d.map_or_else(|| "n/a".into(), n);
            write!(
                f,
                "scan - closed form    = (delta {}, g0 {}); grid steps ({}, {})",
                dev(s.delta_deviation),
                dev(s.g0_deviation),
                n(s.delta_step),
                n(s.g0_step)
            )?;
        }
        Ok(())
    }
}

pub fn to_json(report: &OptimumReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

/// Closed-form optimum, its asymptotics, and optionally the argmin of a
/// Langevin scan over `delta` × `g0` around `base`.
pub fn optimum_report(
    base: &SystemParams,
    scan: Option<(Axis, Axis)>,
    workers: Option<usize>,
) -> Result<OptimumReport> {
    let (j, kappa, omega_m) = (base.coupling, base.kappa_a, base.omega_m);
    let optimal_detuning = Formula::from(optimal_detuning(j, kappa));
    let optimal_g0 = Formula::from(optimal_coupling(j, kappa, omega_m));
    let asymptotic_g0 = asymptotic_coupling(j, kappa, omega_m);
    let g0_asymptotic_deviation = optimal_g0.value().map(|g| (asymptotic_g0 - g).abs() / g);

    let scan = match scan {
        None => None,
        Some((d_axis, g_axis)) => {
            let mut spec = SweepSpec::new(
                *base,
                vec![d_axis.clone(), g_axis.clone()],
                Method::Langevin,
            )
            .with_outputs(&[Output::G2Aa]);
            spec.workers = workers;
            let outcome = run_sweep(&spec)?;
            let best = outcome
                .points
                .iter()
                .filter(|p| p.status == PointStatus::Ok)
                .filter_map(|p| p.langevin.as_ref().map(|l| (p, l.g2)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            best.map(|(p, g2)| ScanResult {
                delta: p.params.delta,
                g0: p.params.g0,
                g2,
                delta_step: d_axis.step(),
                g0_step: g_axis.step(),
                points: outcome.points.len(),
                flagged: outcome.flagged(),
                delta_deviation: optimal_detuning.value().map(|d| p.params.delta - d),
                g0_deviation: optimal_g0.value().map(|g| p.params.g0 - g),
            })
        }
    };

    Ok(OptimumReport {
        coupling: j,
        kappa,
        omega_m,
        optimal_detuning,
        optimal_g0,
        asymptotic_detuning: asymptotic_detuning(kappa),
        asymptotic_g0,
        g0_asymptotic_deviation,
        scan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_at_the_working_point() {
        let r = optimum_report(&SystemParams::default(), None, None).unwrap();
        let d = r.optimal_detuning.value().unwrap();
        assert!((d - -0.288_532_614_145_651_5).abs() < 1e-12);
        assert!((r.optimal_g0.value().unwrap() - 0.206_801_098_7).abs() < 1e-9);
        assert!(r.g0_asymptotic_deviation.unwrap() < 0.01);
        assert!(r.is_clean());
    }

    #[test]
    fn domain_error_becomes_a_report_line() {
        let base = SystemParams {
            coupling: std::f64::consts::FRAC_1_SQRT_2,
            ..SystemParams::default()
        };
        let r = optimum_report(&base, None, None).unwrap();
        assert!(r.optimal_g0.value().is_none());
        assert!(!r.is_clean());
        let text = r.to_string();
        assert!(
            text.contains("optimal g0            = unavailable"),
            "{text}"
        );
    }

    #[test]
    fn coarse_scan_lands_near_the_closed_form() {
        let r = optimum_report(
            &SystemParams::default(),
            Some((
                Axis::linear("delta", -0.4, -0.2, 5),
                Axis::linear("g0", 0.1, 0.3, 5),
            )),
            Some(1),
        )
        .unwrap();
        let s = r.scan.unwrap();
        assert_eq!(s.points, 25);
        assert!(s.delta_deviation.unwrap().abs() <= s.delta_step);
        assert!(s.g0_deviation.unwrap().abs() <= s.g0_step);
    }
}
