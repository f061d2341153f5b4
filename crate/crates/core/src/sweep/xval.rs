use std::fmt;

use serde::{Deserialize, Serialize};

use super::run::{format_number, run_sweep, PointStatus, SweepOutcome};
use super::spec::{Method, SweepSpec};
use crate::error::{Error, Result};

/// Points whose relative deviation exceeds this are flagged.
pub const DEVIATION_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XvalPoint {
    pub index: usize,
    pub axis_values: Vec<f64>,
    pub langevin: Option<f64>,
    pub master: Option<f64>,
    /// |g²_ME − g²_L| / g²_ME.
    pub deviation: Option<f64>,
    pub status: PointStatus,
    pub flagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub median: f64,
    pub p90: f64,
    pub max: f64,
}

impl Quantiles {
    /// Nearest-rank quantiles; `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| v[((p * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1];
        Some(Self {
            min: v[0],
            median: q(0.5),
            p90: q(0.9),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XvalReport {
    pub threshold: f64,
    pub points: Vec<XvalPoint>,
    pub quantiles: Option<Quantiles>,
    pub flagged: usize,
}

impl XvalReport {
    pub fn from_outcome(outcome: &SweepOutcome) -> Self {
        let points: Vec<XvalPoint> = outcome
            .points
            .iter()
            .map(|p| {
                let deviation = p.relative_deviation();
                XvalPoint {
                    index: p.index,
                    axis_values: p.axis_values.clone(),
                    langevin: p.langevin.as_ref().map(|l| l.g2),
                    master: p.master.as_ref().map(|m| m.correlations.g2_aa),
                    deviation,
                    status: p.status,
                    flagged: p.status != PointStatus::Ok
                        || deviation.is_none_or(|d| !(d <= DEVIATION_THRESHOLD)),
                }
            })
            .collect();
        let devs: Vec<f64> = points
            .iter()
            .filter_map(|p| p.deviation)
            .filter(|d| d.is_finite())
            .collect();
        XvalReport {
            threshold: DEVIATION_THRESHOLD,
            quantiles: Quantiles::of(&devs),
            flagged: points.iter().filter(|p| p.flagged).count(),
            points,
        }
    }

    pub fn max_deviation(&self) -> Option<f64> {
        self.quantiles.map(|q| q.max)
    }
}

impl fmt::Display for XvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.points {
            let coords: Vec<String> = p.axis_values.iter().map(|v| format_number(*v)).collect();
            let show = |x: Option<f64>| x.map_or_else(|| "nan".to_string(), format_number);
            writeln!(
                f,
                "[{}] langevin={} master={} deviation={} status={}{}",
                coords.join(", "),
                show(p.langevin),
                show(p.master),
                show(p.deviation),
                p.status.as_str(),
                if p.flagged { "  FLAGGED" } else { "" }
            )?;
        }
        match self.quantiles {
            Some(q) => writeln!(
                f,
                "deviation quantiles: min={} median={} p90={} max={}",
                format_number(q.min),
                format_number(q.median),
                format_number(q.p90),
                format_number(q.max)
            )?,
            None => writeln!(f, "deviation quantiles: no comparable points")?,
        }
        write!(
            f,
            "{} of {} points flagged (threshold {})",
            self.flagged,
            self.points.len(),
            self.threshold
        )
    }
}

/// Runs both methods over the grid and compares g²_aa(0).
pub fn cross_validate(spec: &SweepSpec) -> Result<(XvalReport, SweepOutcome)> {
    if spec.method != Method::Both {
        return Err(Error::Config("cross-validation needs method=both".into()));
    }
    let outcome = run_sweep(spec)?;
    Ok((XvalReport::from_outcome(&outcome), outcome))
}
