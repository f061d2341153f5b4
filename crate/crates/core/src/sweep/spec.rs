use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::FockConfig;
use crate::model::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "lin" => Ok(Self::Linear),
            "log" => Ok(Self::Log),
            other => Err(Error::Config(format!(
                "unknown axis scale `{other}` (linear|log)"
            ))),
        }
    }
}

/// One swept parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl Axis {
    pub fn linear(name: &str, start: f64, stop: f64, count: usize) -> Self {
        Self {
            name: name.to_string(),
            start,
            stop,
            count,
            scale: Scale::Linear,
        }
    }

    pub fn log(name: &str, start: f64, stop: f64, count: usize) -> Self {
        Self {
            scale: Scale::Log,
            ..Self::linear(name, start, stop, count)
        }
    }

    pub fn validate(&self) -> Result<()> {
        SystemParams::default().get(&self.name)?;
        if self.count < 2 {
            return Err(Error::Config(format!(
                "axis `{}` needs count >= 2",
                self.name
            )));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::Config(format!(
                "axis `{}` has a non-finite bound",
                self.name
            )));
        }
        if self.scale == Scale::Log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(Error::Config(format!(
                "log axis `{}` needs positive bounds",
                self.name
            )));
        }
        Ok(())
    }

    /// Grid values; both endpoints are hit exactly.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k == 0 {
                    return self.start;
                }
                if k == self.count - 1 {
                    return self.stop;
                }
                let t = k as f64 / last;
                match self.scale {
                    Scale::Linear => self.start + (self.stop - self.start) * t,
                    Scale::Log => self.start * (self.stop / self.start).powf(t),
                }
            })
            .collect()
    }

    /// Spacing of a linear axis.
    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.count - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Langevin,
    Master,
    Both,
}

impl Method {
    pub fn uses_langevin(self) -> bool {
        matches!(self, Self::Langevin | Self::Both)
    }

    pub fn uses_master(self) -> bool {
        matches!(self, Self::Master | Self::Both)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "langevin" => Ok(Self::Langevin),
            "master" => Ok(Self::Master),
            "both" => Ok(Self::Both),
            other => Err(Error::Config(format!(
                "unknown method `{other}` (langevin|master|both)"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Langevin => "langevin",
            Self::Master => "master",
            Self::Both => "both",
        })
    }
}

/// Quantities a sweep can report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Output {
    #[serde(rename = "g2_aa")]
    G2Aa,
    #[serde(rename = "g2_bb")]
    G2Bb,
    #[serde(rename = "g2_ab")]
    G2Ab,
    #[serde(rename = "g2_tau")]
    G2Tau,
    G1,
    G2,
    #[serde(rename = "fields")]
    Fields,
}

impl Output {
    pub const ALL: [Output; 7] = [
        Self::G2Aa,
        Self::G2Bb,
        Self::G2Ab,
        Self::G2Tau,
        Self::G1,
        Self::G2,
        Self::Fields,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::G2Aa => "g2_aa",
            Self::G2Bb => "g2_bb",
            Self::G2Ab => "g2_ab",
            Self::G2Tau => "g2_tau",
            Self::G1 => "G1",
            Self::G2 => "G2",
            Self::Fields => "fields",
        }
    }

    pub fn defaults(method: Method) -> Vec<Output> {
        match method {
            Method::Langevin => vec![Self::G2Aa, Self::G1, Self::G2],
            Method::Master => vec![Self::G2Aa, Self::G2Bb, Self::G2Ab],
            Method::Both => vec![Self::G2Aa],
        }
    }
}

impl FromStr for Output {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown output `{s}`")))
    }
}

/// Uniform delay grid 0, stop/(count−1), …, stop in units of 1/κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauGrid {
    pub stop: f64,
    pub count: usize,
}

impl TauGrid {
    pub fn values(&self) -> Vec<f64> {
        Axis::linear("tau", 0.0, self.stop, self.count).values()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: SystemParams,
    /// Zero axes evaluate the base point alone.
    pub axes: Vec<Axis>,
    pub method: Method,
    pub outputs: Vec<Output>,
    pub tau: Option<TauGrid>,
    pub fock: FockConfig,
    /// `None` uses the available parallelism.
    pub workers: Option<usize>,
}

impl SweepSpec {
    pub fn new(base: SystemParams, axes: Vec<Axis>, method: Method) -> Self {
        Self {
            base,
            axes,
            method,
            outputs: Output::defaults(method),
            tau: None,
            fock: FockConfig::default(),
            workers: None,
        }
    }

    pub fn with_outputs(mut self, outputs: &[Output]) -> Self {
        self.outputs = outputs.to_vec();
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn with_fock(mut self, fock: FockConfig) -> Self {
        self.fock = fock;
        self
    }

    pub fn with_tau(mut self, tau: TauGrid) -> Self {
        self.tau = Some(tau);
        if !self.outputs.contains(&Output::G2Tau) {
            self.outputs.push(Output::G2Tau);
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.len() > 2 {
            return Err(Error::Config(format!(
                "at most two axes, got {}",
                self.axes.len()
            )));
        }
        for axis in &self.axes {
            axis.validate()?;
        }
        if self.axes.len() == 2 && canonical(&self.axes[0].name) == canonical(&self.axes[1].name) {
            return Err(Error::Config("both axes sweep the same parameter".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::Config("no outputs requested".into()));
        }
        for out in &self.outputs {
            match out {
                Output::G2Bb | Output::G2Ab if !self.method.uses_master() => {
                    return Err(Error::Config(format!(
                        "`{}` is only available from the master equation",
                        out.name()
                    )))
                }
                Output::G1 | Output::G2 if !self.method.uses_langevin() => {
                    return Err(Error::Config(format!(
                        "`{}` is only available from the Langevin method",
                        out.name()
                    )))
                }
                _ => {}
            }
        }
        let wants_tau = self.outputs.contains(&Output::G2Tau);
        match (wants_tau, self.tau) {
            (true, None) => {
                return Err(Error::Config("g2_tau requested without a tau grid".into()))
            }
            (false, Some(_)) => {
                return Err(Error::Config(
                    "tau grid given but g2_tau not requested".into(),
                ))
            }
            _ => {}
        }
        if let Some(tau) = self.tau {
            if self.method != Method::Langevin {
                return Err(Error::Config(
                    "a tau grid is only valid with method=langevin".into(),
                ));
            }
            if tau.count < 2 || !(tau.stop > 0.0) || !tau.stop.is_finite() {
                return Err(Error::Config(
                    "tau grid needs count >= 2 and stop > 0".into(),
                ));
            }
        }
        if self.method.uses_master() {
            self.fock
                .validate()
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    /// Axis values and resolved parameters of every grid point in row-major
    /// order (last axis fastest).
    pub fn points(&self) -> Result<Vec<(Vec<f64>, SystemParams)>> {
        let grids: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        let mut out = Vec::with_capacity(self.point_count());
        for flat in 0..self.point_count() {
            let mut rem = flat;
            let mut coords = vec![0.0; grids.len()];
            for (k, g) in grids.iter().enumerate().rev() {
                coords[k] = g[rem % g.len()];
                rem /= g.len();
            }
            let mut p = self.base;
            for (axis, v) in self.axes.iter().zip(&coords) {
                p.set(&axis.name, *v)?;
            }
            out.push((coords, p));
        }
        Ok(out)
    }
}

fn canonical(name: &str) -> &str {
    match name {
        "j" | "coupling" => "J",
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_values_hit_endpoints() {
        let a = Axis::linear("delta", -1.0, 0.5, 151);
        let v = a.values();
        assert_eq!(v.len(), 151);
        assert_eq!(v[0], -1.0);
        assert_eq!(v[150], 0.5);
        assert!((v[71] - -0.29).abs() < 1e-12);
        let l = Axis::log("J", 20.0, 2000.0, 3).values();
        assert!((l[1] - 200.0).abs() < 1e-10);
    }

    #[test]
    fn grid_is_row_major() {
        let spec = SweepSpec::new(
            SystemParams::default(),
            vec![
                Axis::linear("delta", 0.0, 1.0, 2),
                Axis::linear("g0", 0.1, 0.3, 3),
            ],
            Method::Langevin,
        );
        let pts = spec.points().unwrap();
        let coords: Vec<Vec<f64>> = pts.iter().map(|p| p.0.clone()).collect();
        assert_eq!(coords[0], vec![0.0, 0.1]);
        assert_eq!(coords[2], vec![0.0, 0.3]);
        assert_eq!(coords[3], vec![1.0, 0.1]);
        assert_eq!(pts[4].1.g0, 0.2);
        assert_eq!(pts[4].1.delta, 1.0);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let base = SystemParams::default();
        let bad_axis = SweepSpec::new(
            base,
            vec![Axis::linear("kappa", 0.0, 1.0, 3)],
            Method::Langevin,
        );
        assert!(matches!(bad_axis.validate(), Err(Error::Config(_))));
        let short = SweepSpec::new(
            base,
            vec![Axis::linear("g0", 0.0, 1.0, 1)],
            Method::Langevin,
        );
        assert!(short.validate().is_err());
        let tau_master = SweepSpec::new(base, vec![], Method::Master).with_tau(TauGrid {
            stop: 5.0,
            count: 10,
        });
        assert!(tau_master.validate().is_err());
        let bb_langevin =
            SweepSpec::new(base, vec![], Method::Langevin).with_outputs(&[Output::G2Bb]);
        assert!(bb_langevin.validate().is_err());
        let ok = SweepSpec::new(base, vec![], Method::Langevin).with_tau(TauGrid {
            stop: 5.0,
            count: 10,
        });
        assert!(ok.validate().is_ok());
        let same = SweepSpec::new(
            base,
            vec![
                Axis::linear("J", 1.0, 2.0, 2),
                Axis::linear("coupling", 1.0, 2.0, 2),
            ],
            Method::Langevin,
        );
        assert!(same.validate().is_err());
    }

    #[test]
    fn names_round_trip() {
        for o in Output::ALL {
            assert_eq!(o.name().parse::<Output>().unwrap(), o);
        }
        for m in ["langevin", "master", "both"] {
            assert_eq!(m.parse::<Method>().unwrap().to_string(), m);
        }
    }
}
