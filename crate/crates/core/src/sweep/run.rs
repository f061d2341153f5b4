use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::spec::{Method, Output, SweepSpec};
use crate::error::{Error, Result};
use crate::exec::{default_workers, map_indexed, parallel_enabled};
use crate::lindblad::{self, EqualTimeCorrelations, TruncationAudit};
use crate::model::{validate_params, SystemParams};
use crate::spectral::{g2_tau, solve_steady_state, SteadyStateFields};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointStatus {
    Ok,
    Unstable,
    Unconverged,
    Error,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::Unstable => "unstable",
            Self::Unconverged => "unconverged",
            Self::Error => "error",
        }
    }

    fn of(e: &Error) -> Self {
        match e {
            Error::Unstable { .. } => Self::Unstable,
            Error::NonConvergence { .. }
            | Error::Integration { .. }
            | Error::LinearSolve { .. } => Self::Unconverged,
            _ => Self::Error,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LangevinPoint {
    pub g2: f64,
    pub g1_part: f64,
    pub g2_part: f64,
    /// g²(τ) and its parts on the requested delay grid, if requested.
    pub tau: Option<TauSeries>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauSeries {
    pub g2: Vec<f64>,
    pub g1_part: Vec<f64>,
    pub g2_part: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterPoint {
    pub correlations: EqualTimeCorrelations,
    pub audit: TruncationAudit,
    pub residual: f64,
    pub symmetrization_delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub index: usize,
    pub axis_values: Vec<f64>,
    pub params: SystemParams,
    pub status: PointStatus,
    pub messages: Vec<String>,
    pub fields: Option<SteadyStateFields>,
    pub langevin: Option<LangevinPoint>,
    pub master: Option<MasterPoint>,
    pub wall_time_s: f64,
}

impl PointResult {
    /// |ME − L| / ME for g²_aa(0), when both are available.
    pub fn relative_deviation(&self) -> Option<f64> {
        let l = self.langevin.as_ref()?.g2;
        let m = self.master.as_ref()?.correlations.g2_aa;
        Some((m - l).abs() / m)
    }
}

fn evaluate(
    spec: &SweepSpec,
    index: usize,
    axis_values: Vec<f64>,
    p: SystemParams,
    tau: &[f64],
) -> PointResult {
    let start = Instant::now();
    let mut status = PointStatus::Ok;
    let mut messages = Vec::new();
    let mut flag = |s: PointStatus, msg: String, status: &mut PointStatus| {
        *status = (*status).max(s);
        messages.push(msg);
    };

    let report = validate_params(&p);
    let usable = report.is_usable();
    if !usable {
        flag(
            PointStatus::Error,
            format!("invalid parameters: {report}"),
            &mut status,
        );
    }

    let mut fields = None;
    let mut langevin = None;
    let mut master = None;
    if usable {
        match solve_steady_state(&p) {
            Ok(ss) => fields = Some(ss),
            Err(e) => flag(PointStatus::of(&e), format!("mean field: {e}"), &mut status),
        }
        if spec.method.uses_langevin() {
            match fields {
                Some(ss) if !ss.stable => flag(
                    PointStatus::Unstable,
                    format!(
                        "langevin: unstable (max Re λ = {:e})",
                        ss.max_real_eigenvalue
                    ),
                    &mut status,
                ),
                Some(_) => match g2_tau(&p, tau) {
                    Ok(set) => {
                        langevin = Some(LangevinPoint {
                            g2: set.g2[0],
                            g1_part: set.g1_part[0],
                            g2_part: set.g2_part[0],
                            tau: (tau.len() > 1).then(|| TauSeries {
                                g2: set.g2.clone(),
                                g1_part: set.g1_part.clone(),
                                g2_part: set.g2_part.clone(),
                            }),
                        })
                    }
                    Err(e) => flag(PointStatus::of(&e), format!("langevin: {e}"), &mut status),
                },
                None => {}
            }
        }
        if spec.method.uses_master() {
            match lindblad::solve_point(&p, &spec.fock) {
                Ok((s, c)) => {
                    let audit = lindblad::truncation_audit(&s);
                    if !audit.passed {
                        flag(
                            PointStatus::Unconverged,
                            format!(
                                "master: truncation audit failed, tails {:?}",
                                audit.tail_populations
                            ),
                            &mut status,
                        );
                    }
                    master = Some(MasterPoint {
                        correlations: c,
                        audit,
                        residual: s.residual,
                        symmetrization_delta: s.symmetrization_delta,
                    });
                }
                Err(e) => flag(PointStatus::of(&e), format!("master: {e}"), &mut status),
            }
        }
    }

    PointResult {
        index,
        axis_values,
        params: p,
        status,
        messages,
        fields,
        langevin,
        master,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

/// A finished sweep.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub spec: SweepSpec,
    pub tau_grid: Vec<f64>,
    pub points: Vec<PointResult>,
    pub workers: usize,
    pub wall_time_s: f64,
}

/// Evaluates every grid point; results are ordered by grid index regardless
/// of the worker count.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let grid = spec.points()?;
    let tau_grid = spec.tau.map_or_else(|| vec![0.0], |t| t.values());
    let workers = spec.workers.unwrap_or_else(default_workers).max(1);
    let start = Instant::now();
    let points = map_indexed(grid.len(), workers, |k| {
        let (coords, p) = grid[k].clone();
        evaluate(spec, k, coords, p, &tau_grid)
    });
    Ok(SweepOutcome {
        spec: spec.clone(),
        tau_grid,
        points,
        workers,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// CSV number formatting: shortest round-trip decimal, exponent form for
/// 0 < |x| < 1e-3.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == 0.0 {
        "0".into()
    } else if x.abs() < 1e-3 && x.abs() < 1e-3 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

impl SweepOutcome {
    pub fn all_ok(&self) -> bool {
        self.points.iter().all(|p| p.status == PointStatus::Ok)
    }

    pub fn flagged(&self) -> usize {
        self.points
            .iter()
            .filter(|p| p.status != PointStatus::Ok)
            .count()
    }

    pub fn columns(&self) -> Vec<String> {
        let both = self.spec.method == Method::Both;
        let mut cols: Vec<String> = self.spec.axes.iter().map(|a| a.name.clone()).collect();
        for out in &self.spec.outputs {
            match out {
                Output::G2Aa if both => cols
                    .extend(["g2_aa_langevin", "g2_aa_master", "g2_aa_rel_dev"].map(String::from)),
                Output::G2Tau => cols.extend(
                    self.tau_grid
                        .iter()
                        .map(|t| format!("g2_tau_{}", format_number(*t))),
                ),
                Output::Fields => cols.extend(
                    [
                        "alpha0_re",
                        "alpha0_im",
                        "beta0_re",
                        "beta0_im",
                        "q0",
                        "max_re_eigenvalue",
                    ]
                    .map(String::from),
                ),
                other => cols.push(other.name().to_string()),
            }
        }
        cols.push("status".into());
        cols
    }

    fn row(&self, p: &PointResult) -> Vec<String> {
        let both = self.spec.method == Method::Both;
        let nan = f64::NAN;
        let l = p.langevin.as_ref();
        let m = p.master.as_ref().map(|m| &m.correlations);
        let mut vals: Vec<f64> = p.axis_values.clone();
        for out in &self.spec.outputs {
            match out {
                Output::G2Aa if both => vals.extend([
                    l.map_or(nan, |l| l.g2),
                    m.map_or(nan, |m| m.g2_aa),
                    p.relative_deviation().unwrap_or(nan),
                ]),
                Output::G2Aa if self.spec.method == Method::Master => {
                    vals.push(m.map_or(nan, |m| m.g2_aa))
                }
                Output::G2Aa => vals.push(l.map_or(nan, |l| l.g2)),
                Output::G2Bb => vals.push(m.map_or(nan, |m| m.g2_bb)),
                Output::G2Ab => vals.push(m.map_or(nan, |m| m.g2_ab)),
                Output::G1 => vals.push(l.map_or(nan, |l| l.g1_part)),
                Output::G2 => vals.push(l.map_or(nan, |l| l.g2_part)),
                Output::G2Tau => match l.and_then(|l| l.tau.as_ref()) {
                    Some(t) => vals.extend(&t.g2),
                    None => vals.extend(std::iter::repeat_n(nan, self.tau_grid.len())),
                },
                Output::Fields => match p.fields {
                    Some(f) => vals.extend([
                        f.alpha0.re,
                        f.alpha0.im,
                        f.beta0.re,
                        f.beta0.im,
                        f.q0,
                        f.max_real_eigenvalue,
                    ]),
                    None => vals.extend([nan; 6]),
                },
            }
        }
        let mut row: Vec<String> = vals.into_iter().map(format_number).collect();
        row.push(p.status.as_str().to_string());
        row
    }

    /// RFC-4180 table: header, one row per grid point, CRLF line endings.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(out);
        w.write_record(self.columns())?;
        for p in &self.points {
            w.write_record(self.row(p))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Long-format delay table `tau,g2,G1,G2` of a single-point sweep.
    pub fn write_tau_csv<W: Write>(&self, out: W) -> Result<()> {
        let [point] = self.points.as_slice() else {
            return Err(Error::Config(
                "a delay table needs exactly one grid point".into(),
            ));
        };
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(out);
        w.write_record(["tau", "g2", "G1", "G2", "status"])?;
        let series = point.langevin.as_ref().and_then(|l| l.tau.as_ref());
        for (k, tau) in self.tau_grid.iter().enumerate() {
            let vals = match series {
                Some(t) => [t.g2[k], t.g1_part[k], t.g2_part[k]],
                None => [f64::NAN; 3],
            };
            let mut row = vec![format_number(*tau)];
            row.extend(vals.map(format_number));
            row.push(point.status.as_str().to_string());
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn manifest(&self) -> RunManifest {
        let count = |s| self.points.iter().filter(|p| p.status == s).count();
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            spec: self.spec.clone(),
            columns: self.columns(),
            tau_grid: self.spec.tau.map(|_| self.tau_grid.clone()),
            workers: self.workers,
            parallel: parallel_enabled(),
            wall_time_s: self.wall_time_s,
            counts: StatusCounts {
                ok: count(PointStatus::Ok),
                unstable: count(PointStatus::Unstable),
                unconverged: count(PointStatus::Unconverged),
                error: count(PointStatus::Error),
            },
            points: self
                .points
                .iter()
                .map(|p| PointRecord {
                    index: p.index,
                    axis_values: p.axis_values.clone(),
                    params: p.params,
                    status: p.status,
                    messages: p.messages.clone(),
                    wall_time_s: p.wall_time_s,
                    max_real_eigenvalue: p.fields.map(|f| f.max_real_eigenvalue),
                    master_residual: p.master.as_ref().map(|m| m.residual),
                    symmetrization_delta: p.master.as_ref().map(|m| m.symmetrization_delta),
                    truncation_audit: p.master.as_ref().map(|m| m.audit.clone()),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub ok: usize,
    pub unstable: usize,
    pub unconverged: usize,
    pub error: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub index: usize,
    pub axis_values: Vec<f64>,
    pub params: SystemParams,
    pub status: PointStatus,
    pub messages: Vec<String>,
    pub wall_time_s: f64,
    pub max_real_eigenvalue: Option<f64>,
    pub master_residual: Option<f64>,
    pub symmetrization_delta: Option<f64>,
    pub truncation_audit: Option<TruncationAudit>,
}

/// Machine-readable record of a run: one entry per grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub spec: SweepSpec,
    pub columns: Vec<String>,
    pub tau_grid: Option<Vec<f64>>,
    pub workers: usize,
    pub parallel: bool,
    pub wall_time_s: f64,
    pub counts: StatusCounts,
    pub points: Vec<PointRecord>,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::spec::{Axis, TauGrid};

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(0.25), "0.25");
        assert_eq!(format_number(-1.5), "-1.5");
        assert_eq!(format_number(5.6e-3), "0.0056");
        assert_eq!(format_number(4.1e-11), "4.1e-11");
        assert_eq!(format_number(-2e-4), "-2e-4");
        assert_eq!(format_number(f64::NAN), "nan");
    }

    #[test]
    fn coherent_single_point_gives_unit_g2() {
        let base = SystemParams {
            g0: 0.0,
            ..SystemParams::default()
        };
        let out = run_sweep(&SweepSpec::new(base, vec![], Method::Langevin)).unwrap();
        assert_eq!(out.points.len(), 1);
        assert!((out.points[0].langevin.as_ref().unwrap().g2 - 1.0).abs() < 1e-12);
        let csv = out.to_csv_string().unwrap();
        assert_eq!(csv, "g2_aa,G1,G2,status\r\n1,1,0,ok\r\n");
    }

    #[test]
    fn serial_and_parallel_tables_are_identical() {
        let spec = SweepSpec::new(
            SystemParams::default(),
            vec![
                Axis::linear("delta", -0.5, 0.0, 4),
                Axis::linear("g0", 0.1, 0.3, 3),
            ],
            Method::Langevin,
        )
        .with_outputs(&[Output::G2Aa, Output::G1, Output::G2, Output::Fields]);
        let serial = run_sweep(&spec.clone().with_workers(1)).unwrap();
        let pooled = run_sweep(&spec.with_workers(3)).unwrap();
        let a = serial.to_csv_string().unwrap();
        assert_eq!(a, pooled.to_csv_string().unwrap());
        assert_eq!(a.lines().count(), 13);
        assert!(a.starts_with("delta,g0,g2_aa,G1,G2,alpha0_re,"));
    }

    #[test]
    fn flagged_points_spell_nan_and_keep_their_row() {
        let base = SystemParams {
            eps_c: 0.0,
            ..SystemParams::default()
        };
        let spec = SweepSpec::new(
            base,
            vec![Axis::linear("g0", 0.0, 0.2, 2)],
            Method::Langevin,
        );
        let out = run_sweep(&spec).unwrap();
        assert_eq!(out.flagged(), 2);
        let csv = out.to_csv_string().unwrap();
        assert_eq!(csv.lines().nth(1).unwrap(), "0,nan,nan,nan,error");
        let manifest = out.manifest();
        assert_eq!(manifest.points.len(), 2);
        assert_eq!(manifest.counts.error, 2);
        assert!(manifest.points[0].messages[0].contains("zero drive"));
    }

    #[test]
    fn tau_columns_follow_the_grid() {
        let spec = SweepSpec::new(SystemParams::default(), vec![], Method::Langevin)
            .with_outputs(&[Output::G2Aa])
            .with_tau(TauGrid {
                stop: 0.5,
                count: 3,
            });
        let out = run_sweep(&spec).unwrap();
        assert_eq!(
            out.columns(),
            vec!["g2_aa", "g2_tau_0", "g2_tau_0.25", "g2_tau_0.5", "status"]
        );
        let l = out.points[0].langevin.as_ref().unwrap();
        assert_eq!(l.tau.as_ref().unwrap().g2[0], l.g2);
        let mut long = Vec::new();
        out.write_tau_csv(&mut long).unwrap();
        let long = String::from_utf8(long).unwrap();
        assert_eq!(long.lines().count(), 4);
        assert!(long.starts_with("tau,g2,G1,G2,status\r\n0,"));
        let json = out.manifest().to_json().unwrap();
        assert!(json.contains("\"tau_grid\""));
    }

    #[test]
    fn master_point_reports_audit() {
        let base = SystemParams {
            g0: 0.0,
            ..SystemParams::low_frequency_mirror()
        };
        let spec = SweepSpec::new(base, vec![], Method::Both)
            .with_fock(crate::lindblad::FockConfig::new(4, 4, 4).unwrap());
        let out = run_sweep(&spec).unwrap();
        let p = &out.points[0];
        assert_eq!(p.status, PointStatus::Ok, "{:?}", p.messages);
        assert!(p.relative_deviation().unwrap() < 1e-6);
        assert!(
            out.manifest().points[0]
                .truncation_audit
                .as_ref()
                .unwrap()
                .passed
        );
    }
}
