//! Grid sweeps over one or two parameters, method cross-validation and the
//! optimum report.

pub mod config;
pub mod optimum;
pub mod run;
pub mod spec;
pub mod xval;

pub use config::{load_spec, parse_assignment, parse_pairs, spec_from_pairs};
pub use optimum::{optimum_report, Formula, OptimumReport, ScanResult};
pub use run::{
    format_number, run_sweep, PointResult, PointStatus, RunManifest, SweepOutcome, TauSeries,
};
pub use spec::{Axis, Method, Output, Scale, SweepSpec, TauGrid};
pub use xval::{cross_validate, Quantiles, XvalReport, DEVIATION_THRESHOLD};
