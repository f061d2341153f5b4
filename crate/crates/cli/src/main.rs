//! `optoblockade`: parameter sweeps, delay scans, method cross-validation
//! and closed-form optimum reports.
//!
//! Exit status: 0 when every point is ok, 2 when some points are flagged,
//! 1 on configuration or system errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use optoblockade::model::validate_params;
use optoblockade::sweep::{
    cross_validate, optimum, optimum_report, parse_assignment, parse_pairs, run_sweep,
    spec_from_pairs, Axis, Method, SweepOutcome, SweepSpec,
};

#[derive(Parser)]
#[command(
    name = "optoblockade",
    version,
    about = "Photon antibunching in a cavity coupled to an optomechanical cavity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate g2(0) and friends over a one- or two-axis grid.
    Scan(Common),
    /// g2(tau) at a single point (long-format table: tau,g2,G1,G2).
    G2tau(Common),
    /// Compare the Langevin and master-equation g2_aa(0) over a grid.
    Xval(Common),
    /// Closed-form optimum, its asymptotics and optionally a scanned argmin.
    Optimum {
        #[command(flatten)]
        common: Common,
        /// Scan delta x g0 (the configured axes, or a 0.01-step default grid).
        #[arg(long)]
        scan: bool,
    },
    /// Check parameters against the model's validity conditions.
    Validate(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key (repeatable), e.g. `--set params.g0=0.3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Write the CSV table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the JSON run manifest here.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// langevin, master or both.
    #[arg(long)]
    method: Option<String>,
}

/// Default delay grid: two photon lifetimes 2π/κ at 0.01/κ resolution.
const DEFAULT_TAU_STOP: &str = "12.5";
const DEFAULT_TAU_COUNT: &str = "1251";

impl Common {
    fn pairs(&self) -> Result<Vec<(String, String)>> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                parse_pairs(&text)?
            }
            None => Vec::new(),
        };
        for s in &self.set {
            pairs.push(parse_assignment(s)?);
        }
        if let Some(w) = self.workers {
            pairs.push(("workers".into(), w.to_string()));
        }
        if let Some(m) = &self.method {
            pairs.push(("method".into(), m.clone()));
        }
        Ok(pairs)
    }

    fn spec(&self) -> Result<SweepSpec> {
        Ok(spec_from_pairs(&self.pairs()?)?)
    }

    fn require_method(&self, wanted: &str) -> Result<()> {
        match &self.method {
            Some(m) if m != wanted => {
                bail!("this subcommand runs with method={wanted}, got --method {m}")
            }
            _ => Ok(()),
        }
    }
}

fn write_output(
    path: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = io::BufWriter::new(
                fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
            );
            write(&mut f)?;
            f.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
        }
    }
    Ok(())
}

fn finish(common: &Common, outcome: &SweepOutcome) -> Result<ExitCode> {
    if let Some(path) = &common.manifest {
        fs::write(path, outcome.manifest().to_json()?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let flagged = outcome.flagged();
    if flagged > 0 {
        eprintln!("{flagged} of {} points flagged", outcome.points.len());
        for p in outcome.points.iter().filter(|p| !p.messages.is_empty()) {
            eprintln!("  point {}: {}", p.index, p.messages.join("; "));
        }
        Ok(ExitCode::from(2))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn scan(common: &Common) -> Result<ExitCode> {
    let outcome = run_sweep(&common.spec()?)?;
    write_output(common.out.as_deref(), |w| Ok(outcome.write_csv(w)?))?;
    finish(common, &outcome)
}

fn g2tau(common: &Common) -> Result<ExitCode> {
    common.require_method("langevin")?;
    let mut pairs = common.pairs()?;
    pairs.push(("method".into(), "langevin".into()));
    if !pairs.iter().any(|(k, _)| k == "tau.stop") {
        pairs.push(("tau.stop".into(), DEFAULT_TAU_STOP.into()));
    }
    if !pairs.iter().any(|(k, _)| k == "tau.count") {
        pairs.push(("tau.count".into(), DEFAULT_TAU_COUNT.into()));
    }
    let spec = spec_from_pairs(&pairs)?;
    let outcome = run_sweep(&spec)?;
    if spec.axes.is_empty() {
        write_output(common.out.as_deref(), |w| Ok(outcome.write_tau_csv(w)?))?;
    } else {
        write_output(common.out.as_deref(), |w| Ok(outcome.write_csv(w)?))?;
    }
    finish(common, &outcome)
}

fn xval(common: &Common) -> Result<ExitCode> {
    common.require_method("both")?;
    let mut pairs = common.pairs()?;
    pairs.push(("method".into(), "both".into()));
    let spec = spec_from_pairs(&pairs)?;
    let (report, outcome) = cross_validate(&spec)?;
    if common.out.is_some() {
        write_output(common.out.as_deref(), |w| Ok(outcome.write_csv(w)?))?;
    }
    println!("{report}");
    let code = finish(common, &outcome)?;
    Ok(if report.flagged > 0 {
        ExitCode::from(2)
    } else {
        code
    })
}

fn optimum_cmd(common: &Common, with_scan: bool) -> Result<ExitCode> {
    let spec = common.spec()?;
    let axes = if !with_scan {
        None
    } else if spec.axes.is_empty() {
        Some((
            Axis::linear("delta", -1.0, 0.5, 151),
            Axis::linear("g0", 0.0, 0.6, 61),
        ))
    } else {
        let names: Vec<&str> = spec.axes.iter().map(|a| a.name.as_str()).collect();
        if names != ["delta", "g0"] {
            bail!("an optimum scan needs axis1 = delta and axis2 = g0, got {names:?}");
        }
        Some((spec.axes[0].clone(), spec.axes[1].clone()))
    };
    if spec.method != Method::Langevin {
        bail!("the optimum scan uses method=langevin");
    }
    let report = optimum_report(&spec.base, axes, spec.workers)?;
    println!("{report}");
    if let Some(path) = &common.manifest {
        fs::write(path, optimum::to_json(&report)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if report.is_clean() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn validate(common: &Common) -> Result<ExitCode> {
    let spec = common.spec()?;
    let report = validate_params(&spec.base);
    print!("{report}");
    Ok(if !report.is_usable() {
        ExitCode::from(1)
    } else if !report.all_pass() {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Scan(c) => scan(&c),
        Command::G2tau(c) => g2tau(&c),
        Command::Xval(c) => xval(&c),
        Command::Optimum { common, scan } => optimum_cmd(&common, scan),
        Command::Validate(c) => validate(&c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
