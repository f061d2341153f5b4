use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optoblockade"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("optoblockade-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const DELTA_AXIS: [&str; 8] = [
    "--set",
    "axis1.name=delta",
    "--set",
    "axis1.start=-0.4",
    "--set",
    "axis1.stop=-0.2",
    "--set",
    "axis1.count=3",
];

#[test]
fn coherent_point_exits_zero() {
    let o = run(&["scan", "--set", "g0=0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "g2_aa,G1,G2,status\r\n1,1,0,ok\r\n");
}

#[test]
fn scan_is_byte_identical_across_worker_counts() {
    let serial = run(&[&["scan", "--workers", "1"], &DELTA_AXIS[..]].concat());
    let pooled = run(&[&["scan", "--workers", "3"], &DELTA_AXIS[..]].concat());
    assert_eq!(serial.status.code(), Some(0));
    assert_eq!(serial.stdout, pooled.stdout);
    let text = stdout(&serial);
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("delta,g2_aa,G1,G2,status\r\n-0.4,"));
}

#[test]
fn config_file_and_outputs() {
    let config = scratch("scan.cfg");
    let csv = scratch("scan.csv");
    let manifest = scratch("scan.json");
    fs::write(
        &config,
        "# delta cut\npreset = default\naxis1.name = delta\naxis1.start = -0.5\naxis1.stop = 0\naxis1.count = 2\noutputs = g2_aa,fields\n",
    )
    .unwrap();
    let o = run(&[
        "scan",
        "--config",
        config.to_str().unwrap(),
        "--set",
        "g0=0.25",
        "--out",
        csv.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(o.stdout.is_empty());
    let table = fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("delta,g2_aa,alpha0_re,"), "{table}");
    assert_eq!(table.lines().count(), 3);
    let json = fs::read_to_string(&manifest).unwrap();
    assert!(json.contains("\"status\": \"ok\""));
    assert!(json.contains("\"g0\": 0.25"));
}

#[test]
fn zero_drive_is_flagged_with_exit_two() {
    let o = run(&["scan", "--set", "eps_c=0"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o), "g2_aa,G1,G2,status\r\nnan,nan,nan,error\r\n");
}

#[test]
fn config_errors_exit_one() {
    assert_eq!(
        run(&["scan", "--set", "no_such_key=1"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["scan", "--set", "g0"]).status.code(), Some(1));
    assert_eq!(
        run(&["scan", "--method", "sideways"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["scan", "--config", "/nonexistent/cfg"]).status.code(),
        Some(1)
    );
    let bad_axis = run(&[
        "scan",
        "--set",
        "axis1.name=bogus",
        "--set",
        "axis1.start=0",
        "--set",
        "axis1.stop=1",
        "--set",
        "axis1.count=2",
    ]);
    assert_eq!(bad_axis.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad_axis.stderr).contains("bogus"));
    assert_eq!(run(&["g2tau", "--method", "master"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn g2tau_writes_a_long_table() {
    let o = run(&["g2tau", "--set", "tau.stop=1", "--set", "tau.count=3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0], "tau,g2,G1,G2,status");
    assert!(rows[1].starts_with("0,0.0056"));
    assert!(rows[3].starts_with("1,"));
}

#[test]
fn g2tau_default_grid() {
    let o = run(&["g2tau"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1252);
}

#[test]
fn optimum_reports_closed_forms() {
    let o = run(&["optimum"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(
        text.contains("optimal detuning      = -0.2885326141456515"),
        "{text}"
    );
    assert!(text.contains("optimal g0            = 0.2068"), "{text}");
}

#[test]
fn optimum_domain_error_is_a_report_line() {
    let o = run(&["optimum", "--set", "coupling=0.7071067811865476"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("optimal g0            = unavailable (domain error"));
}

#[test]
fn optimum_scan_over_configured_axes() {
    let manifest = scratch("optimum.json");
    let o = run(&[
        "optimum",
        "--scan",
        "--set",
        "axis1.name=delta",
        "--set",
        "axis1.start=-0.4",
        "--set",
        "axis1.stop=-0.2",
        "--set",
        "axis1.count=5",
        "--set",
        "axis2.name=g0",
        "--set",
        "axis2.start=0.1",
        "--set",
        "axis2.stop=0.3",
        "--set",
        "axis2.count=5",
        "--manifest",
        manifest.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(
        text.contains("scanned argmin        = (delta -0.3"),
        "{text}"
    );
    assert!(text.contains(", g0 0.2) with g2 = 0.0073"), "{text}");
    assert!(fs::read_to_string(&manifest).unwrap().contains("\"scan\""));
}

#[test]
fn xval_agrees_without_mirror_coupling() {
    let o = run(&[
        "xval",
        "--set",
        "preset=low_frequency_mirror",
        "--set",
        "g0=0",
        "--set",
        "fock.n_a=5",
        "--set",
        "fock.n_b=5",
        "--set",
        "fock.n_m=4",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 of 1 points flagged"));
}

#[test]
fn validate_exit_codes() {
    let ok = run(&["validate"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("[pass] resolved sideband"));
    assert_eq!(
        run(&["validate", "--set", "omega_m=5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["validate", "--set", "kappa_a=-1"]).status.code(),
        Some(1)
    );
}
