//! Acceptance criterion 12 (reproducibility and raster runtime) plus
//! CLI behavior tests: exit codes, output formats, catalog contract.

use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

fn mosaic() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mosaic"))
}

fn run(args: &[&str]) -> Output {
    mosaic().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, n: u64) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    let text = format!(
        r#"
seed = 12345
submodel = "simple"

[space]
kind = "euclid-rect"
r = [1.0, 1.0]

[sets]
kind = "halfspace"
c_m = 1.4142135623730951

[count]
kind = "deterministic"
n = {n}

[value]
kind = "gaussian"
mean = 0.0
var = 1.0
"#
    );
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn criterion_12_reproducible_rasters_within_budget() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 64);
    let out_a = dir.path().join("a.pgm");
    let out_b = dir.path().join("b.pgm");

    let start = Instant::now();
    let status = mosaic()
        .args(["simulate", "--config"])
        .arg(&config)
        .args(["--grid", "512x512", "--out"])
        .arg(&out_a)
        .status()
        .unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    assert!(status.success());
    assert!(
        elapsed < 5.0,
        "512x512 raster with 64 sets took {elapsed:.2} s"
    );

    let status = mosaic()
        .args(["simulate", "--config"])
        .arg(&config)
        .args(["--grid", "512x512", "--out"])
        .arg(&out_b)
        .status()
        .unwrap();
    assert!(status.success());

    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "same config and seed must give byte-identical output");

    // A different seed changes the bytes.
    let out_c = dir.path().join("c.pgm");
    let status = mosaic()
        .args(["simulate", "--config"])
        .arg(&config)
        .args(["--grid", "512x512", "--seed", "999", "--out"])
        .arg(&out_c)
        .status()
        .unwrap();
    assert!(status.success());
    assert_ne!(a, std::fs::read(&out_c).unwrap());

    println!("criterion 12 PASS: byte-identical 512x512 rasters, first run {elapsed:.2} s (< 5 s)");
}

#[test]
fn pgm_header_and_shape() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 0);
    let out = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--grid",
        "4x4",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("P2"));
    assert_eq!(lines.next(), Some("4 4"));
    assert_eq!(lines.next(), Some("65535"));
    // A zero-set model is constant: every pixel maps to 0.
    for line in lines {
        assert!(line.split_whitespace().all(|v| v == "0"), "line was {line}");
    }
}

#[test]
fn csv_raster_has_header_and_hash() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 3);
    let out = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--grid",
        "5x3",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# 3,5"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn catalog_lists_twenty_one_rows_and_aliases_work() {
    let out = run(&["catalog", "list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // Header plus 21 rows.
    assert_eq!(text.lines().count(), 22);

    let out = run(&["catalog", "show", "t2r5", "--alpha", "0.5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("row:         s5"));
    // rho(pi) = 0 for the heavy-tail dead-leaves row at alpha = 1/2.
    let last = text.lines().last().unwrap();
    let rho: f64 = last.split_whitespace().last().unwrap().parse().unwrap();
    assert!(rho.abs() < 1e-12, "rho(pi) = {rho}");
}

#[test]
fn out_of_range_parameters_exit_one() {
    let out = run(&["catalog", "show", "s5", "--alpha", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("(0, 1]"), "stderr was: {err}");

    let out = run(&["catalog", "show", "nope"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_config_and_usage_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "submodel = \"simple\"\n").unwrap();
    let out = run(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["simulate"]); // missing required --config
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["correlate"]); // neither --config nor --row
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn correlate_emits_csv_and_exit_zero_on_calibrated_model() {
    let out = run(&[
        "correlate",
        "--row",
        "e4",
        "--replicates",
        "4000",
        "--pairs",
        "0.3,0.9,1.5",
        "--seed",
        "7",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d,rho_hat,se,rho_analytic,z"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn correlate_runs_are_reproducible() {
    let args = [
        "correlate",
        "--row",
        "s3",
        "--replicates",
        "2000",
        "--pairs",
        "0.5,1.5",
        "--seed",
        "11",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn oracle_closed_forms_match_enumeration() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("token.toml");
    std::fs::write(
        &config,
        r#"
submodel = "token"

[space]
kind = "euclid-ball"
d = 2
c_m = 1.0

[sets]
kind = "halfspace"
c_m = 1.0

[count]
kind = "poisson"
lambda = 5.0

[value]
kind = "gaussian"
mean = 1.0
var = 2.0
"#,
    )
    .unwrap();
    let out = run(&["oracle", "--config", config.to_str().unwrap(), "--n", "6"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("d,p_xy,closed_mean,oracle_mean,closed_mixed,oracle_mixed")
    );
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cols[2] - cols[3]).abs() < 1e-12, "means differ: {line}");
        assert!(
            (cols[4] - cols[5]).abs() < 1e-12,
            "mixed moments differ: {line}"
        );
    }
}

#[test]
fn sum_reports_unit_variance() {
    let out = run(&[
        "sum", "--row", "s1", "--alpha", "1.0", "--m", "150", "--runs", "400", "--points", "1.0",
        "--seed", "3",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d,mean,variance"));
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        // 400 runs: sd of the sample variance is about sqrt(2/400) = 0.07.
        assert!((cols[2] - 1.0).abs() < 0.3, "variance column: {line}");
        assert!(cols[1].abs() < 0.2, "mean column: {line}");
    }
}
