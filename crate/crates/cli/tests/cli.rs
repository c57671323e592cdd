use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sympeig::format::{parse_params, parse_report, write_params};
use sympeig::DEFAULT_SYMPLECTIC_TOL;

const MIXING: &str = "0.7071067811865476,0.7071067811865476;-0.7071067811865476,0.7071067811865476";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sympeig"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn num(rec: &sympeig::format::Record, key: &str) -> Vec<f64> {
    rec.require(key)
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn sigma_coordinate_state_is_plane_wave() {
    let out = stdout(&run(&["eigenstate", "--matrix", "0,1;-1,0", "--omega", "1.5"]));
    let rec = parse_report(&out).unwrap();
    assert_eq!(rec.require("rank").unwrap(), "1");
    assert_eq!(num(&rec, "quad_form"), vec![0.0]);
    assert_eq!(num(&rec, "linear_vec"), vec![1.5]);
    let n = num(&rec, "norm_const");
    assert!((n[0] - (2.0 * std::f64::consts::PI).powf(-0.5)).abs() < 1e-15);
    assert_eq!(n[1], 0.0);
}

#[test]
fn identity_gives_point_support() {
    let out = stdout(&run(&[
        "eigenstate",
        "--matrix",
        "1,0,0,0;0,1,0,0;0,0,1,0;0,0,0,1",
        "--omega",
        "1,2",
    ]));
    let rec = parse_report(&out).unwrap();
    assert_eq!(rec.require("rank").unwrap(), "0");
    assert_eq!(num(&rec, "support_offset"), vec![1.0, 2.0]);
}

#[test]
fn mixing_matrix_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    stdout(&run(&[
        "verify",
        "--matrix",
        MIXING,
        "--omega",
        "0.4",
        "--grid-n",
        "256",
        "--out-dir",
        d,
    ]));
    let rec = parse_report(&read(dir.path(), "verify.txt")).unwrap();
    assert_eq!(rec.require("status").unwrap(), "pass");
    for key in [
        "coordinate.residual_row",
        "coordinate.residual_constraint",
        "momentum.residual_row",
        "momentum.residual_constraint",
        "ccr_residual",
    ] {
        assert!(num(&rec, key)[0] < 1e-8, "{key}");
    }
}

#[test]
fn momentum_self_overlap_collapses_to_one() {
    let out = stdout(&run(&[
        "overlap", "--matrix", MIXING, "--flavor", "momentum", "--omega", "0", "--rho", "0",
    ]));
    let rec = parse_report(&out).unwrap();
    assert_eq!(rec.require("kind").unwrap(), "delta_product");
    assert_eq!(rec.require("forces_eta_zero").unwrap(), "true");
    let k = num(&rec, "collapse");
    assert!((k[0] - 1.0).abs() < 1e-12 && k[1].abs() < 1e-12);
}

#[test]
fn cross_overlap_reports_fresnel_value() {
    let out = stdout(&run(&[
        "overlap",
        "--matrix",
        MIXING,
        "--flavor",
        "coordinate",
        "--rho-flavor",
        "momentum",
        "--omega",
        "0.5",
        "--rho",
        "-0.5",
    ]));
    let rec = parse_report(&out).unwrap();
    assert_eq!(rec.require("kind").unwrap(), "fresnel");
    // (−i/(2π))^{1/2} e^{i/2}
    let abs = num(&rec, "abs")[0];
    assert!((abs - (2.0 * std::f64::consts::PI).powf(-0.5)).abs() < 1e-12);
}

#[test]
fn generated_matrix_passes_verify() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("m.txt");
    let f = file.to_str().unwrap();
    stdout(&run(&[
        "generate",
        "--q",
        "2",
        "--seed",
        "7",
        "--factors",
        "5",
        "--out",
        f,
    ]));
    let out = stdout(&run(&["verify", "--matrix", f, "--omega", "0.2,-0.3"]));
    assert_eq!(parse_report(&out).unwrap().require("status").unwrap(), "pass");

    stdout(&run(&[
        "generate", "--q", "3", "--seed", "2", "--f-rank", "1", "--out", f,
    ]));
    let out = stdout(&run(&["verify", "--matrix", f, "--omega", "0.2,-0.3,1"]));
    let rec = parse_report(&out).unwrap();
    assert_eq!(rec.require("coordinate.rank").unwrap(), "1");
    assert_eq!(rec.require("status").unwrap(), "pass");
}

#[test]
fn perturbed_matrix_is_rejected() {
    let out = run(&["verify", "--matrix", "0,1.001;-1,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn dimension_mismatch_exit_code() {
    assert_eq!(
        run(&["eigenstate", "--matrix", "0,1;-1,0", "--omega", "1,2"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        run(&["eigenstate", "--matrix", "0,1;-1,0", "--q", "2", "--omega", "1"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn grid_tolerance_breach_exits_with_nonconvergence() {
    let out = run(&[
        "verify",
        "--matrix",
        MIXING,
        "--omega",
        "0.4",
        "--grid-n",
        "16",
        "--grid-tol",
        "1e-12",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["eigenstate", "--omega", "1"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn outputs_are_deterministic() {
    let args = [
        "eigenstate",
        "--matrix",
        MIXING,
        "--flavor",
        "momentum",
        "--omega",
        "0.3",
        "--grid-n",
        "64",
        "--workers",
        "3",
    ];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let mut v = args.to_vec();
        v.extend(["--out-dir", d.path().to_str().unwrap()]);
        stdout(&run(&v));
    }
    for name in ["params.txt", "grid.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap()
        );
    }
    let one = stdout(&run(&["generate", "--q", "3", "--seed", "11"]));
    assert_eq!(one, stdout(&run(&["generate", "--q", "3", "--seed", "11"])));
}

#[test]
fn params_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("m.txt");
    stdout(&run(&[
        "generate",
        "--q",
        "2",
        "--seed",
        "3",
        "--f-rank",
        "1",
        "--out",
        file.to_str().unwrap(),
    ]));
    for flavor in ["coordinate", "momentum"] {
        let out = stdout(&run(&[
            "eigenstate",
            "--matrix",
            file.to_str().unwrap(),
            "--flavor",
            flavor,
            "--omega",
            "0.1234567890123456789,-2.5e-3",
        ]));
        let parsed = parse_params(&out, DEFAULT_SYMPLECTIC_TOL).unwrap();
        assert_eq!(write_params(&parsed.state, parsed.residuals.as_ref()), out);
    }
}

#[test]
fn grid_csv_has_expected_columns() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&run(&[
        "eigenstate",
        "--matrix",
        MIXING,
        "--omega",
        "0",
        "--grid-n",
        "32",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]));
    let csv = read(dir.path(), "grid.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "x_1,re_psi,im_psi");
    assert_eq!(lines.count(), 32);
}
