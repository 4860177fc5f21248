use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;
use sha2::{Digest, Sha256};

fn mtss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtss"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = mtss(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

const SAMPLE: [&str; 13] = [
    "sample",
    "--comp",
    "0.6:1.0:0.5",
    "--comp",
    "0.8:2.0:0.5",
    "--horizon",
    "1",
    "--steps",
    "1000",
    "--paths",
    "3",
    "--seed",
    "42",
];

#[test]
fn sample_writes_nondecreasing_paths_and_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let mut args = SAMPLE.to_vec();
    args.extend(["--out", out]);
    stdout(&args);
    let m = manifest(dir.path());
    let outputs = m["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 3);
    assert_eq!(m["command"], "sample");
    assert_eq!(m["seed"], 42);
    for entry in outputs {
        let body = fs::read_to_string(dir.path().join(entry["file"].as_str().unwrap())).unwrap();
        assert!(body.starts_with("t,value\n"));
        let r = rows(&body);
        assert_eq!(r.len(), 1001);
        assert!(r.windows(2).all(|w| w[1][1] >= w[0][1]));
        assert_eq!(entry["bytes"].as_u64().unwrap() as usize, body.len());
        assert_eq!(
            entry["sha256"],
            hex::encode(Sha256::digest(body.as_bytes()))
        );
    }
}

#[test]
fn sample_is_byte_identical_across_runs_and_thread_counts() {
    let base = stdout(&SAMPLE);
    assert_eq!(base, stdout(&SAMPLE));
    for threads in ["1", "3"] {
        let mut args = SAMPLE.to_vec();
        args.extend(["--threads", threads]);
        assert_eq!(base, stdout(&args));
    }
    let mut other = SAMPLE.to_vec();
    other[12] = "43";
    assert_ne!(base, stdout(&other));
}

#[test]
fn inverse_sample_is_monotone_in_the_target() {
    let out = stdout(&[
        "sample",
        "--inverse",
        "--targets",
        "0.5,1,2",
        "--paths",
        "20",
        "--seed",
        "7",
    ]);
    let mut paths = 0;
    for block in out.split("# ").filter(|b| !b.is_empty()) {
        let body = block.split_once('\n').unwrap().1;
        let r = rows(body);
        assert_eq!(r.iter().map(|x| x[0]).collect::<Vec<_>>(), [0.5, 1.0, 2.0]);
        assert!(r[0][1] <= r[1][1] && r[1][1] <= r[2][1]);
        paths += 1;
    }
    assert_eq!(paths, 20);
}

#[test]
fn pdf_grid_mass_matches_the_closed_form() {
    let csv = stdout(&[
        "pdf", "--comp", "0.5:0:1", "--t", "1", "--xmin", "0.05", "--xmax", "10", "--n", "256",
    ]);
    assert!(csv.starts_with("x,value\n"));
    let r = rows(&csv);
    assert_eq!(r.len(), 256);
    let levy = |x: f64| (-0.25 / x).exp() / (2.0 * std::f64::consts::PI.sqrt() * x.powf(1.5));
    let trap = |f: &dyn Fn(&[f64]) -> f64| {
        r.windows(2)
            .map(|w| 0.5 * (w[1][0] - w[0][0]) * (f(&w[0]) + f(&w[1])))
            .sum::<f64>()
    };
    let mass = trap(&|row| row[1]);
    let exact = trap(&|row| levy(row[0]));
    assert!((mass - exact).abs() < 1e-8, "{mass} vs {exact}");
    // [0.05, 10] leaves out the heavy x^(-3/2) tail: erfc(1/(2 sqrt 10)) - erfc(sqrt 5)
    assert!((mass - 0.8215).abs() < 2e-3, "{mass}");

    let json = stdout(&[
        "pdf", "--comp", "0.5:0:1", "--xmin", "0.05", "--xmax", "10", "--n", "256", "--format",
        "json",
    ]);
    let v: Value = serde_json::from_str(&json).unwrap();
    assert!((v["mass"].as_f64().unwrap() - mass).abs() < 1e-12);
    assert_eq!(v["method"], "contour");
}

#[test]
fn pdf_methods_agree() {
    let args = |m: &'static str| {
        stdout(&[
            "pdf", "--comp", "0.5:0:1", "--xmin", "0.2", "--xmax", "5", "--n", "20", "--method", m,
        ])
    };
    let contour = rows(&args("contour"));
    let talbot = rows(&args("talbot"));
    for (a, b) in contour.iter().zip(&talbot) {
        assert!(((a[1] - b[1]) / a[1]).abs() < 1e-8);
    }
}

#[test]
fn moments_table_by_hand() {
    let csv = stdout(&[
        "moments", "--comp", "0.5:1:1", "--t", "2", "--orders", "1,2",
    ]);
    assert!(csv.starts_with("order,raw_moment,cumulant\n"));
    let r = rows(&csv);
    assert_eq!(r[0], [1.0, 1.0, 1.0]);
    assert!((r[1][1] - 1.5).abs() < 1e-14 && (r[1][2] - 0.5).abs() < 1e-15);
}

#[test]
fn levy_and_renewal_outputs() {
    let csv = stdout(&[
        "levy", "--comp", "0.5:0:1", "--xmin", "1", "--xmax", "4", "--n", "4",
    ]);
    for row in rows(&csv) {
        let exact = 0.5 / (std::f64::consts::PI.sqrt() * row[0].powf(1.5));
        assert!(((row[1] - exact) / exact).abs() < 1e-12);
    }
    let csv = stdout(&["renewal", "--t", "0.001,1000"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,value,asymptote,literature,regime");
    assert!(lines[1].ends_with("SmallArgument"));
    assert!(lines[2].ends_with("LargeArgumentTempered"));
}

#[test]
fn poisson_pmfs() {
    let csv = stdout(&["poisson", "--mu", "1.5", "--k", "10"]);
    assert!(csv.starts_with("k,p\n"));
    let r = rows(&csv);
    assert_eq!(r.len(), 11);
    assert!(r.iter().all(|x| x[1] >= 0.0));
    let quad = rows(&stdout(&["poisson", "--inverse", "--mu", "2", "--k", "8"]));
    let tr = rows(&stdout(&[
        "poisson",
        "--inverse",
        "--mu",
        "2",
        "--k",
        "8",
        "--method",
        "transform",
    ]));
    for (a, b) in quad.iter().zip(&tr) {
        assert!((a[1] - b[1]).abs() < 1e-8);
    }
}

#[test]
fn verify_fpk_mtss_passes() {
    let out = mtss(&["verify", "--suite", "fpk-mtss", "--refinements", "3"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], true);
    let slopes = v["refinement_slopes"].as_array().unwrap();
    assert_eq!(slopes.len(), 3);
    assert!(slopes.iter().all(|s| s.as_f64().unwrap() >= 0.8));
}

#[test]
fn verify_poisson_passes() {
    let out = mtss(&["verify", "--suite", "poisson", "--mu", "0.4"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["check_name"], "poisson");
}

#[test]
fn invalid_input_exits_with_2_and_one_line() {
    let cases: [&[&str]; 8] = [
        &["moments", "--comp", "0.5:1"],
        &["moments", "--comp", "1.5:1:1"],
        &["moments", "--comp", "0.5:1:0.7"],
        &["moments", "--comp", "0.5:-1:1"],
        &["pdf", "--n", "1"],
        &["pdf", "--xmin", "2", "--xmax", "1"],
        &["sample", "--inverse"],
        &["frobnicate"],
    ];
    for args in cases {
        let out = mtss(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
        assert!(out.stdout.is_empty());
    }
    let err = String::from_utf8(mtss(&["moments", "--comp", "1.5:1:1"]).stderr).unwrap();
    assert!(
        err.contains("alpha") && err.contains("0 < alpha < 1"),
        "{err}"
    );
    let err = String::from_utf8(mtss(&["moments", "--comp", "0.5:1:0.7"]).stderr).unwrap();
    assert!(err.contains("weights"), "{err}");
}

#[test]
fn help_and_version_exit_cleanly() {
    assert!(mtss(&["--help"]).status.success());
    assert!(mtss(&["--version"]).status.success());
    assert!(mtss(&["verify", "--help"]).status.success());
}

#[test]
fn replaying_a_manifest_reproduces_every_output() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    stdout(&[
        "sample",
        "--paths",
        "4",
        "--steps",
        "50",
        "--seed",
        "5",
        "--out",
        first.path().to_str().unwrap(),
    ]);
    let m = manifest(first.path());
    let argv: Vec<String> = m["argv"]
        .as_array()
        .unwrap()
        .iter()
        .skip(1)
        .map(|a| a.as_str().unwrap().to_string())
        .collect();
    let pos = argv.iter().position(|a| a == "--out").unwrap();
    let mut replay: Vec<&str> = argv.iter().map(String::as_str).collect();
    replay[pos + 1] = second.path().to_str().unwrap();
    stdout(&replay);
    let again = manifest(second.path());
    assert_eq!(m["outputs"], again["outputs"]);
    for entry in m["outputs"].as_array().unwrap() {
        let body = fs::read(second.path().join(entry["file"].as_str().unwrap())).unwrap();
        assert_eq!(entry["sha256"], hex::encode(Sha256::digest(&body)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn component_parsing_never_crashes(comp in "[-0-9.:a-z]{0,12}") {
        let out = mtss(&["moments", "--orders", "1", "--comp", &comp]);
        let code = out.status.code();
        prop_assert!(code == Some(0) || code == Some(2), "{comp:?} -> {code:?}");
    }
}
