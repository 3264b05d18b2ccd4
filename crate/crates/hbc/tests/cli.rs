use std::path::PathBuf;
use std::process::{Command, Output};

use hbc::cube_json::CubeFile;
use hbc::output::{ResultJson, WFormJson, DEGENERATE_NOTE};
use hbc::report::{Report, Status};
use hbc_core::bott_chern::line_sequence;
use hbc_core::cube::{random_exact_cube, MetricMode};

fn hbc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hbc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .display()
        .to_string()
}

fn scratch(name: &str, contents: &str) -> String {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, contents).unwrap();
    p.display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn verify_dsquare_writes_a_report() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("dsquare.json");
    let o = hbc(&[
        "verify",
        "--suite",
        "dsquare",
        "--seed",
        "7",
        "--report",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: Report = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!((r.suite.as_str(), r.seed, r.passed), ("dsquare", 7, true));
    assert!(r
        .cases
        .iter()
        .all(|c| c.status == Status::Pass && !c.provenance.is_empty()));
}

#[test]
fn reports_are_deterministic_up_to_timing() {
    let run = |name: &str| {
        let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
        let o = hbc(&[
            "verify",
            "--suite",
            "emi",
            "--seed",
            "3",
            "--report",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        let mut r: Report = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        for c in &mut r.cases {
            c.runtime = 0.0;
        }
        r
    };
    assert_eq!(run("emi_a.json"), run("emi_b.json"));
}

#[test]
fn verify_unknown_suite_is_a_usage_error() {
    let o = hbc(&["verify", "--suite", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown suite"));
}

#[test]
fn tight_tolerance_fails_with_exit_one() {
    let o = hbc(&["verify", "--suite", "closed-form", "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn verify_eq2() {
    let o = hbc(&["verify", "--suite", "eq2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("3/3 passed"));
}

#[test]
fn compute_rank_one_line() {
    let o = hbc(&["compute", "--cube", &data("line_e2.json"), "--target", "W"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: ResultJson = serde_json::from_str(&stdout(&o)).unwrap();
    let v = r.value.unwrap();
    assert!((v[0] + 1.0).abs() < 1e-6 && v[1].abs() < 1e-6, "{v:?}");
    assert_eq!(r.sigma, Some(-1));
    assert!(r.truncation < 1e-8);
}

#[test]
fn compute_with_quadrature_flags() {
    let o = hbc(&[
        "compute",
        "--cube",
        &data("line_e2.json"),
        "--target",
        "W",
        "--nodes-radial",
        "120",
        "--nodes-angular",
        "8",
        "--cutoff",
        "18",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: ResultJson = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(
        (
            r.scheme.nodes_radial,
            r.scheme.nodes_angular,
            r.scheme.cutoff
        ),
        (120, 8, 18.0)
    );
    assert!((r.value.unwrap()[0] + 1.0).abs() < 1e-6);
    let bad = hbc(&[
        "compute",
        "--cube",
        &data("line_e2.json"),
        "--target",
        "W",
        "--nodes-angular",
        "3",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn compute_tw_target() {
    let o = hbc(&["compute", "--cube", &data("line_e2.json"), "--target", "TW"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: ResultJson = serde_json::from_str(&stdout(&o)).unwrap();
    let tw = r.tw.unwrap();
    assert!(r.value.is_none());
    assert!(tw.r[0].abs() < 1e-9 && tw.f[0].abs() < 1e-9);
    // the dε coefficient carries the value
    assert!((tw.w.deps[0][0] - 1.0).abs() < 1e-6, "{tw:?}");
}

#[test]
fn compute_degenerate_cube() {
    let o = hbc(&[
        "compute",
        "--cube",
        &data("degenerate.json"),
        "--target",
        "W",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: ResultJson = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r.value, Some([0.0, 0.0]));
    assert!(r.degenerate && r.notes.iter().any(|n| n == DEGENERATE_NOTE));
}

#[test]
fn compute_emi_completed_square() {
    let o = hbc(&[
        "compute",
        "--cube",
        &data("square_emi.json"),
        "--target",
        "W",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: ResultJson = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r.n, 2);
    assert!(r.parity_zero);
}

#[test]
fn compute_rejects_large_cubes() {
    let f = random_exact_cube(4, 1, 2, MetricMode::Emi);
    let path = scratch(
        "four.json",
        &serde_json::to_string(&CubeFile::from_cube(&f)).unwrap(),
    );
    let o = hbc(&["compute", "--cube", &path, "--target", "W"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("unsupported size"), "{}", stderr(&o));
}

#[test]
fn compute_reports_parse_positions() {
    let path = scratch("broken.json", "{\n  \"n\": 1,\n  \"vertices\": {,}\n}");
    let o = hbc(&["compute", "--cube", &path, "--target", "W"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 3, column 16"), "{}", stderr(&o));
    let path = scratch("mistyped.json", "{\n  \"n\": 1,\n  \"vertices\": []\n}");
    let o = hbc(&["compute", "--cube", &path, "--target", "W"]);
    assert!(stderr(&o).contains("line 3, column 14"), "{}", stderr(&o));
}

#[test]
fn compute_names_the_failing_edge() {
    let mut file = CubeFile::from_cube(&line_sequence(2.0, 1.0));
    file.arrows.insert("-1->0".into(), vec![vec![[0.0, 0.0]]]);
    let path = scratch("inexact.json", &serde_json::to_string(&file).unwrap());
    let o = hbc(&["compute", "--cube", &path, "--target", "W"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("edge along axis 1"), "{}", stderr(&o));
}

#[test]
fn compute_missing_file_is_a_usage_error() {
    let o = hbc(&[
        "compute",
        "--cube",
        "/nonexistent/cube.json",
        "--target",
        "W",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn wform_text_and_json() {
    let o = hbc(&["wform", "--n", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("-1/2 * L1"));
    let o = hbc(&["wform", "--n", "2", "--format", "json"]);
    let w: WFormJson = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(w.i_prime.terms, 4);
    assert_eq!(w.sigma, Some(-1));
}

#[test]
fn wform_out_of_range() {
    assert_eq!(hbc(&["wform", "--n", "0"]).status.code(), Some(2));
    assert_eq!(hbc(&["wform", "--n", "6"]).status.code(), Some(2));
    assert_eq!(hbc(&["wform"]).status.code(), Some(2));
}
