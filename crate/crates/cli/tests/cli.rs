use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TRIANGLE_TWICE: &str = r#"{"vertices": [[-1, 0], [1, 0], [0, 2], [-1, 0], [1, 0], [0, 2]]}"#;
const SQUARE: &str = r#"{"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}"#;
const BOWTIE: &str = r#"{"vertices": [[0, 0], [2, 2], [2, 0], [0, 2]]}"#;
const ROTATIONS: &str = r#"{
  "family": [
    {"kind": "rotation", "center": [0.3, 0.2], "angle": 0.15707963267948966},
    {"kind": "rotation", "center": [0.3, 0.2], "angle": 0.20943951023931956}
  ],
  "seed": [1.0, 0.0]
}"#;
const NON_COMMUTING: &str = r#"{
  "family": [
    {"kind": "rotation", "center": [0.0, 0.0], "angle": 0.1},
    {"kind": "rotation", "center": [1.0, 0.0], "angle": 0.1}
  ],
  "seed": [0.5, 0.0]
}"#;
const TRANSLATIONS: &str = r#"{"family": [{"kind": "translation", "offset": [0.1, 0.0]}], "seed": [0, 0]}"#;

fn fixloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fixloc")).args(args).output().expect("binary runs")
}

fn file(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn point(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

/// Tags open and close in balance and every path element is closed.
fn assert_well_formed_svg(svg: &str) {
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<g").count(), svg.matches("</g>").count());
    assert_eq!(svg.matches("<svg").count(), 1);
    for line in svg.lines().filter(|l| l.trim_start().starts_with("<path")) {
        assert!(line.trim_end().ends_with("/>"), "{line}");
    }
}

#[test]
fn decompose_triangle_twice() {
    let dir = TempDir::new().unwrap();
    let curve = file(&dir, "t.json", TRIANGLE_TWICE);
    let svg = dir.path().join("t.svg");
    let report = json(&fixloc(&["decompose", s(&curve), "--svg", s(&svg)]));
    let loops = report["loops"].as_array().unwrap();
    assert_eq!(loops.len(), 2);
    assert!(report["kappa"].as_u64().unwrap() < 2);
    let svg = fs::read_to_string(svg).unwrap();
    assert_well_formed_svg(&svg);
    // Input curve plus one stroke per loop.
    assert_eq!(svg.matches("fill-opacity").count(), 1 + loops.len());
}

#[test]
fn decompose_square_and_bowtie() {
    let dir = TempDir::new().unwrap();
    let square = file(&dir, "s.json", SQUARE);
    assert_eq!(json(&fixloc(&["decompose", s(&square)]))["loops"].as_array().unwrap().len(), 1);
    let bowtie = file(&dir, "b.json", BOWTIE);
    let out = fixloc(&["decompose", s(&bowtie)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("angle hypothesis"));
}

#[test]
fn missing_file_is_io_error() {
    assert_eq!(fixloc(&["decompose", "/nonexistent/curve.json"]).status.code(), Some(1));
}

#[test]
fn winding_queries() {
    let dir = TempDir::new().unwrap();
    let curve = file(&dir, "t.json", TRIANGLE_TWICE);
    let run = |q: &str| fixloc(&["winding", s(&curve), "--point", q]);
    assert_eq!(String::from_utf8(run("0,0.5").stdout).unwrap().trim(), "2");
    assert_eq!(String::from_utf8(run("5,5").stdout).unwrap().trim(), "0");
    assert_eq!(run("0,0").status.code(), Some(3));
    assert_eq!(run("-0.5,0.5").status.code(), Some(0));
}

#[test]
fn theorem_rotations() {
    let dir = TempDir::new().unwrap();
    let family = file(&dir, "f.json", ROTATIONS);
    let svg = dir.path().join("f.svg");
    let cert = json(&fixloc(&["theorem", s(&family), "--svg", s(&svg)]));
    let (x, y) = point(&cert["fixed_point"]);
    assert!((x - 0.3).abs() < 1e-9 && (y - 0.2).abs() < 1e-9);
    assert_eq!(cert["hull_membership"], "inside");
    assert_well_formed_svg(&fs::read_to_string(svg).unwrap());
}

#[test]
fn theorem_failures_have_exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = file(&dir, "n.json", NON_COMMUTING);
    assert_eq!(fixloc(&["theorem", s(&bad)]).status.code(), Some(4));
    let unbounded = file(&dir, "t.json", TRANSLATIONS);
    let out = fixloc(&["theorem", s(&unbounded)]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("working domain"));
}

#[test]
fn counterexample_reports() {
    let dir = TempDir::new().unwrap();
    let svg = dir.path().join("c.svg");
    let q8 = format!("{},{}", 0.5 * 0.3f64.cos(), 0.5 * 0.3f64.sin());
    let r8 = json(&fixloc(&["counterexample", "--n", "8", "--p", "0.5,0", "--q", &q8, "--svg", s(&svg)]));
    assert_eq!(r8["passed"], true);
    assert_well_formed_svg(&fs::read_to_string(svg).unwrap());

    let q100 = format!("{},{}", 0.1 * 0.1f64.cos(), 0.1 * 0.1f64.sin());
    let r100 = json(&fixloc(&["counterexample", "--n", "100", "--p", "0.1,0", "--q", &q100]));
    assert_eq!(r100["passed"], true);
    assert!(r100["sup_displacement_d2"].as_f64().unwrap() < r8["sup_displacement_d2"].as_f64().unwrap());

    let on_orbit = format!("{},{}", 0.5 * (std::f64::consts::TAU / 8.0).cos(), 0.5 * (std::f64::consts::TAU / 8.0).sin());
    assert_eq!(
        fixloc(&["counterexample", "--n", "8", "--p", "0.5,0", "--q", &on_orbit]).status.code(),
        Some(2)
    );
}

#[test]
fn orbit_curve_inline_map() {
    let map = r#"{"kind": "rotation", "angle": 2.5132741228718345}"#;
    let oc = json(&fixloc(&["orbit-curve", "--map", map, "--point", "1,0", "--length", "5"]));
    assert_eq!(oc["length"], 5);
    assert_eq!(oc["curve"]["vertices"].as_array().unwrap().len(), 5);
    let fixed = fixloc(&["orbit-curve", "--map", r#"{"kind": "identity"}"#, "--point", "1,0", "--length", "5"]);
    assert_eq!(fixed.status.code(), Some(2));
}

#[test]
fn render_reports() {
    let dir = TempDir::new().unwrap();
    let curve = file(&dir, "t.json", TRIANGLE_TWICE);
    let report = dir.path().join("r.json");
    assert!(fixloc(&["decompose", s(&curve), "--out", s(&report)]).status.success());
    for input in [&curve, &report] {
        let svg = dir.path().join("x.svg");
        assert!(fixloc(&["render", s(input), "--svg", s(&svg)]).status.success());
        assert_well_formed_svg(&fs::read_to_string(&svg).unwrap());
    }
    assert_eq!(fixloc(&["render", s(&curve)]).status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let curve = file(&dir, "t.json", TRIANGLE_TWICE);
    let family = file(&dir, "f.json", ROTATIONS);
    for args in [
        vec!["decompose", s(&curve), "--seed", "7"],
        vec!["theorem", s(&family), "--seed", "7"],
        vec!["counterexample", "--n", "4", "--p", "0.5,0", "--q", "0.3,0.4"],
    ] {
        let a = fixloc(&args);
        let b = fixloc(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
    }
}
