use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use equibaire::cli::Scenario;

fn run(dir: &Path, scenario: &str, extra: &[&str]) -> (Output, PathBuf) {
    let path = dir.join("scenario.json");
    fs::write(&path, scenario).unwrap();
    let out = dir.join("out");
    let output = Command::new(env!("CARGO_BIN_EXE_equibaire"))
        .arg("run")
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    (output, out)
}

fn report(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

const HYPERBOLIC: &str = r#""map": {"a": [2,0], "b": [0,0], "c": [0,0], "d": [0.5,0]}"#;
const ROTATION: &str = r#""generator": {"A": [[[0,1],[0,0]],[[0,0],[0,-1]]]}"#;

#[test]
fn classify_reports_class_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(
        dir.path(),
        &format!(r#"{{{HYPERBOLIC}, "experiment": "classify"}}"#),
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["class"]["tag"], "hyperbolic");
    assert_eq!(r["result"]["class"]["trace"][0], 2.5);
}

#[test]
fn rotation_flow_verdict_holds() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(
        dir.path(),
        &format!(r#"{{{ROTATION}, "experiment": "verdict2"}}"#),
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["verdict"], "holds");
    assert_eq!(r["result"]["basis"], "theorem2-compact");
}

#[test]
fn failing_and_out_of_scope_verdicts_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let hyp = r#""generator": {"A": [[[1,0],[0,0]],[[0,0],[-1,0]]]}"#;
    let (o, out) = run(
        dir.path(),
        &format!(r#"{{{hyp}, "experiment": "verdict2"}}"#),
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["verdict"], "fails");
    assert_eq!(r["result"]["basis"], "theorem2-collapse");

    let elliptic = r#""map": {"a": [0,0], "b": [-1,0], "c": [1,0], "d": [0,0]}"#;
    let (o, out) = run(
        dir.path(),
        &format!(r#"{{{elliptic}, "experiment": "verdict1"}}"#),
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["verdict"], "out_of_scope");
}

#[test]
fn malformed_input_exits_two_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (format!("{{{HYPERBOLIC}}}"), "experiment"),
        (format!(r#"{{{HYPERBOLIC}, "experiment": "verdict2"}}"#), "generator"),
        (r#"{"map": {"a": [1,0], "b": [1,0], "c": [1,0], "d": [1,0]}, "experiment": "classify"}"#.into(), "map"),
        (r#"{"generator": {"A": [[[1,0],[0,0]],[[0,0],[1,0]]]}, "experiment": "flow"}"#.into(), "generator"),
        (format!(r#"{{{HYPERBOLIC}, "experiment": "classify", "extra": 1}}"#), "extra"),
        ("not json".into(), "scenario"),
    ];
    for (text, field) in cases {
        let (o, _) = run(dir.path(), &text, &[]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        let msg = String::from_utf8_lossy(&o.stderr);
        assert!(msg.contains(field), "{text}: {msg}");
    }
    let (o, _) = run(
        dir.path(),
        &format!(r#"{{{HYPERBOLIC}, "experiment": "gauge"}}"#),
        &["--radii", "0.1,0.2"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("radii"));
}

#[test]
fn basis_disagreement_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    // too slow for any collapse to show before t = 2¹⁰
    let slow = r#""generator": {"A": [[[0.001,0],[0,0]],[[0,0],[-0.001,0]]]}"#;
    let (o, out) = run(
        dir.path(),
        &format!(r#"{{{slow}, "experiment": "verdict2", "parameters": {{"grid_size": 8}}}}"#),
        &[],
    );
    assert_eq!(o.status.code(), Some(3));
    let r = report(&out);
    assert_eq!(r["error"], "basis-disagreement");
    assert_eq!(r["disagreement"]["algebraic"]["compact"], false);
}

#[test]
fn gauge_and_trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(
        dir.path(),
        &format!(
            r#"{{{HYPERBOLIC}, "experiment": "verdict1", "parameters": {{"n_max": 400, "samples_per_ball": 32}}}}"#
        ),
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("gauge.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,S,S_over_r"));
    assert_eq!(lines.count(), 9);

    let (o, out) = run(
        dir.path(),
        &format!(r#"{{{HYPERBOLIC}, "experiment": "orbit"}}"#),
        &["--nmax", "30"],
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "t_or_n,re,im,is_inf,chordal_dist_to_limit");
    assert_eq!(rows.len(), 32);
    let last: f64 = rows[31].rsplit(',').next().unwrap().parse().unwrap();
    assert!(
        last < 1e-15,
        "orbit of 1 under z -> 4z tends to infinity: {last}"
    );

    let (o, out) = run(
        dir.path(),
        &format!(r#"{{{ROTATION}, "experiment": "flow"}}"#),
        &["--tmax", "3.14159"],
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(
        csv.lines().skip(1).all(|l| l.ends_with(',')),
        "rotations have no limit"
    );
}

#[test]
fn report_echo_reparses() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        r#"{{{ROTATION}, "experiment": "approx-seq", "parameters": {{"m_max": 200, "grid_size": 20, "point": {{"affine": "inf"}}}}}}"#
    );
    let (o, out) = run(
        dir.path(),
        &text,
        &[
            "--seed",
            "4",
            "--tolerance-overrides",
            r#"{"collapse_tol": 1e-5}"#,
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = report(&out);
    let echo = serde_json::to_string(&r["scenario"]).unwrap();
    let reparsed = Scenario::from_json(&echo).unwrap();
    let mut original = Scenario::from_json(&text).unwrap();
    original.parameters.seed = Some(4);
    original.parameters.tolerances =
        Some([("collapse_tol".to_string(), 1e-5)].into_iter().collect());
    assert_eq!(reparsed, original);
    assert_eq!(r["result"]["rule"]["rule"], "irrational-rotation");
}

#[test]
fn every_experiment_runs() {
    let dir = tempfile::tempdir().unwrap();
    for exp in [
        "classify",
        "fixpoints",
        "normalize",
        "orbit",
        "gauge",
        "verdict1",
    ] {
        let (o, _) = run(
            dir.path(),
            &format!(
                r#"{{{HYPERBOLIC}, "experiment": "{exp}", "parameters": {{"n_max": 200, "samples_per_ball": 16}}}}"#
            ),
            &[],
        );
        assert_eq!(
            o.status.code(),
            Some(0),
            "{exp}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    for exp in ["classify", "flow", "gauge", "verdict2", "approx-seq"] {
        let (o, _) = run(
            dir.path(),
            &format!(
                r#"{{{ROTATION}, "experiment": "{exp}", "parameters": {{"m_max": 100, "grid_size": 16, "samples_per_ball": 16}}}}"#
            ),
            &[],
        );
        assert_eq!(
            o.status.code(),
            Some(0),
            "{exp}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn battery_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_equibaire");
    let o = Command::new(bin)
        .args(["battery", "metric-axioms"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("triangle inequality"));
    assert!(table.contains("10000/10000"));
    let o = Command::new(bin)
        .args(["battery", "canonical-forms"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(bin)
        .args(["battery", "nonsense"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("suite"));
}
