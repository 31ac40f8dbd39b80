use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenes() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/scenes")
}

fn diffeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diffeo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scene(name: &str) -> String {
    scenes().join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn csv_bounds(text: &str) -> Vec<f64> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("level,bound,path_id"));
    lines
        .map(|l| {
            let b = l.split(',').nth(1).unwrap();
            if b == "inf" {
                f64::INFINITY
            } else {
                b.parse().unwrap()
            }
        })
        .collect()
}

#[test]
fn euclidean_distance_from_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("results.csv");
    let o = diffeo(&[
        "distance",
        "--space",
        &scene("euclidean2.json"),
        "--from",
        "0,0",
        "--to",
        "3,4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let bounds = csv_bounds(&std::fs::read_to_string(&out).unwrap());
    assert!((bounds.last().unwrap() - 5.0).abs() <= 1e-6);
    assert_eq!(stdout(&o), std::fs::read_to_string(&out).unwrap());
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_diffeo"))
            .env("DIFFEO_THREADS", threads)
            .args([
                "distance",
                "--space",
                &scene("y_space.json"),
                "--from",
                "1:1",
                "--to",
                "2:1",
                "--levels",
                "4",
                "--seed",
                "3",
            ])
            .args(["--out", path.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv", "1");
    assert_eq!(a, run("b.csv", "1"));
    assert_eq!(a, run("c.csv", "4"));
}

#[test]
fn y_space_reproduction_reaches_four_hundredths() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("y.csv");
    let o = diffeo(&[
        "reproduce",
        "y-space",
        "--levels",
        "6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let bounds = csv_bounds(&std::fs::read_to_string(out).unwrap());
    assert_eq!(bounds.len(), 6);
    assert!(*bounds.last().unwrap() <= 0.04);
}

#[test]
fn loop_section_json_records() {
    let o = diffeo(&["reproduce", "loop-section", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rec = &v["records"][0];
    assert_eq!(rec["op"], "section_pullback");
    assert!(rec["value"].as_f64().unwrap() <= 1e-6);
    for key in ["op", "inputs", "value", "tolerance"] {
        assert!(rec.get(key).is_some(), "{key}");
    }
}

#[test]
fn concatenation_reports_failure() {
    let o = diffeo(&["reproduce", "concatenation"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL concatenation_isometry"));
}

#[test]
fn malformed_scene_exits_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"primitive\": \"euclidean\",\n  \"dim\": }\n").unwrap();
    let o = diffeo(&["check-definiteness", "--space", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3, column"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        diffeo(&[
            "distance",
            "--space",
            &scene("euclidean2.json"),
            "--from",
            "0,0"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(diffeo(&["reproduce", "torus"]).status.code(), Some(2));
    assert_eq!(diffeo(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        diffeo(&[
            "distance",
            "--space",
            &scene("y_space.json"),
            "--from",
            "3:1",
            "--to",
            "1:1"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        diffeo(&[
            "distance",
            "--space",
            "/nonexistent.json",
            "--from",
            "0",
            "--to",
            "1"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn unreachable_points_report_inf() {
    let o = diffeo(&[
        "distance",
        "--space",
        &scene("two_planes.json"),
        "--from",
        "1:0,0",
        "--to",
        "2:0,0",
        "--levels",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(csv_bounds(&stdout(&o)).iter().all(|b| b.is_infinite()));
}

#[test]
fn checks_pass_and_fail() {
    let ok = |args: &[&str]| diffeo(args).status.code();
    assert_eq!(
        ok(&["check-definiteness", "--space", &scene("warped_exp.json")]),
        Some(0)
    );
    assert_eq!(
        ok(&["check-naturality", "--space", &scene("m_space.json")]),
        Some(0)
    );
    assert_eq!(
        ok(&[
            "check-isometry",
            "--space",
            &scene("warped_flat.json"),
            "--against",
            &scene("product_lines.json"),
            "--tol",
            "0"
        ]),
        Some(0)
    );
    assert_eq!(
        ok(&[
            "check-isometry",
            "--space",
            &scene("warped_exp.json"),
            "--against",
            &scene("product_lines.json")
        ]),
        Some(1)
    );
    assert_eq!(
        ok(&["check-isometry", "--space", &scene("wedge_loops.json")]),
        Some(1)
    );
    assert_eq!(
        ok(&["check-condition-e", "--space", &scene("loop_section.json")]),
        Some(0)
    );
    assert_eq!(
        ok(&["check-condition-e", "--space", &scene("loop_circles.json")]),
        Some(1)
    );
    assert_eq!(
        ok(&[
            "check-condition-e",
            "--space",
            &scene("loop_circles.json"),
            "--recognizer",
            "all"
        ]),
        Some(0)
    );
}

#[test]
fn witness_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.json");
    let o = diffeo(&[
        "distance",
        "--space",
        &scene("plus_space.json"),
        "--from",
        "1:-2",
        "--to",
        "2:3",
        "--levels",
        "2",
        "--witness",
        w.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let witness: diffeo_metric::distance::WitnessPath =
        serde_json::from_str(&std::fs::read_to_string(w).unwrap()).unwrap();
    assert_eq!(witness.to_path().unwrap().segments.len(), 2);
}
