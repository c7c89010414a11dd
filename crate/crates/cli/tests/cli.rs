//! End-to-end tests of the `mvrel` binary: file formats, exit codes, and the
//! JSON surfaces of each subcommand family.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn mvrel() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mvrel"))
}

fn write_json(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn run_ok(output: Output) -> Value {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

fn subspace_json(ambient: usize, generators: Vec<Vec<f64>>) -> Value {
    json!({ "ambient": ambient, "scalar": "real", "generators": generators })
}

fn matrix_json(rows: Vec<Vec<f64>>) -> Value {
    json!({ "scalar": "real", "rows": rows })
}

#[test]
fn relation_compose_of_operator_graphs() {
    let dir = tempfile::tempdir().unwrap();
    // graphs of A = [[0,1],[0,0]] and B = [[1,0],[0,2]] as generator rows
    let r = write_json(
        dir.path(),
        "r.json",
        &json!({
            "dim_in": 2, "dim_out": 2, "scalar": "real",
            "generators": [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 1.0, 0.0]],
        }),
    );
    let t = write_json(
        dir.path(),
        "t.json",
        &json!({
            "dim_in": 2, "dim_out": 2, "scalar": "real",
            "generators": [[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 2.0]],
        }),
    );
    let out = run_ok(mvrel().args(["relation", "compose"]).arg(&r).arg(&t).output().unwrap());
    // RT = A·B has graph {(x, ABx)}; AB = [[0,2],[0,0]], a 2-dim graph
    assert_eq!(out["parts"]["graph_dim"], 2);
    assert_eq!(out["parts"]["is_operator"], true);
    assert_eq!(out["parts"]["ran"]["dim"], 1);
}

#[test]
fn relation_parts_apply_and_pinv() {
    let dir = tempfile::tempdir().unwrap();
    let t = write_json(
        dir.path(),
        "t.json",
        &json!({
            "dim_in": 2, "dim_out": 2, "scalar": "real",
            "generators": [[1.0, 0.0, 1.0, 0.0]],
        }),
    );
    let out = run_ok(mvrel().args(["relation", "parts"]).arg(&t).output().unwrap());
    assert_eq!(out["dom"]["dim"], 1);
    assert_eq!(out["mul"]["dim"], 0);

    let x = write_json(dir.path(), "x.json", &json!({"scalar": "real", "entries": [2.0, 0.0]}));
    let out = run_ok(mvrel().args(["relation", "apply"]).arg(&t).arg(&x).output().unwrap());
    assert_eq!(out["nonempty"], true);
    let point: Vec<f64> =
        out["point"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!((point[0] - 2.0).abs() < 1e-9 && point[1].abs() < 1e-12);

    // outside the domain the set is empty
    let y = write_json(dir.path(), "y.json", &json!({"scalar": "real", "entries": [0.0, 3.0]}));
    let out = run_ok(mvrel().args(["relation", "apply"]).arg(&t).arg(&y).output().unwrap());
    assert_eq!(out["nonempty"], false);

    let a = write_json(dir.path(), "a.json", &matrix_json(vec![vec![2.0, 0.0], vec![0.0, 0.0]]));
    let out = run_ok(mvrel().args(["relation", "pinv"]).arg(&a).output().unwrap());
    let rows = out["matrix"]["rows"].as_array().unwrap();
    assert!((rows[0][0].as_f64().unwrap() - 0.5).abs() < 1e-10);
    assert!(rows[1][1].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn mvproj_build_reports_all_parts() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_json(dir.path(), "m.json", &subspace_json(2, vec![vec![1.0, 0.0]]));
    let n = write_json(dir.path(), "n.json", &subspace_json(2, vec![vec![1.0, 1.0]]));
    let out = run_ok(mvrel().args(["mvproj", "build"]).arg(&m).arg(&n).output().unwrap());
    assert_eq!(out["parts"]["dom"]["dim"], 2);
    assert_eq!(out["parts"]["ran"]["dim"], 1);
    assert_eq!(out["parts"]["ker"]["dim"], 1);
    assert_eq!(out["parts"]["mul"]["dim"], 0);

    let out = run_ok(mvrel().args(["mvproj", "greville"]).arg(&m).arg(&n).output().unwrap());
    let dist: f64 = out["distance_to_direct"].as_str().unwrap().parse().unwrap();
    assert!(dist < 1e-9);

    let out = run_ok(mvrel().args(["mvproj", "continuity"]).arg(&m).arg(&n).output().unwrap());
    let cos: f64 = out["cosine"].as_str().unwrap().parse().unwrap();
    assert!((cos - 1.0 / 2f64.sqrt()).abs() < 1e-10);
}

#[test]
fn mvproj_classify_and_compress() {
    let dir = tempfile::tempdir().unwrap();
    let t = write_json(
        dir.path(),
        "nilpotent.json",
        &json!({
            "dim_in": 2, "dim_out": 2, "scalar": "real",
            "generators": [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 1.0, 0.0]],
        }),
    );
    let out = run_ok(mvrel().args(["mvproj", "classify"]).arg(&t).output().unwrap());
    assert_eq!(out["class"], "mv_nilpotent");

    let f = write_json(dir.path(), "f.json", &matrix_json(vec![vec![1.0, 0.0], vec![0.0, 1.0]]));
    let m = write_json(dir.path(), "m.json", &subspace_json(2, vec![vec![1.0, 0.0]]));
    let n = write_json(dir.path(), "n.json", &subspace_json(2, vec![vec![1.0, 1.0]]));
    let out = run_ok(
        mvrel().args(["mvproj", "compress"]).arg(&f).arg(&m).arg(&n).output().unwrap(),
    );
    assert_eq!(out["is_projection"], true);
}

#[test]
fn semiclosed_polar_and_debranges() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_json(dir.path(), "a.json", &matrix_json(vec![vec![1.0, 0.0], vec![0.0, 1.0]]));
    let b = write_json(dir.path(), "b.json", &matrix_json(vec![vec![0.0, 0.0], vec![0.0, 0.0]]));
    let out = run_ok(mvrel().args(["semiclosed", "polar"]).arg(&a).arg(&b).output().unwrap());
    let gamma = out["gamma"]["rows"].as_array().unwrap();
    assert!((gamma[0][0].as_f64().unwrap() - 1.0).abs() < 1e-10);

    let t = write_json(dir.path(), "t.json", &matrix_json(vec![vec![1.0, 0.0], vec![0.0, 0.0]]));
    let out = run_ok(mvrel().args(["semiclosed", "debranges"]).arg(&t).output().unwrap());
    assert_eq!(out["norm_bound_ok"], true);
    assert_eq!(out["overlap"]["dim"], 0);

    // a non-contraction exits with the assertion code
    let big = write_json(dir.path(), "big.json", &matrix_json(vec![vec![2.0, 0.0], vec![0.0, 0.0]]));
    let output = mvrel().args(["semiclosed", "debranges"]).arg(&big).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn relation_inverse_and_adjoint_wiring() {
    let dir = tempfile::tempdir().unwrap();
    // graph of diag(2, 3)
    let t = write_json(
        dir.path(),
        "t.json",
        &json!({
            "dim_in": 2, "dim_out": 2, "scalar": "real",
            "generators": [[1.0, 0.0, 2.0, 0.0], [0.0, 1.0, 0.0, 3.0]],
        }),
    );
    let out = run_ok(mvrel().args(["relation", "inverse"]).arg(&t).output().unwrap());
    assert_eq!(out["parts"]["is_operator"], true);
    assert_eq!(out["parts"]["dom"]["dim"], 2);
    let out = run_ok(mvrel().args(["relation", "adjoint"]).arg(&t).output().unwrap());
    assert_eq!(out["parts"]["is_operator"], true);
}

#[test]
fn mvproj_ptak_and_decompose_wiring() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_json(
        dir.path(),
        "m.json",
        &subspace_json(3, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]),
    );
    let n = write_json(
        dir.path(),
        "n.json",
        &subspace_json(3, vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]),
    );
    let out = run_ok(mvrel().args(["mvproj", "ptak"]).arg(&m).arg(&n).output().unwrap());
    let dist: f64 = out["distance_to_direct"].as_str().unwrap().parse().unwrap();
    assert!(dist < 1e-9);
    assert_eq!(out["kernel_of_residual"]["dim"], 1); // M ∩ N = span{e1}

    let out = run_ok(mvrel().args(["mvproj", "decompose"]).arg(&m).arg(&n).output().unwrap());
    assert_eq!(out["kind"], "componentwise");
    assert_eq!(out["inputs"]["m"]["dim"], 2);
    // the residual term is {0} × (M∩N), one generator
    assert_eq!(out["residual_term"]["generators"].as_array().unwrap().len(), 1);
}

#[test]
fn semiclosed_family_wiring() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_json(
        dir.path(),
        "a.json",
        &matrix_json(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0]]),
    );
    let b = write_json(
        dir.path(),
        "b.json",
        &matrix_json(vec![vec![0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]),
    );
    let out = run_ok(mvrel().args(["semiclosed", "ando"]).arg(&a).arg(&b).output().unwrap());
    let dist: f64 = out["distance_to_direct"].as_str().unwrap().parse().unwrap();
    assert!(dist < 1e-9);

    let out = run_ok(mvrel().args(["semiclosed", "quasiaffine"]).arg(&a).arg(&b).output().unwrap());
    assert_eq!(out["frame"]["dim"], 3);
    assert_eq!(out["overlap_s"]["dim"], 1); // ran A ∩ ran B = span{e2}

    let out = run_ok(mvrel().args(["semiclosed", "split"]).arg(&a).arg(&b).output().unwrap());
    assert_eq!(out["in_m"]["dim"], 1);
    assert_eq!(out["in_n"]["dim"], 1);
    assert_eq!(out["overlap"]["dim"], 1);

    let out =
        run_ok(mvrel().args(["semiclosed", "orthogonalize"]).arg(&a).arg(&b).output().unwrap());
    assert_eq!(out["s"]["dim"], 1);

    // conjugation by the identity needs M + N to be everything, which holds
    let g = write_json(
        dir.path(),
        "g.json",
        &matrix_json(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]),
    );
    let m = write_json(
        dir.path(),
        "m.json",
        &subspace_json(3, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]),
    );
    let n = write_json(
        dir.path(),
        "n.json",
        &subspace_json(3, vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]),
    );
    let out = run_ok(
        mvrel().args(["semiclosed", "conjugate"]).arg(&g).arg(&m).arg(&n).output().unwrap(),
    );
    assert_eq!(out["preimage_m"]["dim"], 2);

    // a Γ whose range misses M + N is rejected as a precondition failure
    let small_g = write_json(
        dir.path(),
        "small_g.json",
        &matrix_json(vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]]),
    );
    let output =
        mvrel().args(["semiclosed", "conjugate"]).arg(&small_g).arg(&m).arg(&n).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("ran Γ"));
}

#[test]
fn wlss_solve_and_residual() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_json(
        dir.path(),
        "prob.json",
        &json!({
            "scalar": "real",
            "W": [[1.0, 0.0], [0.0, 0.0]],
            "A": [[1.0], [1.0]],
            "b": [3.0, 7.0],
        }),
    );
    let out = run_ok(mvrel().args(["wlss", "solve"]).arg(&problem).output().unwrap());
    assert_eq!(out["nonempty"], true);
    let point = out["point"].as_array().unwrap();
    assert!((point[0].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert!(out["residual"].as_f64().unwrap() < 1e-9);

    let x = write_json(dir.path(), "x.json", &json!({"scalar": "real", "entries": [5.0]}));
    let out = run_ok(mvrel().args(["wlss", "residual"]).arg(&problem).arg(&x).output().unwrap());
    let r: f64 = out["residual"].as_str().unwrap().parse().unwrap();
    assert!((r - 2.0).abs() < 1e-10); // |5 − 3| weighted by diag(1,0)
}

#[test]
fn parse_and_dimension_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let output = mvrel().args(["relation", "parts"]).arg(&bad).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let message = String::from_utf8_lossy(&output.stderr);
    assert!(message.contains("bad.json"), "error names the offending file: {message}");

    // generators of the wrong width
    let ragged = write_json(
        dir.path(),
        "ragged.json",
        &json!({
            "dim_in": 2, "dim_out": 2, "scalar": "real",
            "generators": [[1.0, 0.0, 0.0]],
        }),
    );
    let output = mvrel().args(["relation", "parts"]).arg(&ragged).output().unwrap();
    assert_eq!(output.status.code(), Some(2));

    // mismatched ambient spaces
    let m = write_json(dir.path(), "m.json", &subspace_json(2, vec![vec![1.0, 0.0]]));
    let n = write_json(dir.path(), "n.json", &subspace_json(3, vec![vec![1.0, 0.0, 0.0]]));
    let output = mvrel().args(["mvproj", "build"]).arg(&m).arg(&n).output().unwrap();
    assert_eq!(output.status.code(), Some(2));

    // usage errors come from the parser with the same code
    let output = mvrel().args(["relation", "no-such-op"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn complex_payloads_round_trip_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let t = write_json(
        dir.path(),
        "t.json",
        &json!({
            "dim_in": 1, "dim_out": 1, "scalar": "complex",
            "generators": [[[1.0, 0.0], [0.0, 1.0]]],  // the graph of x ↦ ix
        }),
    );
    let out = run_ok(
        mvrel().args(["--scalar", "complex", "relation", "adjoint"]).arg(&t).output().unwrap(),
    );
    // adjoint of multiplication by i is multiplication by −i
    let gens = out["relation"]["generators"].as_array().unwrap();
    assert_eq!(gens.len(), 1);
    // a real-mode run on the same file must be rejected as a parse error
    let output = mvrel().args(["relation", "adjoint"]).arg(&t).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn verify_subcommand_runs_selected_suite() {
    let out = run_ok(
        mvrel()
            .args(["verify", "--suite", "ptak", "--trials", "12", "--max-dim", "5", "--seed", "4"])
            .output()
            .unwrap(),
    );
    assert_eq!(out["passed"], true);
    let suites = out["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 1);
    assert_eq!(suites[0]["suite"], "ptak");
    assert_eq!(suites[0]["failures"], 0);

    let output = mvrel().args(["verify", "--suite", "no_such_suite"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn verify_replay_reproduces_recorded_failures() {
    // an absurd tolerance manufactures honest numerical failures, whose
    // dumps must replay to the identical outcome
    let dir = tempfile::tempdir().unwrap();
    let output = mvrel()
        .args(["verify", "--suite", "structure", "--trials", "10", "--tol", "1e-17"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1), "tol 1e-17 must fail");
    let report_path = dir.path().join("report.json");
    std::fs::write(&report_path, &output.stdout).unwrap();

    let out = run_ok(
        mvrel()
            .args(["verify", "--tol", "1e-17", "--replay"])
            .arg(&report_path)
            .output()
            .unwrap(),
    );
    assert!(out["replayed"].as_u64().unwrap() > 0);
    for result in out["results"].as_array().unwrap() {
        assert_eq!(result["matches"], true);
    }
}
