use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn travesty(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_travesty"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn roc_grid_has_three_times_99_rows() {
    let out = travesty(&[
        "roc",
        "--theta1",
        "0.008",
        "--theta0",
        "0.719",
        "--ph1",
        "0.802",
        "--zeta",
        "0.05,0.2,0.5",
        "--beta-grid",
        "0.01:0.99:0.01",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "zeta,beta,PF_quantum,PD_quantum,PF_classical,PD_classical,QA"
    );
    assert_eq!(lines.count(), 3 * 99);
}

#[test]
fn solve_reports_case_study_equilibrium() {
    let doc = stdout_json(&travesty(&[
        "solve", "--beta", "0.4", "--zeta", "0.2", "--K", "4",
    ]));
    assert_eq!(doc["u1"]["0"].as_f64().unwrap(), 0.8951);
    assert_eq!(doc["u1"]["1"].as_f64().unwrap(), 0.0);
    assert_eq!(doc["plan"]["K"], 4);

    let full = stdout_json(&travesty(&["solve", "--full-precision"]));
    let u: f64 = full["u1"]["0"].as_str().unwrap().parse().unwrap();
    assert!((u - 0.895_100).abs() < 1e-6);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["solve", "--beta", "1.5"],
        vec!["solve", "--no-such-flag"],
        vec!["solve", "--K", "2"],
        vec!["roc", "--zeta", "1.5"],
        vec!["roc", "--plot"],
        vec!["solve", "--theta1", "0.1", "--model-csv", "m.csv"],
    ] {
        let out = travesty(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn domain_errors_exit_1() {
    let out = travesty(&["solve", "--ph1", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    assert_eq!(travesty(&["ingest", path(&empty)]).status.code(), Some(1));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = travesty(&[
            "simulate",
            "--seed",
            "42",
            "--horizon",
            "30",
            "--out",
            path(&out),
        ])
        .status;
        assert!(status.success());
        let status =
            travesty(&["roc", "--beta-grid", "0.05:0.95:0.05", "--out", path(&out)]).status;
        assert!(status.success());
    }
    for file in ["trace.jsonl", "roc.csv"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs");
    }
    let trace = fs::read_to_string(dir.path().join("a/trace.jsonl")).unwrap();
    assert_eq!(trace.lines().count(), 31);
    let manifest = |run: &str| -> Value {
        let mut m: Value =
            serde_json::from_slice(&fs::read(dir.path().join(run).join("manifest.json")).unwrap())
                .unwrap();
        m["resolved_config"]["out"] = Value::Null;
        m
    };
    assert_eq!(manifest("a"), manifest("b"));
}

#[test]
fn dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = travesty(&[
        "simulate",
        "--dry-run",
        "--out",
        path(&out_dir),
        "--horizon",
        "7",
    ]);
    let doc = stdout_json(&out);
    assert_eq!(doc["command"], "simulate");
    assert_eq!(doc["resolved_config"]["horizon"], 7);
    assert_eq!(doc["resolved_config"]["u0_convention"], "static");
    assert!(!out_dir.exists());
}

#[test]
fn manifest_accompanies_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("model.csv");
    fs::write(
        &csv,
        "signal,f1,f0\nlow,0.9,0.2\nmid,0.05,0.3\nhigh,0.05,0.5\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let status = travesty(&["solve", "--model-csv", path(&csv), "--out", path(&out_dir)]).status;
    assert!(status.success());
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "solve");
    assert_eq!(manifest["resolved_config"]["K"], 4);
    let digest = manifest["input_digests"][path(&csv)].as_str().unwrap();
    assert!(digest.starts_with("sha256:") && digest.len() == 7 + 64);
    assert_eq!(manifest["outputs"][0], "solution.json");
    let sol: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("solution.json")).unwrap()).unwrap();
    assert_eq!(sol["u1"].as_object().unwrap().len(), 3);
}

#[test]
fn plots_carry_axis_labels() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plots");
    assert!(travesty(&["roc", "--plot", "--out", path(&out)])
        .status
        .success());
    let svg = fs::read_to_string(out.join("roc.svg")).unwrap();
    assert!(svg.contains(">P_F (classical)<") && svg.contains(">P_D (quantum)<"));
    assert!(travesty(&["simulate", "--plot", "--out", path(&out)])
        .status
        .success());
    assert!(fs::read_to_string(out.join("trajectory.svg"))
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn ingest_then_respond_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.txt");
    let row = |login: &str, label: &str| {
        let mut f = vec!["0"; 42];
        f[11] = login;
        f[41] = label;
        f.join(",")
    };
    let mut lines = Vec::new();
    lines.extend((0..3).map(|_| row("1", "neptune.")));
    lines.extend((0..5).map(|_| row("0", "smurf.")));
    lines.extend((0..4).map(|_| row("1", "normal.")));
    lines.push(row("0", "normal."));
    fs::write(&records, lines.join("\n")).unwrap();

    let out_dir = dir.path().join("ingest");
    assert!(travesty(&[
        "ingest",
        path(&records),
        "--strict",
        "--out",
        path(&out_dir)
    ])
    .status
    .success());
    let doc: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("model.json")).unwrap()).unwrap();
    assert_eq!(doc["summary"]["attack_records"], 8);
    assert_eq!(doc["model"]["f0"][0].as_f64().unwrap(), 0.8);

    let model_csv = out_dir.join("model.csv");
    let sol_dir = dir.path().join("solve");
    let ph1 = "0.6153846153846154";
    assert!(travesty(&[
        "solve",
        "--model-csv",
        path(&model_csv),
        "--ph1",
        ph1,
        "--full-precision",
        "--out",
        path(&sol_dir)
    ])
    .status
    .success());
    let solution = sol_dir.join("solution.json");
    let rule = stdout_json(&travesty(&[
        "respond",
        "--model-csv",
        path(&model_csv),
        "--ph1",
        ph1,
        "--plan",
        path(&solution),
        "--full-precision",
    ]));
    let sol: Value = serde_json::from_str(&fs::read_to_string(&solution).unwrap()).unwrap();
    assert_eq!(rule, sol["rule"]);

    let rounded = dir.path().join("rounded");
    assert!(travesty(&[
        "solve",
        "--model-csv",
        path(&model_csv),
        "--ph1",
        ph1,
        "--out",
        path(&rounded)
    ])
    .status
    .success());
    let out = travesty(&[
        "respond",
        "--model-csv",
        path(&model_csv),
        "--ph1",
        ph1,
        "--plan",
        path(&rounded.join("solution.json")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--full-precision"));
}
