use std::path::Path;
use std::process::{Command, Output};

fn wmrl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wmrl")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const QL: &str = r#"{"model": "QL", "variation": 1, "params": {"alpha": 0.4, "beta": 6.0, "sigma": 1.0}}"#;

#[test]
fn full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("agent.json"), QL).unwrap();
    std::fs::write(
        d.join("fit.json"),
        r#"{"model": "QL", "variation": 1, "population": 12, "generations": 4, "replicates": 2, "seed": 1}"#,
    )
    .unwrap();

    let out = wmrl(&["synth", "--config", p(&d.join("agent.json")), "--out", p(&d.join("data.csv")), "--problems", "25"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(wmrl(&["validate", "--data", p(&d.join("data.csv"))]).status.success());

    let out = wmrl(&["fit", "--config", p(&d.join("fit.json")), "--data", p(&d.join("data.csv")), "--out", p(&d.join("front.json"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = wmrl(&["select", "--front", p(&d.join("front.json")), "--out", p(&d.join("best.json"))]);
    assert!(out.status.success());

    let out = wmrl(&["bic", "--config", p(&d.join("best.json")), "--config", p(&d.join("agent.json")), "--data", p(&d.join("data.csv"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("random"));

    let reports = d.join("reports");
    let out = wmrl(&[
        "simulate",
        "--config",
        p(&d.join("agent.json")),
        "--data",
        p(&d.join("data.csv")),
        "--out",
        p(&reports),
        "--reps",
        "5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["representative_steps.csv", "performance_by_error_count.csv", "contribution_trace.csv", "summary.json"] {
        assert!(reports.join(f).exists(), "{f}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.json"), r#"{"model": "QL", "variation": 1, "params": {"alpha": 0.4}}"#).unwrap();
    let out = wmrl(&["synth", "--config", p(&d.join("bad.json")), "--out", p(&d.join("x.csv"))]);
    assert_eq!(out.status.code(), Some(3));

    std::fs::write(
        d.join("bad.csv"),
        "session_id,problem_index,trial_index,phase,chosen_action,reward,rt,correct_action\ns,0,0,S,1,1,,2\n",
    )
    .unwrap();
    let out = wmrl(&["validate", "--data", p(&d.join("bad.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));
}
