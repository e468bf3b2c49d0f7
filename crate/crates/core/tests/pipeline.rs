mod common;

use common::{compare_with_golden, evkit, evkit_with_stdin, fixtures, run_pipeline, PIPELINE_OUTPUTS};
use evidence_kit::cli::{RunManifest, EXIT_INPUT, EXIT_OK, EXIT_PARTIAL};

fn p(dir: &std::path::Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn pipeline_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(dir.path());
    compare_with_golden(dir.path()).unwrap();
}

#[test]
fn pipeline_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_pipeline(a.path());
    run_pipeline(b.path());
    for name in PIPELINE_OUTPUTS {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs between runs");
    }
}

#[test]
fn outputs_carry_a_manifest_without_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(dir.path());
    let tally = std::fs::read_to_string(dir.path().join("tally.txt")).unwrap();
    let m = RunManifest::from_comment(tally.lines().next().unwrap()).unwrap();
    assert_eq!(m.command, "evaluate");
    assert_eq!(m.timestamp, None);
    let roles: Vec<&str> = m.inputs.iter().map(|i| i.role.as_str()).collect();
    assert_eq!(roles, ["frame", "train", "test", "disc"]);
    assert!(tally.contains("Total matched"));
}

#[test]
fn diagnose_reads_symptoms_from_stdin() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(dir.path());
    let out = evkit_with_stdin(
        &["diagnose", "--masses", &p(dir.path(), "masses_m1.json"), "--disc", &p(dir.path(), "disc.csv")],
        "id=q1 pulse=95 temp=39.1 pain=4\n",
    );
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert!(out.stdout.contains("case q1"), "{}", out.stdout);
    assert!(out.stdout.contains("belief intervals:"));
}

#[test]
fn diagnose_batch_with_bad_row_exits_partial() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(dir.path());
    let test = std::fs::read_to_string(dir.path().join("test.csv")).unwrap();
    let mut lines: Vec<&str> = test.lines().collect();
    let width = lines[0].split(',').count();
    let broken = vec!["bad"; width - 1].join(",");
    lines.insert(2, &broken);
    std::fs::write(dir.path().join("broken.csv"), lines.join("\n") + "\n").unwrap();
    let out = evkit(&[
        "diagnose",
        "--masses",
        &p(dir.path(), "masses_m1.json"),
        "--disc",
        &p(dir.path(), "disc.csv"),
        "--cases",
        &p(dir.path(), "broken.csv"),
    ]);
    assert_eq!(out.code, EXIT_PARTIAL, "{}", out.stderr);
    assert!(!out.stderr.is_empty());
}

#[test]
fn evaluate_refuses_overlapping_sets() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(dir.path());
    let out = evkit(&[
        "evaluate",
        "--frame",
        &p(dir.path(), "frame.txt"),
        "--train",
        &p(dir.path(), "train.csv"),
        "--test",
        &p(dir.path(), "train.csv"),
        "--disc",
        &p(dir.path(), "disc.csv"),
    ]);
    assert_eq!(out.code, EXIT_INPUT);
    assert!(out.stderr.contains("share"), "{}", out.stderr);
}

#[test]
fn woe_train_score_and_roc() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixtures();
    let fx = |n: &str| f.join(n).to_str().unwrap().to_string();
    let d = |n: &str| p(dir.path(), n);
    for (spec, out) in [("woe_train.json", "wtrain.csv"), ("woe_test.json", "wtest.csv")] {
        let r = evkit(&["synth", "--spec", &fx(spec), "--out", &d(out)]);
        assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    }
    let r = evkit(&[
        "woe",
        "train",
        "--cases",
        &d("wtrain.csv"),
        "--memberships",
        &fx("memberships.csv"),
        "--positive",
        "surgical",
        "--pairs",
        "--out",
        &d("weights.csv"),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let weights = std::fs::read_to_string(d("weights.csv")).unwrap();
    assert!(weights.contains("surgical,pulse=high,"));
    assert!(weights.lines().any(|l| l.contains('&')));

    let common = [
        "--weights".to_string(),
        d("weights.csv"),
        "--memberships".to_string(),
        fx("memberships.csv"),
        "--cases".to_string(),
        d("wtest.csv"),
        "--train".to_string(),
        d("wtrain.csv"),
    ];
    let common: Vec<&str> = common.iter().map(String::as_str).collect();

    let mut args = vec!["woe", "score"];
    args.extend(&common);
    let r = evkit(&args);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let rows: Vec<&str> = r.stdout.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "id,outcome,probability,log_odds,evidence");
    assert_eq!(rows.len(), 121);

    let mut args = vec!["woe", "roc", "--baseline", "logistic"];
    args.extend(&common);
    let r = evkit(&args);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let rows: Vec<&str> = r.stdout.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "method,threshold,tpr,fpr,tp,fp,tn,fn");
    assert_eq!(rows.iter().filter(|l| l.starts_with("woe,")).count(), 4);
    assert_eq!(rows.iter().filter(|l| l.starts_with("logistic,")).count(), 4);
}

#[test]
fn reduce_modes_keep_fewer_variables() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(dir.path());
    let kept = |mode: &str| {
        let r = evkit(&["reduce", "--cases", &p(dir.path(), "train.csv"), "--mode", mode]);
        assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
        r.stdout.lines().filter(|l| !l.starts_with('#')).count()
    };
    assert!(kept("cd5") < 9);
    assert!(kept("cd7") < 9);
}

#[test]
fn unknown_subcommand_is_an_input_error() {
    assert_eq!(evkit(&["frobnicate"]).code, EXIT_INPUT);
}
