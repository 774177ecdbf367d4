use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use gonosomal::audit::AuditOptions;
use gonosomal::dynamics::IterConfig;
use gonosomal::models::build_model;
use gonosomal_cli::expand_grid;
use gonosomal_cli::sweep::{run_sweep, Region, SweepConfig};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gonosomal"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn data(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    root.join(name).to_string_lossy().into_owned()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn list_models_names_every_model() {
    let out = run(&["list-models"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(
        names,
        [
            "wolbachia",
            "general-lemming",
            "wood-lemming",
            "arctic-lemming",
            "cichlid",
            "custom"
        ]
    );
    assert!(text.contains("ZZXX, ZWXX, ZWXY, ZZXY"));
}

#[test]
fn realizability_exit_codes() {
    let arctic = run(&["realizability", &data("arctic.table")]);
    assert_eq!(arctic.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&arctic.stdout).starts_with("infeasible"));

    let forward = run(&["realizability", &data("forward.table")]);
    assert_eq!(forward.status.code(), Some(0));
    let text = String::from_utf8_lossy(&forward.stdout);
    assert!(text.starts_with("feasible"));
    assert!(text.contains("witness verified: true"));

    let bad = run(&["realizability", &data("malformed.table")]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 2"));

    let missing = run(&["realizability", "/nonexistent/table"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn realizability_json_report() {
    let out = run(&["realizability", &data("arctic.table"), "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = stdout_json(&out);
    assert_eq!(doc["feasible"], false);
}

#[test]
fn simulate_writes_canonical_csv() {
    let out = run(&[
        "simulate",
        "--model",
        "arctic-lemming",
        "--start",
        "1/10,2/10,3/10,4/10",
        "--iters",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,x1,x2,x3,u,alpha"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    // Step 1 by hand: x_j' = Σ_i x_i γ_ij / α for the rows (1/2, 0, 0 | 1/2),
    // (1/4, 1/4, 1/4 | 1/4) and (0, 1/3, 1/3 | 1/3).
    let (x1, x2, x3) = (0.1, 0.2, 0.3);
    let alpha = x1 + x2 + x3;
    let expected = [
        (x1 / 2.0 + x2 / 4.0) / alpha,
        (x2 / 4.0 + x3 / 3.0) / alpha,
        (x2 / 4.0 + x3 / 3.0) / alpha,
        (x1 / 2.0 + x2 / 4.0 + x3 / 3.0) / alpha,
    ];
    for (got, want) in rows[1][1..5].iter().zip(expected) {
        assert!((got - want).abs() < 1e-15, "{got} vs {want}");
    }
    for row in &rows {
        assert!((row[1..5].iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((row[5] - row[1..4].iter().sum::<f64>()).abs() < 1e-15);
    }
}

#[test]
fn simulate_with_labels_and_json() {
    let out = run(&[
        "simulate",
        "--model",
        "cichlid",
        "--start",
        "1/4,1/4,1/4,1/4",
        "--iters",
        "2",
        "--labels",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("k,ZZXX,ZWXX,ZWXY,ZZXY,alpha\n"));

    let out = run(&[
        "simulate",
        "--model",
        "wood-lemming",
        "--start",
        "1/4,1/4,1/4,1/4",
        "--iters",
        "3",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["model"], "wood-lemming");
    assert_eq!(doc["trajectory"]["steps"], 3);
    assert_eq!(
        doc["prediction"]["point"]["exact"],
        serde_json::json!(["1/4", "1/4", "1/4", "1/4"])
    );
}

#[test]
fn fixed_points_document() {
    let out = run(&["fixed-points", "--model", "wolbachia", "--param", "eta=3/4"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["model"], "wolbachia");
    let normalized = doc["normalized"].as_array().unwrap();
    let exact: Vec<&Value> = normalized.iter().map(|p| &p["exact"]).collect();
    assert!(exact.contains(&&serde_json::json!(["3/4", "0", "0", "1/4"])));
    assert!(exact.contains(&&serde_json::json!(["0", "1/2", "0", "1/2"])));
    assert!(doc["oracle_max_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn verify_passes_and_reports_missing_theorems() {
    let out = run(&["verify", "--model", "arctic-lemming", "--start", "1/10,2/10,3/10,4/10"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["pass"], true);
    assert_eq!(
        doc["prediction"]["point"]["exact"],
        serde_json::json!(["7/20", "7/60", "7/60", "5/12"])
    );

    let out = run(&[
        "verify",
        "--model",
        "general-lemming",
        "--param",
        "gamma=1/4,1/8,1/8",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&[
        "verify",
        "--spec",
        &data("wolbachia-3-4.spec"),
        "--start",
        "1/4,1/4,1/4,1/4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout_json(&out)["prediction"]["point"]["exact"],
        serde_json::json!(["3/4", "0", "0", "1/4"])
    );
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["verify", "--model", "no-such-model"]).status.code(), Some(2));
    assert_eq!(
        run(&["fixed-points", "--model", "wolbachia", "--param", "eta=1/4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["simulate", "--model", "cichlid", "--start", "1/2,1/2,1/2,1/2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["bogus-command"]).status.code(), Some(2));
}

#[test]
fn sweep_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = run(&[
            "sweep",
            "--model",
            "wolbachia",
            "--grid",
            "eta=1/2,3/4,1",
            "--count",
            "10",
            "--seed",
            "42",
            "--write-trajectories",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let sa = fs::read(a.path().join("summary.json")).unwrap();
    let sb = fs::read(b.path().join("summary.json")).unwrap();
    assert_eq!(sa, sb);
    let doc: Value = serde_json::from_slice(&sa).unwrap();
    assert_eq!(doc["runs"], 30);
    assert_eq!(doc["passes"], 30);
    assert_eq!(doc["failures"], serde_json::json!([]));
    assert!(doc["worst_distance"].as_f64().unwrap() < 1e-8);
    let csvs = fs::read_dir(a.path().join("trajectories")).unwrap().count();
    assert_eq!(csvs, 30);
    assert!(a.path().join("trajectories/g002_s0009.csv").exists());

    let c = tempfile::tempdir().unwrap();
    run(&[
        "sweep",
        "--model",
        "wolbachia",
        "--grid",
        "eta=1/2,3/4,1",
        "--count",
        "10",
        "--seed",
        "43",
        "--out",
        c.path().to_str().unwrap(),
    ]);
    assert_ne!(fs::read(c.path().join("summary.json")).unwrap(), sa);
}

#[test]
fn sweep_rejects_bad_configs() {
    assert_eq!(
        run(&["sweep", "--model", "arctic-lemming", "--count", "0"])
            .status
            .code(),
        Some(2)
    );
    let out = run(&["sweep", "--model", "wolbachia", "--grid", "eta=3/4,1/4", "--count", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_grid_has_no_runs() {
    let cfg = SweepConfig {
        make_model: Box::new(|_| unreachable!("an empty grid builds no model")),
        grid: Vec::new(),
        count: 5,
        seed: 0,
        region: Region::Invariant,
        iter: IterConfig::default(),
        limit_tol: 1e-8,
        audit: AuditOptions::default(),
        out_dir: None,
        write_trajectories: false,
    };
    let summary = run_sweep(&cfg).unwrap();
    assert_eq!(summary.runs, 0);
    assert!(summary.failures.is_empty());
    assert_eq!(summary.worst_distance, None);
}

#[test]
fn sweep_records_errors_without_aborting() {
    let cfg = SweepConfig {
        make_model: Box::new(|params| {
            let borrowed: Vec<(&str, _)> = params.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
            Ok(build_model("general-lemming", &borrowed)?)
        }),
        grid: expand_grid(&["gamma=1/4,1/8,1/8;1/2,1/4,1/4".to_string()]).unwrap(),
        count: 3,
        seed: 9,
        region: Region::Invariant,
        iter: IterConfig {
            max_iters: 1000,
            ..IterConfig::default()
        },
        limit_tol: 1e-8,
        audit: AuditOptions::default(),
        out_dir: None,
        write_trajectories: false,
    };
    let summary = run_sweep(&cfg).unwrap();
    assert_eq!(summary.runs, 6);
    assert_eq!(summary.passes, 0);
    assert!(summary.results[..3]
        .iter()
        .all(|r| r.error.as_deref().unwrap().contains("no limit theorem")));
    // The cichlid point converges far too slowly for 1000 steps.
    assert!(summary.results[3..]
        .iter()
        .all(|r| r.error.as_deref() == Some("trajectory did not converge")));
}
