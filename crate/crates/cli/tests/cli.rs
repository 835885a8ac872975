//! End-to-end checks of the installed binary: simulate → fit → summarize /
//! predict / diagnose round trips on temporary files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bgnlm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bgnlm"))
}

fn run_ok(cmd: &mut Command) -> (String, String) {
    let Output { status, stdout, stderr } = cmd.output().expect("spawn bgnlm");
    let stdout = String::from_utf8(stdout).unwrap();
    let stderr = String::from_utf8(stderr).unwrap();
    assert!(status.success(), "command failed\nstdout:\n{stdout}\nstderr:\n{stderr}");
    (stdout, stderr)
}

fn run_err(cmd: &mut Command) -> String {
    let Output { status, stderr, .. } = cmd.output().expect("spawn bgnlm");
    assert!(!status.success(), "command unexpectedly succeeded");
    String::from_utf8(stderr).unwrap()
}

fn simulate_linear(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let path = dir.join(format!("linear_{n}_{seed}.csv"));
    run_ok(bgnlm().args([
        "simulate",
        "--scenario",
        "linear",
        "--n",
        &n.to_string(),
        "--p",
        "6",
        "--seed",
        &seed.to_string(),
        "--out",
        path.to_str().unwrap(),
    ]));
    path
}

#[test]
fn simulate_writes_deterministic_csv_with_response_first() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate_linear(dir.path(), 30, 7);
    let text = fs::read_to_string(&a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "y,x1,x2,x3,x4,x5,x6");
    assert_eq!(text.lines().count(), 31);

    let b = dir.path().join("again.csv");
    run_ok(bgnlm().args([
        "simulate", "--scenario", "linear", "--n", "30", "--p", "6", "--seed", "7", "--out",
        b.to_str().unwrap(),
    ]));
    assert_eq!(fs::read_to_string(&b).unwrap(), text);
}

#[test]
fn linear_chain_fit_reports_and_archives() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_linear(dir.path(), 120, 1);
    let archive = dir.path().join("fit.json");
    let (stdout, _) = run_ok(bgnlm().args([
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--response",
        "y",
        "--N",
        "400",
        "--seed",
        "3",
        "--out",
        archive.to_str().unwrap(),
    ]));
    assert!(stdout.starts_with("Best log marginal posterior:"));
    assert!(stdout.contains("feats.strings marg.probs"));
    // strong coefficients on x4 and x5 should be found by a linear chain
    assert!(stdout.contains("x5"), "summary missing x5:\n{stdout}");

    // re-summarizing the archive reproduces the fit-time report exactly
    let (again, _) =
        run_ok(bgnlm().args(["summarize", "--archive", archive.to_str().unwrap()]));
    assert_eq!(again, stdout);

    // machine-readable variants
    let (csv, _) = run_ok(bgnlm().args([
        "summarize", "--archive", archive.to_str().unwrap(), "--format", "csv",
    ]));
    assert!(csv.starts_with("feature,prob\n"));
    let (json, _) = run_ok(bgnlm().args([
        "summarize", "--archive", archive.to_str().unwrap(), "--format", "json",
    ]));
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(parsed["rows"].is_array());
}

#[test]
fn genetic_method_demands_transforms() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_linear(dir.path(), 30, 2);
    let stderr = run_err(bgnlm().args([
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--response",
        "y",
        "--method",
        "gmjmcmc",
    ]));
    assert!(stderr.contains("--transforms"), "stderr: {stderr}");
}

#[test]
fn missing_cells_are_rejected_with_a_count() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("holes.csv");
    fs::write(&data, "y,a,b\n1,2,3\n4,NA,6\n7,8,\n").unwrap();
    let stderr = run_err(bgnlm().args([
        "fit", "--data", data.to_str().unwrap(), "--response", "y",
    ]));
    assert!(stderr.contains("2 missing cell(s)"), "stderr: {stderr}");
}

#[test]
fn categorical_covariates_expand_to_dummies() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("factor.csv");
    let mut text = String::from("y,grp,x\n");
    for i in 0..60 {
        let grp = ["a", "b", "c"][i % 3];
        let x = (i as f64) * 0.1;
        let bump = match i % 3 {
            1 => 3.0,
            2 => -2.0,
            _ => 0.0,
        };
        let y = 1.0 + bump + 0.5 * x + 0.01 * ((i * i) % 7) as f64;
        text.push_str(&format!("{y},{grp},{x}\n"));
    }
    fs::write(&data, text).unwrap();
    let archive = dir.path().join("factor.json");
    let (stdout, _) = run_ok(bgnlm().args([
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--response",
        "y",
        "--N",
        "300",
        "--seed",
        "5",
        "--tol",
        "0",
        "--out",
        archive.to_str().unwrap(),
    ]));
    assert!(stdout.contains("grp_b"), "expected dummy grp_b in:\n{stdout}");
    assert!(stdout.contains("grp_c"), "expected dummy grp_c in:\n{stdout}");

    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&archive).unwrap()).unwrap();
    let labels: Vec<&str> =
        doc["labels"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(labels, vec!["grp_b", "grp_c", "x"]);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_linear(dir.path(), 40, 4);
    let config = dir.path().join("run.toml");
    fs::write(&config, "N = 37\nseed = 11\n\n[beta_prior]\nname = \"BIC\"\n").unwrap();
    let archive = dir.path().join("override.json");
    run_ok(bgnlm().args([
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--response",
        "y",
        "--config",
        config.to_str().unwrap(),
        "--N",
        "53",
        "--out",
        archive.to_str().unwrap(),
    ]));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&archive).unwrap()).unwrap();
    assert_eq!(doc["config"]["N"], 53);
    assert_eq!(doc["config"]["seed"], 11);
    assert_eq!(doc["config"]["beta_prior"]["name"], "BIC");
}

#[test]
fn nonlinear_fit_predicts_and_diagnoses() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_linear(dir.path(), 90, 6);
    let archive = dir.path().join("gen.json");
    let (stdout, _) = run_ok(bgnlm().args([
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--response",
        "y",
        "--method",
        "gmjmcmc",
        "--transforms",
        "sigmoid,troot",
        "--P",
        "3",
        "--N",
        "80",
        "--seed",
        "9",
        "--out",
        archive.to_str().unwrap(),
    ]));
    assert!(stdout.starts_with("Best   population:"), "stdout: {stdout}");

    let pred_path = dir.path().join("pred.csv");
    let (_, stderr) = run_ok(bgnlm().args([
        "predict",
        "--archive",
        archive.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        pred_path.to_str().unwrap(),
    ]));
    let pred = fs::read_to_string(&pred_path).unwrap();
    let mut lines = pred.lines();
    assert_eq!(lines.next().unwrap(), "id,mean,q0.025,q0.975");
    assert_eq!(pred.lines().count(), 91);
    assert!(stderr.contains("RMSE:"), "stderr: {stderr}");

    let (diag, _) = run_ok(bgnlm().args([
        "diagnose",
        "--archive",
        archive.to_str().unwrap(),
        "--stats",
        "median,max",
        "--window",
        "2",
    ]));
    let mut lines = diag.lines();
    assert_eq!(lines.next().unwrap(), "generation,statistic,value,lower,upper");
    // 3 generations × 2 statistics
    assert_eq!(diag.lines().count(), 7);
    assert!(diag.contains("1,median,"));
    assert!(diag.contains("3,max,"));
}

#[test]
fn parallel_archives_are_independent_of_core_count() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_linear(dir.path(), 50, 8);
    let fit = |cores: &str, out: &Path| {
        run_ok(bgnlm().args([
            "fit",
            "--data",
            data.to_str().unwrap(),
            "--response",
            "y",
            "--method",
            "gmjmcmc.parallel",
            "--transforms",
            "sigmoid",
            "--P",
            "2",
            "--N",
            "40",
            "--runs",
            "2",
            "--cores",
            cores,
            "--seed",
            "12",
            "--out",
            out.to_str().unwrap(),
        ]));
    };
    let one = dir.path().join("c1.json");
    let two = dir.path().join("c2.json");
    fit("1", &one);
    fit("2", &two);
    assert_eq!(fs::read_to_string(&one).unwrap(), fs::read_to_string(&two).unwrap());
}

#[test]
fn held_out_split_writes_predictions_and_scaling_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_linear(dir.path(), 100, 10);
    let archive = dir.path().join("split.json");
    let pred = dir.path().join("holdout.csv");
    let (_, stderr) = run_ok(bgnlm().args([
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--response",
        "y",
        "--N",
        "300",
        "--seed",
        "13",
        "--scale",
        "--test-rows",
        "0.2",
        "--out",
        archive.to_str().unwrap(),
        "--predict-out",
        pred.to_str().unwrap(),
    ]));
    assert!(stderr.contains("held-out RMSE:"), "stderr: {stderr}");
    let text = fs::read_to_string(&pred).unwrap();
    assert_eq!(text.lines().next().unwrap(), "id,mean,q0.025,q0.975");
    assert_eq!(text.lines().count(), 21); // header + 20% of 100 rows

    // predictions come back on the original response scale: the linear
    // signal has sd well above 1, so unstandardized values should too
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&archive).unwrap()).unwrap();
    assert!(doc["schema"]["scaling"]["y_scale"].as_f64().unwrap() > 0.5);
    let rmse: f64 = stderr
        .split("held-out RMSE: ")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    // the linear scenario has unit noise; model-averaged prediction on the
    // original scale should land near it, far from the standardized scale
    assert!(rmse > 0.3 && rmse < 3.0, "rmse {rmse} looks like the wrong scale");
}

#[test]
fn fixed_columns_are_always_included() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_linear(dir.path(), 50, 14);
    let archive = dir.path().join("fixed.json");
    run_ok(bgnlm().args([
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--response",
        "y",
        "--N",
        "120",
        "--fixed",
        "2",
        "--seed",
        "15",
        "--out",
        archive.to_str().unwrap(),
    ]));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&archive).unwrap()).unwrap();
    let fixed: Vec<&str> =
        doc["fixed_labels"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(fixed, vec!["x1", "x2"]);
    let searched: Vec<&str> =
        doc["labels"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(searched, vec!["x3", "x4", "x5", "x6"]);
    // every archived model carries intercept + 2 fixed coefficients on top
    // of its selected features
    let models = doc["runs"][0]["generations"][0]["models"].as_array().unwrap();
    for m in models {
        let bits = m["model"].as_str().unwrap();
        let included = bits.bytes().filter(|&b| b == b'1').count();
        assert_eq!(m["coefs"].as_array().unwrap().len(), 3 + included);
    }
}
