use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn copreg(args: &[&str]) -> Output {
    copreg_env(args, None)
}

fn copreg_env(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_copreg"));
    cmd.args(args).env_remove("COPREG_SEED");
    if let Some(s) = seed {
        cmd.env("COPREG_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn column(csv: &str, idx: usize) -> Vec<f64> {
    csv.lines().skip(1).map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn eval_checkerboard_permutation_regression_alternates_by_half() {
    let csv = stdout(&copreg(&["eval", "--family", "cbperm N=2 sigma=2,1", "--what", "regression", "--grid", "8"]));
    assert!(csv.starts_with("x,value\n"));
    let values = column(&csv, 1);
    assert_eq!(values, [0.75, 0.75, 0.75, 0.75, 0.25, 0.25, 0.25, 0.25]);
}

#[test]
fn eval_quantile_and_kernel_tables() {
    let csv =
        stdout(&copreg(&["eval", "--family", "product", "--what", "quantile", "--tau", "0.3,0.6", "--grid", "2"]));
    assert!(csv.starts_with("x,tau,value\n"));
    assert_eq!(column(&csv, 2), [0.3, 0.6, 0.3, 0.6]);
    let csv = stdout(&copreg(&["eval", "--family", "cube", "--what", "kernel", "--y", "0.25", "--grid", "2"]));
    assert!(csv.starts_with("x1,x2,y,value\n"));
    assert_eq!(column(&csv, 3), [0.5, 0.0, 0.0, 0.5]);
}

#[test]
fn bounds_report_for_the_identity_map() {
    let json = stdout(&copreg(&["bounds", "--family", "cd h=id", "--check", "mean_lp", "--p", "1"]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let check = &v["checks"][0];
    assert_eq!(check["tag"], "mean_lp");
    assert!((check["computed"].as_f64().unwrap() - 0.25).abs() < 1e-6);
    assert_eq!(check["bound"].as_f64().unwrap(), 0.25);
    assert_eq!(check["pass"], true);
    assert!(v["tolerances"]["mean_lp"].is_number());
}

#[test]
fn bounds_pairwise_checks_need_two_models() {
    let out = copreg(&["bounds", "--family", "product", "--check", "diameter"]);
    assert_eq!(code(&out), 1);
    let out = copreg(&["bounds", "--family", "product", "--check", "no_such_check"]);
    assert_eq!(code(&out), 1);
    let json = stdout(&copreg(&[
        "bounds",
        "--family",
        "comonotone",
        "--other",
        "flip comonotone",
        "--check",
        "diameter",
        "--p",
        "1",
        "--cells",
        "256",
    ]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!((v["checks"][0]["computed"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn metric_outputs() {
    let csv = stdout(&copreg(&[
        "metric",
        "--family",
        "comonotone",
        "--other",
        "flip comonotone",
        "--what",
        "phi",
        "--y",
        "0.1,0.5",
        "--cells",
        "128",
    ]));
    assert_eq!(csv.lines().next(), Some("y,phi"));
    let phi = column(&csv, 1);
    assert!((phi[0] - 0.2).abs() < 1e-12 && (phi[1] - 1.0).abs() < 1e-12, "{phi:?}");
    let json = stdout(&copreg(&["metric", "--family", "cube", "--other", "product dim=3", "--what", "regression"]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(code(&copreg(&["metric", "--family", "product"])), 1);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&copreg(&[])), 1);
    assert_eq!(code(&copreg(&["eval", "--bogus"])), 1);
    assert_eq!(code(&copreg(&["--help"])), 0);
    for sub in ["eval", "bounds", "metric", "convergence", "density"] {
        assert_eq!(code(&copreg(&[sub, "--help"])), 0, "{sub}");
    }
    assert_eq!(code(&copreg(&["eval", "--family", "nope"])), 2);
    assert_eq!(code(&copreg(&["eval", "--family", "clayton theta=-3"])), 2);
    assert_eq!(code(&copreg(&["convergence", "--family", "product", "--s", "0.7"])), 2);
    assert_eq!(code(&copreg(&["eval", "--family", "grid file=/nonexistent/g.csv"])), 3);
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"familly": "product"}"#).unwrap();
    assert_eq!(code(&copreg(&["--config", p(&cfg), "eval"])), 2);
    assert_eq!(code(&copreg(&["--config", p(&dir.path().join("missing.json")), "eval"])), 3);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = copreg(&["eval", "--family", "product", "--out", p(&blocker.join("sub/out.csv"))]);
    assert_eq!(code(&out), 3);
}

fn convergence_files(dir: &Path, extra: &[&str], seed: Option<&str>) -> (Vec<u8>, Vec<u8>) {
    let mut args =
        vec!["convergence", "--family", "clayton theta=2", "--sizes", "100,300", "--reps", "6", "--out", p(dir)];
    args.extend_from_slice(extra);
    stdout(&copreg_env(&args, seed));
    (fs::read(dir.join("errors.csv")).unwrap(), fs::read(dir.join("boxplot.csv")).unwrap())
}

#[test]
fn convergence_output_does_not_depend_on_worker_count() {
    let dir = TempDir::new().unwrap();
    let one = convergence_files(&dir.path().join("a"), &["--threads", "1", "--seed", "42"], None);
    let four = convergence_files(&dir.path().join("b"), &["--threads", "4", "--seed", "42"], None);
    let again = convergence_files(&dir.path().join("c"), &["--threads", "4", "--seed", "42"], None);
    assert_eq!(one, four);
    assert_eq!(four, again);
    let errors = String::from_utf8(one.0).unwrap();
    assert_eq!(errors.lines().next(), Some("n,rep,estimator,tau,N,l1_error,seconds"));
    assert_eq!(errors.lines().count(), 1 + 2 * 6 * 2);
    let boxplot = String::from_utf8(one.1).unwrap();
    assert_eq!(boxplot.lines().next(), Some("n,estimator,tau,min,q1,median,q3,max,mean"));
}

#[test]
fn timing_fills_the_seconds_column() {
    let dir = TempDir::new().unwrap();
    let (errors, _) = convergence_files(dir.path(), &["--timing"], None);
    let errors = String::from_utf8(errors).unwrap();
    assert!(column(&errors, 6).iter().any(|&s| s > 0.0));
}

#[test]
fn seed_precedence_is_file_then_environment_then_flag() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"seed": 2, "reps": 6}"#).unwrap();
    let cfg_arg = ["--config", p(&cfg)];
    let seed1 = convergence_files(&dir.path().join("flag1"), &["--seed", "1"], None);
    let seed2 = convergence_files(&dir.path().join("flag2"), &["--seed", "2"], None);
    assert_ne!(seed1, seed2);
    assert_eq!(convergence_files(&dir.path().join("file"), &cfg_arg, None), seed2);
    assert_eq!(convergence_files(&dir.path().join("env"), &cfg_arg, Some("1")), seed1);
    let flag_wins = [cfg_arg[0], cfg_arg[1], "--seed", "2"];
    assert_eq!(convergence_files(&dir.path().join("both"), &flag_wins, Some("1")), seed2);
    let out = copreg_env(&["convergence", "--family", "product", "--out", p(dir.path())], Some("abc"));
    assert_eq!(code(&out), 2);
}

#[test]
fn config_file_supplies_any_flag() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("eval.json");
    fs::write(&cfg, r#"{"family": "cbperm N=2 sigma=2,1", "grid": 4, "what": "quantile", "tau": [0.5]}"#).unwrap();
    let csv = stdout(&copreg(&["--config", p(&cfg), "eval"]));
    assert_eq!(column(&csv, 2), [0.75, 0.75, 0.25, 0.25]);
    let csv = stdout(&copreg(&["--config", p(&cfg), "eval", "--what", "regression"]));
    assert_eq!(column(&csv, 1), [0.75, 0.75, 0.25, 0.25]);
}

#[test]
fn density_writes_plotting_files_and_reloadable_grids() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("clayton");
    let listing =
        stdout(&copreg(&["density", "--family", "clayton theta=2", "--n", "400", "--tau", "0.2", "--out", p(&out)]));
    for name in [
        "grid.csv",
        "grid.json",
        "density.csv",
        "mean_step.csv",
        "quantile_step.csv",
        "truth_mean.csv",
        "truth_quantile.csv",
    ] {
        assert!(listing.contains(name), "{name} missing from {listing}");
    }
    let sidecar: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("grid.json")).unwrap()).unwrap();
    assert_eq!(sidecar["N"], 10);
    assert_eq!(sidecar["dim"], 2);
    let truth = fs::read_to_string(out.join("truth_quantile.csv")).unwrap();
    assert_eq!(truth.lines().count(), 1025);
    let last: f64 = truth.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((last - 0.2f64.powf(1.0 / 3.0)).abs() < 1e-9);
    let step = fs::read_to_string(out.join("mean_step.csv")).unwrap();
    assert_eq!(step.lines().next(), Some("piece_index,left,right,value"));

    // The written grid is a valid family: its regression matches the estimated step.
    let grid_family = format!("grid file={}", p(&out.join("grid.csv")));
    let csv = stdout(&copreg(&["eval", "--family", &grid_family, "--grid", "10"]));
    assert_eq!(column(&csv, 1), column(&step, 3));
    let flipped = stdout(&copreg(&["eval", "--family", &format!("flip {grid_family}"), "--grid", "10"]));
    for (a, b) in column(&csv, 1).iter().zip(column(&flipped, 1).iter()) {
        assert!((a + b - 1.0).abs() < 1e-12);
    }
}

#[test]
fn density_of_a_product_sample_is_flat() {
    let dir = TempDir::new().unwrap();
    stdout(&copreg(&["density", "--family", "product", "--n", "400", "--s", "0.4", "--out", p(dir.path())]));
    let dens = column(&fs::read_to_string(dir.path().join("density.csv")).unwrap(), 2);
    assert_eq!(dens.len(), 100);
    let mean = dens.iter().sum::<f64>() / 100.0;
    assert!((mean - 1.0).abs() < 1e-12);
    assert!(dens.iter().all(|&d| d < 3.0));
}

#[test]
fn density_from_a_data_file() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("sample.csv");
    let mut text = String::from("x,y\n");
    for k in 0..50 {
        let u = (k as f64 + 0.5) / 50.0;
        text.push_str(&format!("{},{}\n", u * 3.0 - 1.0, 10.0 - u));
    }
    fs::write(&data, text).unwrap();
    let out = dir.path().join("d");
    stdout(&copreg(&["density", "--data", p(&data), "--resolution", "5", "--out", p(&out)]));
    let mean = column(&fs::read_to_string(out.join("mean_step.csv")).unwrap(), 3);
    assert_eq!(mean, [0.9, 0.7, 0.5, 0.3, 0.1]);
    assert!(!out.join("truth_mean.csv").exists());
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1,2\n3\n").unwrap();
    assert_eq!(code(&copreg(&["density", "--data", p(&bad), "--out", p(&out)])), 2);
}
