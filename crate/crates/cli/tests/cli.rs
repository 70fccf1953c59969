use std::path::Path;
use std::process::{Command, Output};

fn perinull(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perinull"))
        .args(args)
        .env_remove("PERINULL_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn bf_json_round_trip() {
    let v = json(&perinull(&["bf", "--t", "2.00", "--n", "100", "--variant", "point", "--json"]));
    assert_eq!(v["variant"], "point");
    let bf = v["result"]["bf"].as_f64().unwrap();
    assert!((bf - 0.746923).abs() < 1e-5, "{bf}");
    let log_bf = v["result"]["log_bf"].as_f64().unwrap();
    assert!((log_bf.exp() - bf).abs() < 1e-12);
}

#[test]
fn peri_decomposition_is_printed_and_consistent() {
    let v = json(&perinull(&["bf", "--t", "2", "--n", "100", "--variant", "peri", "--json"]));
    let r = &v["result"];
    let sum = r["point_null_log_bf"].as_f64().unwrap() + r["correction_log_bf"].as_f64().unwrap();
    assert!((sum - r["log_bf"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn two_sample_example_with_t_override() {
    let v = json(&perinull(&[
        "bf", "--summary", "25.1", "7.3", "47", "28.0", "6.2", "43", "--t", "2.00", "--variant", "point", "--kappa1",
        "0.7071", "--json",
    ]));
    let bf = v["result"]["bf"].as_f64().unwrap();
    assert!((bf - 1.259).abs() < 5e-3, "{bf}");
    assert!((v["stats"]["n_eff"].as_f64().unwrap() - 22.4556).abs() < 1e-4);
    assert_eq!(v["stats"]["nu"].as_f64().unwrap(), 88.0);
}

#[test]
fn usage_errors_exit_with_2() {
    for args in [
        &["bf", "--t", "2"][..],
        &["bf", "--n", "100"],
        &["bf", "--t", "2", "--n", "100", "--variant", "peri", "--kappa0", "0"],
        &["bf", "--t", "2", "--n", "100", "--variant", "nope"],
        &["asymptotics", "--mu", "0", "--sigma", "-1"],
        &["simulate", "--out", "x", "--ngrid", "5:1:1"],
        &["laplace-verify", "--model", "beta-bernoulli", "--n", "10", "--k", "0"],
    ] {
        let out = perinull(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn asymptotics_reports_chi_square_regime_at_zero() {
    let v = json(&perinull(&["asymptotics", "--mu", "0", "--n", "1000", "--json"]));
    assert_eq!(v["regime"], "second-order-chi-square");
    assert!((v["limit_log_bf"].as_f64().unwrap() - (-3.2215)).abs() < 1e-3);
}

#[test]
fn asymptotics_grid_marks_invalid_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.csv");
    let out = perinull(&["asymptotics", "--mu", "0", "--grid", "150,200", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "n,limit,bias,mean,q025,q975,valid");
    assert!(rows[1].ends_with(",false"), "{}", rows[1]);
    assert!(rows[2].ends_with(",true"), "{}", rows[2]);
    assert!(dir.path().join("a.manifest.json").exists());
}

fn simulate_into(dir: &Path, seed: &str) -> String {
    let out = perinull(&[
        "simulate", "--mu", "0.167", "--ngrid", "50,100", "--reps", "8", "--seed", seed, "--out",
        dir.to_str().unwrap(), "--emit-plotscript",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read_to_string(dir.join("curves.csv")).unwrap()
}

#[test]
fn simulate_is_deterministic_and_writes_manifest() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = simulate_into(a.path(), "42");
    assert_eq!(first, simulate_into(b.path(), "42"));
    assert_ne!(first, simulate_into(c.path(), "43"));
    assert!(first.starts_with("variant,n,mean,q025,q975,source\n"));
    assert!(first.contains(",asymptotic"));

    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["seed"], 42);
    assert_eq!(m["parameters"]["reps"], 8);
    assert!(m["version"].is_string() && m["timestamp"].is_string());
    assert!(a.path().join("curves.gp").exists());
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_perinull"))
        .args(["simulate", "--ngrid", "50", "--reps", "2", "--variants", "point", "--out"])
        .arg(dir.path())
        .env("PERINULL_SEED", "9")
        .output()
        .unwrap();
    assert!(out.status.success());
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 9);
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# defaults\nn = 100\nvariant = peri\njson = true\n").unwrap();
    let v = json(&perinull(&["--config", cfg.to_str().unwrap(), "bf", "--t", "2"]));
    assert_eq!(v["variant"], "peri");
    // the command line wins over the file
    let v = json(&perinull(&["--config", cfg.to_str().unwrap(), "bf", "--t", "2", "--variant", "point"]));
    assert_eq!(v["variant"], "point");
}

#[test]
fn laplace_verify_improves_with_each_term() {
    let v = json(&perinull(&["laplace-verify", "--model", "ttest-peri", "--n", "200", "--mean", "0.1", "--kappa0", "0.5", "--json"]));
    let errs: Vec<f64> = v["levels"].as_array().unwrap().iter().map(|l| l["abs_error"].as_f64().unwrap()).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(v["closed_form"]["c1_peri"].is_number());
}
