use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hqs(args: &[&str]) -> Output {
    hqs_in(args, None)
}

fn hqs_in(args: &[&str], config_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hqs"));
    cmd.args(args).env_remove("HQS_CONFIG_DIR");
    if let Some(dir) = config_dir {
        cmd.env("HQS_CONFIG_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = hqs(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn table1() -> Value {
    let out = hqs(&["simulate"]);
    assert!(out.status.success());
    serde_json::from_slice::<Value>(&out.stdout).unwrap()["config"].clone()
}

fn write_config(dir: &Path, name: &str, config: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn missing_device_key_is_a_user_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = table1();
    cfg["device"].as_object_mut().unwrap().remove("T1_ge");
    let path = write_config(dir.path(), "broken.json", &cfg);
    let out = hqs(&["--config", &path, "simulate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("T1_ge"), "{}", stderr(&out));
}

#[test]
fn empty_sweep_is_a_user_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = table1();
    cfg["sweep"]["values"] = Value::Array(vec![]);
    let path = write_config(dir.path(), "empty.json", &cfg);
    let out = hqs(&["--config", &path, "sweep"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("values"), "{}", stderr(&out));
}

#[test]
fn unknown_config_lists_bundled_names() {
    let out = hqs(&["--config", "nope.json", "simulate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("table1.json"));
}

#[test]
fn malformed_stats_row_reports_row_number() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("records.csv");
    std::fs::write(&csv, "label,mean,variance,n_shots\na,1e-5,1e-9,10\nb,oops,1e-9,10\n").unwrap();
    let out = hqs(&["stats", "--mode", "weighted-mean", "--input", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("row 3"), "{}", stderr(&out));
}

#[test]
fn table1_simulation_lands_near_the_measured_population() {
    let v = json(&["simulate", "--population", "1.9e-5"]);
    let p = v["result"]["outcome"]["contrast"]["population"].as_f64().unwrap();
    assert!(p > 6.7e-5 / 2.0 && p < 6.7e-5 * 2.0, "{p:e}");
    assert_eq!(v["tool"], "hqs");
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn ideal_simulation_recovers_the_input() {
    let v = json(&["--config", "ideal.json", "simulate"]);
    let p = v["result"]["outcome"]["contrast"]["population"].as_f64().unwrap();
    assert!((p - 1e-4).abs() < 1e-7, "{p:e}");
}

#[test]
fn bound_channels() {
    let gw = json(&["bound", "--channel", "gw", "--population", "6.7e-5"]);
    let h0 = gw["result"]["h0"].as_f64().unwrap();
    assert!((h0 / 5.5e-18 - 1.0).abs() < 0.02, "{h0:e}");

    let dp = json(&["bound", "--channel", "dp", "--population", "6.7e-5", "--e33", "2.0"]);
    let k = dp["result"]["kappa"].as_f64().unwrap();
    assert!((k / 8.8e-10 - 1.0).abs() < 0.03, "{k:e}");

    let csl = json(&["bound", "--channel", "csl", "--population", "6.7e-5"]);
    let lambda = csl["result"]["lambda_csl"].as_f64().unwrap();
    assert!((lambda / 5.7e-8 - 1.0).abs() < 0.03, "{lambda:e}");
}

#[test]
fn out_of_range_e33_warns_but_runs() {
    let v = json(&["bound", "--channel", "dp", "--population", "6.7e-5", "--e33", "5.0"]);
    assert!(!v["result"]["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn current_projection_matches_direct_bounds() {
    let p = json(&["project", "--scenario", "current"]);
    let population = p["result"]["projection"]["scenario"]["population"].as_f64().unwrap();
    let pop = population.to_string();
    let gw = json(&["bound", "--channel", "gw", "--population", &pop]);
    assert_eq!(p["result"]["projection"]["gw"]["h0"], gw["result"]["h0"]);
    let e33 = p["result"]["projection"]["dp"]["e33_used"].as_f64().unwrap().to_string();
    let dp = json(&["bound", "--channel", "dp", "--population", &pop, "--e33", &e33]);
    assert_eq!(p["result"]["projection"]["dp"]["kappa"], dp["result"]["kappa"]);
}

#[test]
fn mhz_projection_skips_dark_photon() {
    let v = json(&["project", "--scenario", "mhz_device", "--channel", "dp"]);
    let skipped = v["result"]["skipped_channels"].to_string();
    assert!(skipped.contains("mhz_device"), "{skipped}");
    assert!(v["result"]["projection"]["dp"].is_null());
}

#[test]
fn config_dir_lookup() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = table1();
    cfg["simulate"]["true_population"] = 2.5e-5.into();
    write_config(dir.path(), "mine.json", &cfg);
    let out = hqs_in(&["--config", "mine.json", "simulate"], Some(dir.path()));
    assert!(out.status.success(), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["simulate"]["true_population"].as_f64(), Some(2.5e-5));
}

#[test]
fn verify_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sweep.csv");
    let out = hqs(&["sweep", "--out", out_path.to_str().unwrap(), "--verify"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("verify: ok"));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("# config_hash: "));
    assert!(text.contains("parameter,a_sig,a_ref,population"));
}

#[test]
fn sweep_output_ignores_thread_count() {
    let a = hqs(&["sweep", "--jobs", "1"]);
    let b = hqs(&["sweep", "--jobs", "3"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn hash_tracks_options() {
    let a = json(&["bound", "--channel", "gw", "--population", "6.7e-5"]);
    let b = json(&["bound", "--channel", "gw", "--population", "6.8e-5"]);
    assert_ne!(a["config_hash"], b["config_hash"]);
}

#[test]
fn stats_modes() {
    let blocks = json(&["stats", "--mode", "blocks"]);
    let slope = blocks["result"]["sem_slope"].as_f64().unwrap();
    assert!((slope + 0.5).abs() < 0.02, "{slope}");

    let fit = json(&["stats", "--mode", "fit-bose", "--input", "synthetic_thermometry.csv"]);
    let offset = fit["result"]["fit"]["offset"].as_f64().unwrap();
    let sigma = fit["result"]["fit"]["offset_sigma"].as_f64().unwrap();
    assert!((offset - 3e-5).abs() < 3.0 * sigma, "{offset:e} ± {sigma:e}");

    let wm = json(&["stats", "--mode", "weighted-mean", "--input", "records.csv"]);
    assert!(wm["result"]["variance"].as_f64().unwrap() > 0.0);
}

#[test]
fn blocks_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sem.csv");
    let out = hqs(&["stats", "--mode", "blocks", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().any(|l| l == "k,sem,reference"));
}
