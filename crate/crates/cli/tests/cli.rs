//! Black-box tests of the `conestab` binary: configs, formats and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL_QUADRATURE: &str = "[quadrature]\nradial_nodes = 32\nangular_nodes = 12\nbox_nodes_per_axis = 32\n";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conestab")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn parse_real(v: &Value) -> f64 {
    v.as_str().expect("reals are strings").parse().unwrap()
}

#[test]
fn threshold_json_and_csv_agree_bitwise() {
    let j = run(&["threshold", "--from", "3", "--to", "12"]);
    assert_eq!(code(&j), 0);
    let c = run(&["threshold", "--from", "3", "--to", "12", "--format", "csv"]);
    assert_eq!(code(&c), 0);
    let results = json(&j)["results"].as_array().unwrap().clone();
    let mut reader = csv::Reader::from_reader(c.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(headers.iter().collect::<Vec<_>>(), ["n", "k_n", "lambda_star", "aperture", "residual"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), results.len());
    for (row, obj) in rows.iter().zip(&results) {
        assert_eq!(row[0].parse::<u64>().unwrap(), obj["n"].as_u64().unwrap());
        for (i, key) in ["k_n", "lambda_star", "aperture", "residual"].iter().enumerate() {
            let from_csv: f64 = row[i + 1].parse().unwrap();
            assert_eq!(from_csv.to_bits(), parse_real(&obj[*key]).to_bits(), "{key}");
        }
    }
}

#[test]
fn threshold_reports_known_values() {
    let o = run(&["threshold", "--n", "4"]);
    let r = &json(&o)["results"][0];
    assert!((parse_real(&r["k_n"]) - 2.0 / std::f64::consts::PI).abs() < 1e-12);
    assert!((parse_real(&r["lambda_star"]) - 0.3496).abs() < 1e-4);
}

#[test]
fn reversed_threshold_range_is_empty() {
    let o = run(&["threshold", "--from", "5", "--to", "4"]);
    assert_eq!(code(&o), 0);
    assert!(json(&o)["results"].as_array().unwrap().is_empty());
    let o = run(&["threshold", "--from", "5", "--to", "4", "--format", "csv"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "n,k_n,lambda_star,aperture,residual\n");
}

#[test]
fn threshold_below_three_is_invalid() {
    let o = run(&["threshold", "--n", "2"]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["error"]["kind"], "invalid_config");
    assert_eq!(json(&o)["error"]["exit_code"], 2);
}

#[test]
fn missing_parameters_are_invalid() {
    assert_eq!(code(&run(&["variation", "--lambda", "0.1"])), 2);
    assert_eq!(code(&run(&["variation", "--n", "3"])), 2);
    assert_eq!(code(&run(&["variation", "--n", "3", "--lambda", "-1"])), 2);
    assert_eq!(code(&run(&["variation", "--n", "3", "--lambda", "0.1", "--levels", "2"])), 2);
}

#[test]
fn unknown_config_keys_are_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "n = 3\nlamda = 0.1\n");
    let o = run(&["variation", "--config", &cfg]);
    assert_eq!(code(&o), 2);
    assert!(json(&o)["error"]["message"].as_str().unwrap().contains("lamda"));
    let cfg = write_config(dir.path(), "missing.toml", "");
    assert_eq!(code(&run(&["variation", "--config", &format!("{cfg}.nope")])), 2);
}

#[test]
fn zero_field_gives_zero_variations() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "n = 3\nlambda = 0.1\nlevels = 4\n{SMALL_QUADRATURE}\n[[trials]]\namplitude = 0.0\n\
         family = {{ kind = \"shifted_bump\", center = [0.0, 0.0, 1.0], radius = 1.0, exponent = 2.0 }}\n"
    );
    let cfg = write_config(dir.path(), "zero.toml", &text);
    let o = run(&["variation", "--config", &cfg]);
    assert_eq!(code(&o), 0);
    let r = &json(&o)["results"][0];
    for key in ["closed_form", "dirichlet_term", "boundary_term"] {
        assert_eq!(parse_real(&r[key]), 0.0, "{key}");
    }
    assert_eq!(parse_real(&r["first_variation"]["extrapolated"]), 0.0);
    assert_eq!(parse_real(&r["second_variation_fd"]["extrapolated"]), 0.0);
    assert_eq!(r["status"], "ok");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &format!("n = 3\nlambda = 0.1\nlevels = 4\n{SMALL_QUADRATURE}"));
    let o = run(&["variation", "--config", &cfg, "--lambda", "0.2"]);
    let v = json(&o);
    assert_eq!(parse_real(&v["config"]["lambda"]), 0.2);
    assert_eq!(v["config"]["n"], 3);
    assert_eq!(parse_real(&v["results"][0]["lambda"]), 0.2);
}

#[test]
fn two_dimensional_vertex_field_is_divergent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n2.toml", &format!("n = 2\nlambda = 0.5\nlevels = 4\n{SMALL_QUADRATURE}"));
    let o = run(&["variation", "--config", &cfg]);
    assert_eq!(code(&o), 5);
    let r = &json(&o)["results"][0];
    assert_eq!(r["status"], "divergent");
    assert_eq!(r["closed_form"], "-inf");
    assert!(r["divergence"]["log_slope"].is_string());
}

#[test]
fn witness_reports_unstable() {
    let o = run(&["witness-n2", "--lambda", "1"]);
    assert_eq!(code(&o), 5);
    let r = &json(&o)["results"][0];
    assert_eq!(r["regime"], "unstable");
    assert!((parse_real(&r["log_slope"]) + 1.0).abs() < 0.1);
    assert_eq!(code(&run(&["witness-n2", "--lambda", "1", "--n", "3"])), 2);
}

#[test]
fn sweep_regimes_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.toml", &format!("n = 3\nbattery_size = 3\n{SMALL_QUADRATURE}"));
    let o = run(&["sweep", "--config", &cfg, "--lambda", "0.08"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["results"][0]["regime"], "proven_stable");
    let o = run(&["sweep", "--config", &cfg, "--lambda", "100"]);
    assert_eq!(code(&o), 5);
    assert_eq!(json(&o)["results"][0]["regime"], "unstable");
    assert_eq!(code(&run(&["sweep", "--config", &cfg, "--lambda", "0.1", "--n", "2"])), 2);
}

#[test]
fn corrupted_closed_form_fails_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "v.toml",
        "[verify]\nsamples = 300\npoint_samples = 40\ncorrupt_closed_form = true\n",
    );
    let o = run(&["verify", "--config", &cfg]);
    assert_eq!(code(&o), 4);
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("jacobian_identity"), "{stderr}");
    let report = json(&o);
    let failing: Vec<&str> = report["results"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["passed"] == false)
        .map(|r| r["suite"].as_str().unwrap())
        .collect();
    assert_eq!(failing, ["jacobian_identity", "jacobian_flow"]);
}

#[test]
fn zero_samples_is_invalid_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "z.toml", "[verify]\nsamples = 0\n");
    let o = run(&["verify", "--config", &cfg]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["error"]["kind"], "invalid_config");
}

#[test]
fn output_file_and_suite_versions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let o = run(&["threshold", "--n", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let versions = v["suite_versions"].as_object().unwrap();
    assert_eq!(versions.len(), 8);
    assert!(versions.values().all(|s| s == "1"));
}

#[test]
fn csv_output_for_each_command() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &format!("n = 3\nlambda = 0.1\nlevels = 4\n{SMALL_QUADRATURE}"));
    let o = run(&["variation", "--config", &cfg, "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("n,lambda,trial_id,label,closed_form,"));
    assert_eq!(text.lines().count(), 2);
    let o = run(&["witness-n2", "--lambda", "1", "--format", "csv"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 6);
}
