//! Black-box tests of the `eitsim` binary.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn eitsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eitsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn spectrum_preset_is_deterministic() {
    let a = eitsim(&["spectrum", "--preset", "fig4b"]);
    let b = eitsim(&["spectrum", "--preset", "fig4b"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "reruns must be byte-identical");
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "omega,re_chi,im_chi,re_n,im_n,vg_over_c");
    assert_eq!(text.lines().count(), 3002);
    assert!(!text.contains('\r'), "LF endings only");
}

#[test]
fn spectrum_csv_sidecar_summary() {
    let dir = std::env::temp_dir().join("eitsim-cli-test-sidecar");
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("fig5b.csv");
    let out = eitsim(&[
        "spectrum",
        "--preset",
        "fig5b",
        "--output",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let data = std::fs::read_to_string(&csv).unwrap();
    assert!(data.starts_with("omega,"));
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.join("fig5b.csv.summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["peaks"].as_array().unwrap().len(), 3);
    assert_eq!(summary["windows"].as_array().unwrap().len(), 2);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn spectrum_json_round_trips_config() {
    let out = eitsim(&["spectrum", "--preset", "fig6", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["points"].as_array().unwrap().len(), 3001);
    assert_eq!(doc["peaks"].as_array().unwrap().len(), 2);
    // The embedded config reparses to the same canonical digest.
    let cfg_text = serde_json::to_string(&doc["config"]).unwrap();
    let reparsed = eitsim_config_digest(&cfg_text);
    let preset = stdout(&eitsim(&["config", "--preset", "fig6"]));
    assert_eq!(reparsed.trim(), preset.trim());
}

fn eitsim_config_digest(config_json: &str) -> String {
    let mut child = Command::new(env!("CARGO_BIN_EXE_eitsim"))
        .args(["config", "--config", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(config_json.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn set_overrides_change_the_scan() {
    let out = eitsim(&[
        "spectrum",
        "--preset",
        "fig4a",
        "--set",
        "scan.points=5",
        "--set",
        "scan.omega_max=1.5",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[5].starts_with("1.5,"));
}

#[test]
fn corrupted_config_exits_two() {
    let dir = std::env::temp_dir().join("eitsim-cli-test-badcfg");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    let preset = stdout(&eitsim(&["config", "--preset", "fig4b"]));
    let bad = preset.replace("\"omega_min\":0.5", "\"omega_min\":3.5");
    assert_ne!(preset, bad);
    std::fs::write(&path, bad).unwrap();
    let out = eitsim(&["spectrum", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_flag_exits_one() {
    let out = eitsim(&["spectrum", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn modes_fig5b_reports_three_frequencies() {
    let out = eitsim(&["modes", "--preset", "fig5b"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let freqs: Vec<f64> = doc["frequencies"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(freqs.len(), 3);
    for (f, e) in freqs.iter().zip([0.915, 1.051, 1.519]) {
        assert!((f - e).abs() < 1.0e-3, "{f} vs {e}");
    }
    assert!(doc["stable"].as_bool().unwrap());
}

#[test]
fn modes_degenerate_reports_dark_mode() {
    let out = eitsim(&["modes", "--preset", "fig6"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["frequencies"].as_array().unwrap().len(), 2);
    assert_eq!(doc["dark_mode"].as_f64(), Some(1.0));
}

#[test]
fn validate_bosonization_passes() {
    let out = eitsim(&["validate", "--preset", "fig5b", "--check", "bosonization"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc["pass"].as_bool().unwrap());
}

#[test]
fn validate_timedomain_single_passes() {
    let out = eitsim(&["validate", "--preset", "fig4b", "--check", "timedomain"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc["pass"].as_bool().unwrap());
    let results = doc["results"].as_array().unwrap();
    assert_eq!(results.len(), 3); // two peaks + one window minimum
    for r in results {
        assert!(r["residual"].as_f64().unwrap() <= 1.0e-3);
    }
}
