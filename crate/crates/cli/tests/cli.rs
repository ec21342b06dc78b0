use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gmla(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmla"))
        .args(["--out", dir.to_str().unwrap()])
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn wf_reports_directions_and_polar_side_file() {
    let d = tempfile::tempdir().unwrap();
    let out = gmla(d.path(), &["wf", "--signal", "delta", "--plot", "polar"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(d.path(), "wf.json");
    assert_eq!(r["status"], "ok");
    assert_eq!(r["schema_version"], "1.0.0");
    let dirs: Vec<f64> = serde_json::from_value(r["payload"]["in_directions_deg"].clone()).unwrap();
    assert!(dirs.contains(&90.0) && dirs.contains(&270.0));
    let csv = std::fs::read_to_string(d.path().join("wf_polar.csv")).unwrap();
    assert!(csv.starts_with("theta,gamma_g,s_star,flag"));
}

#[test]
fn syntax_errors_and_bad_plot_kinds_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let out = gmla(d.path(), &["wf", "--signal", "planewave("]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("offset 10"));
    assert_eq!(gmla(d.path(), &["stft", "--signal", "delta", "--plot", "polar"]).status.code(), Some(2));
    assert_eq!(gmla(d.path(), &["wf", "--signal", "delta", "--plot", "heatmap"]).status.code(), Some(2));
    assert_eq!(gmla(d.path(), &["--n", "100", "stft", "--signal", "delta"]).status.code(), Some(2));
    assert_eq!(gmla(d.path(), &["check", "moyal"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_write_an_error_report_and_exit_1() {
    let d = tempfile::tempdir().unwrap();
    let out = gmla(d.path(), &["stft", "--signal", "file(\"/nonexistent/gmla.csv\")"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let r = report(d.path(), "stft.json");
    assert_eq!(r["status"], "error");
    assert!(!r["error"]["message"].as_str().unwrap().is_empty());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    std::fs::write(&cfg, "# grid\nn = 64\nhalf-width = 8\nsignal = \"hermite(2)\" # inline\n").unwrap();
    let out = gmla(d.path(), &["--config", cfg.to_str().unwrap(), "--n", "128", "qnorm", "--s", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(d.path(), "qnorm.json");
    assert_eq!(r["config"]["n"], "128");
    assert_eq!(r["config"]["half_width"], "8");
    assert_eq!(r["config"]["signal"], "hermite(2)");
    assert_eq!(r["payload"]["grid"]["n"], 128);
}

#[test]
fn checks_pass_and_reports_are_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let mut payloads = Vec::new();
    for _ in 0..2 {
        let out = gmla(d.path(), &["check", "microlocal", "--signal", "planewave(5) + delta"]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let mut r = report(d.path(), "check-microlocal.json");
        assert_eq!(r["status"], "pass");
        r.as_object_mut().unwrap().remove("timing");
        payloads.push(serde_json::to_string(&r).unwrap());
    }
    assert_eq!(payloads[0], payloads[1]);
}

#[test]
fn op_output_reads_back_as_a_file_signal() {
    let d = tempfile::tempdir().unwrap();
    let out = gmla(d.path(), &["op", "--symbol", "x", "--signal", "hermite(1)"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = d.path().join("op_output.csv");
    let sig = format!("file(\"{}\")", csv.display());
    let out = gmla(d.path(), &["qnorm", "--signal", &sig, "--s", "0"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    // ||x h_1|| = sqrt(3/2); the s = 0 norm carries a factor sqrt(2 pi)
    let v = report(d.path(), "qnorm.json")["payload"]["value"].as_f64().unwrap();
    assert!((v - 1.5f64.sqrt() * (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-6, "{v}");
}

#[test]
fn symcheck_and_parametrix_pass_for_the_bracket() {
    let d = tempfile::tempdir().unwrap();
    let out = gmla(d.path(), &["symcheck", "--symbol", "bracket(2)"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(report(d.path(), "symcheck.json")["payload"]["char_monotone"], true);
    let out = gmla(d.path(), &["parametrix", "--terms", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(report(d.path(), "parametrix.json")["status"], "pass");
}
