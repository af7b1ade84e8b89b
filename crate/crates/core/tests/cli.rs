use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("hsym-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn hsym(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsym"))
        .current_dir(dir)
        .env_remove("HSYM_OUTPUT_DIR")
        .args(args)
        .output()
        .expect("hsym runs")
}

fn report(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn cc_distance_to_the_center() {
    let d = scratch("cc");
    let r = report(&hsym(&d, &["cc-distance", "--target", "0,0,3.14159", "--n", "1"]));
    assert_eq!(r["schema"], "hsym-report/1");
    assert_eq!(r["result"]["method"], "ClosedForm");
    let len = r["result"]["length"].as_f64().unwrap();
    assert!((len - std::f64::consts::TAU).abs() < 1e-4, "{len}");
    assert!(d.join("hsym-out/cc-distance.json").exists());
    let csv = std::fs::read_to_string(d.join("hsym-out/geodesic.csv")).unwrap();
    assert!(csv.starts_with("t,x1,x2,xbar\n"));
    assert_eq!(csv.lines().count(), 66);
}

#[test]
fn quarter_turn_of_the_oscillator() {
    let d = scratch("flow");
    let r = report(&hsym(&d, &["flow", "--ham", "harmonic", "--T", "1.5707963267948966", "--steps", "1000"]));
    let end: Vec<f64> = r["result"]["end"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    // ẋ = −J∇H turns (1,0) clockwise
    assert!(end[0].abs() < 1e-8 && (end[1] + 1.0).abs() < 1e-8, "{end:?}");
    assert_eq!(r["scenario"]["params"]["steps"], 1000);
    assert_eq!(r["scenario"]["seed"], 0);
}

#[test]
fn config_defaults_are_echoed() {
    let d = scratch("config");
    std::fs::write(d.join("flow.toml"), "command = \"flow\"\n\n[params]\nham = \"harmonic\"\nT = 0.25\n").unwrap();
    let r = report(&hsym(&d, &["run", "flow.toml"]));
    assert_eq!(r["scenario"]["params"]["steps"], 2048);
    assert_eq!(r["scenario"]["seed"], 0);
    assert_eq!(r["scenario"]["command"], "flow");
}

#[test]
fn validation_failures_exit_with_2() {
    let d = scratch("invalid");
    std::fs::write(d.join("bad.toml"), "command = \"flow\"\n[params]\nstepz = 10\n").unwrap();
    let out = hsym(&d, &["run", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("stepz") && err.contains("line 3"), "{err}");
    assert_eq!(hsym(&d, &["flow", "--stepz", "10"]).status.code(), Some(2));
    assert_eq!(hsym(&d, &["cc-distance"]).status.code(), Some(2));
    assert_eq!(hsym(&d, &["flow", "--ham", "nonsense"]).status.code(), Some(2));
    assert_eq!(hsym(&d, &["cc-distance", "--target", "1,2"]).status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_3() {
    let d = scratch("numerical");
    // nothing in a one-member family reaches a flow pair generated by a different field
    let out = hsym(&d, &["ham-dist", "--family", "0.5", "--steps_per_unit", "128"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[ham]"));
}

#[test]
fn output_dir_override_from_environment() {
    let d = scratch("env");
    let out = Command::new(env!("CARGO_BIN_EXE_hsym"))
        .current_dir(&d)
        .env("HSYM_OUTPUT_DIR", "from-env")
        .args(["lift-curve", "--samples", "100"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(d.join("from-env/lift-curve.json").exists());
    assert!(d.join("from-env/lift_curve.csv").exists());
}

#[test]
fn reports_are_reproducible() {
    let d = scratch("repro");
    let args = ["invariants", "--samples", "5000", "--diameter_samples", "40", "--seed", "9"];
    let a = hsym(&d, &args);
    let b = hsym(&d, &args);
    assert_eq!(report(&a), report(&b));
    assert_eq!(a.stdout, b.stdout);
    let c = hsym(&d, &["invariants", "--samples", "5000", "--diameter_samples", "40", "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn tabulated_hamiltonian() {
    let d = scratch("table");
    let mut csv = String::from("q,p,H\n");
    let k = 20;
    for i in 0..=k {
        for j in 0..=k {
            let (q, p) = (-2.0 + 4.0 * i as f64 / k as f64, -2.0 + 4.0 * j as f64 / k as f64);
            let h = (4.0 - q * q) * (4.0 - p * p) / 16.0;
            csv.push_str(&format!("{q},{p},{h}\n"));
        }
    }
    std::fs::write(d.join("h.csv"), csv).unwrap();
    let r = report(&hsym(&d, &["hofer-length", "--ham", "table", "--table", "h.csv", "--grid", "21"]));
    let len = r["result"]["length"].as_f64().unwrap();
    assert!((len - 1.0).abs() < 1e-12, "{len}");
    let r = report(&hsym(&d, &["flow", "--ham", "table", "--table", "h.csv", "--T", "0.5", "--point", "0.1,0.2"]));
    assert_eq!(r["result"]["end"].as_array().unwrap().len(), 2);
}

#[test]
fn lift_commands_write_tables() {
    let d = scratch("lift");
    let r = report(&hsym(&d, &["lift-symp", "--map", "shear", "--strength", "3", "--grid", "5"]));
    assert!(r["result"]["conditions"]["max_cc2"].as_f64().unwrap() < 1e-6);
    let csv = std::fs::read_to_string(d.join("hsym-out/lift_symp.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x1,x2,F"));
    // F(q, p) = q³/2 at the corner (1, 1)
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((last[2] - 0.5).abs() < 1e-12);
    let r = report(&hsym(&d, &["lift-curve", "--curve", "ellipse", "--aspect", "0.5"]));
    let gain = r["result"]["gain"].as_f64().unwrap();
    assert!((gain - std::f64::consts::PI / 2.0).abs() < 1e-5);
}
