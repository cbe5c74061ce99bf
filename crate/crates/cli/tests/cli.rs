use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn interlace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_interlace")).args(args).env_remove("INTERLACE_OUT_DIR").output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("interlace-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn iso_example_matches_hand_values() {
    let out = interlace(&["verify", "--identity", "iso", "--n", "1", "--alpha", "1.0", "--d", "1", "--kappa", "1.0", "--K", "0", "--order", "2", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["command"], "verify");
    assert_eq!(r["pass"], true);
    let u0 = 1.0 / 3f64.sqrt();
    let want = [0.5 * u0 + 1.0, 0.75 * u0 * u0 + 3.0 * u0 + 1.0];
    let cases = r["results"][0]["cases"].as_array().unwrap();
    let plain: Vec<&Value> = cases.iter().filter(|c| c["form"] == "plain").collect();
    assert_eq!(plain.len(), 2);
    for (c, w) in plain.iter().zip(want) {
        let (l, rr) = (c["exact_lhs"].as_f64().unwrap(), c["exact_rhs"].as_f64().unwrap());
        assert!((l - w).abs() < 1e-12 && (rr - w).abs() < 1e-12, "{c}");
    }
}

#[test]
fn rho_example_passes() {
    assert_eq!(interlace(&["verify", "--identity", "rho", "--nmax", "6"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_2() {
    let cases: &[&[&str]] = &[
        &["green", "--bogus"],
        &["frobnicate"],
        &["verify", "--identity", "nonsense"],
        &["soup", "--K", "0"],
        &["soup", "--K", "0.5", "--seed", "1"],
        &["equilibrium", "--d", "2", "--K", "0"],
        &["green", "--kappa", "-1"],
        &["soup", "--alpha", "-0.5", "--seed", "1"],
        &["asymptotics", "--exponent", "levy"],
    ];
    for args in cases {
        let out = interlace(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
    let out = interlace(&["green", "--bogus"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--bogus"));
}

#[test]
fn tolerance_failure_exits_1() {
    let out = interlace(&["green", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["pass"], false);
}

#[test]
fn module_errors_are_embedded_verbatim() {
    let out = interlace(&["moments", "--points", "0;0;0;0;0;0;0;0;0"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    let msg = r["results"][0]["error"].as_str().unwrap();
    assert!(msg.contains("exceeds the bound 8"), "{msg}");
}

#[test]
fn reports_are_reproducible() {
    let args = ["soup", "--d", "2", "--kappa", "0.5", "--K", "0,0;1,0", "--alpha", "0.8", "--seed", "11", "--samples", "3000"];
    let a = interlace(&args);
    let b = interlace(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let r = report(&a);
    assert_eq!(r["config"]["seed"], 11);
    assert_eq!(r["results"][0]["soups"][0]["seed"]["master"], 11);
    for key in ["command", "config", "results", "pass", "versions"] {
        assert!(r.get(key).is_some(), "{key}");
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = scratch("config");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "# walk\nd = 2\nkappa = 2.0\nradius = 1\n").unwrap();
    let out = interlace(&["green", "--config", cfg.to_str().unwrap(), "--kappa", "0.75"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["config"]["walk"]["d"], 2);
    assert_eq!(r["config"]["walk"]["kappa"], 0.75);
    assert_eq!(r["config"]["radius"], 1);

    std::fs::write(&cfg, "nosuchflag = 3\n").unwrap();
    assert_eq!(interlace(&["green", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn outputs_go_to_env_directory() {
    let dir = scratch("env");
    let out = Command::new(env!("CARGO_BIN_EXE_interlace"))
        .args(["asymptotics", "--kmax", "2", "--eps-grid", "0.125,0.0625"])
        .env("INTERLACE_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("asymptotics.csv")).unwrap();
    assert!(csv.starts_with("eps,h"));
    assert_eq!(csv.lines().count(), 3);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("asymptotics.json")).unwrap()).unwrap();
    assert_eq!(saved, report(&out));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn gff_and_equilibrium_write_csv() {
    let dir = scratch("csv");
    let d = dir.to_str().unwrap();
    assert_eq!(interlace(&["gff", "--d", "2", "--seed", "5", "--samples", "5000", "--out-dir", d]).status.code(), Some(0));
    let g = std::fs::read_to_string(dir.join("gff_seed5.csv")).unwrap();
    assert_eq!(g.lines().next(), Some("x0,x1,g"));
    assert_eq!(g.lines().count(), 10);
    let out = interlace(&["equilibrium", "--d", "2", "--kappa", "0.5", "--K", "0,0;1,0", "--window", "1,0;3,0", "--out-dir", d]);
    assert_eq!(out.status.code(), Some(0));
    let hit = &report(&out)["results"][0]["hitting"];
    assert!((hit[0]["probability"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!(hit[1]["probability"].as_f64().unwrap() < 1.0);
    assert!(dir.join("equilibrium.csv").exists());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn every_identity_runs() {
    for id in ["rilt", "wick", "coefficients", "multinomial", "pairing", "crosscheck"] {
        let out = interlace(&["verify", "--identity", id, "--K", "0;1"]);
        assert_eq!(out.status.code(), Some(0), "{id}: {}", String::from_utf8_lossy(&out.stdout));
    }
    let out = interlace(&["verify", "--identity", "decomposition", "--n", "4", "--alpha", "2", "--seed", "3", "--samples", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let out = interlace(&["verify", "--identity", "iso", "--n", "2", "--K", "0;1", "--seed", "9", "--samples", "20000"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"].as_array().unwrap().len(), 2);
}

#[test]
fn moments_match_monte_carlo() {
    let out = interlace(&["moments", "--d", "2", "--kappa", "0.5", "--points", "0,0;1,0", "--alpha", "0.6", "--seed", "2", "--samples", "40000"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &report(&out)["results"][0];
    let c: Vec<f64> = r["alpha_coefficients"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(c.len(), 3);
    assert_eq!(c[2], 1.0);
}

#[test]
fn selftest_aggregates_criteria() {
    let out = interlace(&["selftest", "--samples", "20000", "--soups", "20"]);
    let r = report(&out);
    let criteria: Vec<&Value> = r["results"].as_array().unwrap().iter().filter(|v| v.get("id").is_some()).collect();
    assert_eq!(criteria.len(), 13);
    let all = criteria.iter().all(|c| c["pass"] == true);
    assert_eq!(r["pass"], all);
    assert_eq!(out.status.code(), Some(if all { 0 } else { 1 }));
}
