use std::fs;
use std::process::{Command, Output};

use cramer_depth::dist::radial_exp_marginal_conjugate;
use cramer_depth::funcstats::{BatteryReport, CheckStatus, StatReport};
use cramer_depth::polytope::ThresholdReport;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cramer-depth"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gaussian_stats_json() {
    let o = run(&["stats", "--dist", r#"{"family":"gaussian","dim":1}"#]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: StatReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((rep.exp_neg_cramer - 0.5f64.sqrt()).abs() < 1e-7);
    assert!(rep.e_cramer <= rep.e_omega);
}

#[test]
fn laplace_verify_passes() {
    let o = run(&["verify", "--dist", r#"{"family":"laplace"}"#]);
    assert_eq!(o.status.code(), Some(0));
    let rep: BatteryReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rep.get("separability_bound").unwrap().status, CheckStatus::Pass);
}

#[test]
fn radial_exp_conjugate_csv() {
    let o = run(&["conjugate", "--dist", r#"{"family":"radial_exp","dim":3}"#, "--grid", "0:5:11", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rd.headers().unwrap(), vec!["x", "cramer", "tilt"]);
    let mut rows = 0;
    for rec in rd.records() {
        let rec = rec.unwrap();
        let x: f64 = rec[0].parse().unwrap();
        let v: f64 = rec[1].parse().unwrap();
        let want = radial_exp_marginal_conjugate(3, x);
        assert!((v - want).abs() < 1e-8 * (1.0 + want), "x={x}");
        // 17 significant digits
        if x != 0.0 {
            assert!(rec[0].contains('e') && rec[0].split('e').next().unwrap().len() >= 18);
        }
        rows += 1;
    }
    assert_eq!(rows, 11);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["stats"]).status.code(), Some(2));
    assert_eq!(run(&["stats", "--dist", r#"{"family":"laplace","bogus":1}"#]).status.code(), Some(2));
    assert_eq!(run(&["stats", "--dist", r#"{"family":"nope"}"#]).status.code(), Some(2));
    assert_eq!(run(&["stats", "--dist", "/no/such/file.json"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["conjugate", "--dist", r#"{"family":"laplace"}"#, "--grid", "0:1"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--dist", r#"{"family":"gaussian","dim":2}"#]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_cramer-depth"))
        .args(["report", "--k", "2"])
        .env("CRAMER_DEPTH_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spec_file_with_relative_csv() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("dens.csv"), "x,density\n-2,0.05\n0,0.5\n2,0.05\n").unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"family":"grid","params":{"csv":"dens.csv"}}"#).unwrap();
    let o = run(&["depth", "--dist", spec.to_str().unwrap(), "--grid", "0:1:3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v[0]["q"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn scan_writes_json_and_csv_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.json");
    fs::write(
        &cfg,
        r#"{"dist":{"family":"uniform","params":{"a":-1,"b":1},"dim":2},"n":2,"N_list":[],"trials":20,"probe_count":20,"delta":0.2,"seed":3}"#,
    )
    .unwrap();
    let mut outs = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = dir.path().join(name);
        let o = run(&["scan", "--config", cfg.to_str().unwrap(), "--N", "logspace:1:6:6", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        outs.push((fs::read(&out).unwrap(), fs::read(out.with_extension("csv")).unwrap()));
    }
    assert_eq!(outs[0], outs[1]);
    let rep: ThresholdReport = serde_json::from_slice(&outs[0].0).unwrap();
    let ns: Vec<u64> = rep.points.iter().map(|p| p.n_vertices).collect();
    assert_eq!(ns, vec![3, 7, 20, 55, 148, 403]);
    let csv_text = String::from_utf8(outs[0].1.clone()).unwrap();
    assert_eq!(csv_text.lines().next().unwrap(), "N,estimate,ci_halfwidth,dfm_upper,dfm_lower");
    assert_eq!(csv_text.lines().count(), 7);
}

#[test]
fn simulate_from_flags() {
    let o = run(&[
        "simulate", "--dist", r#"{"family":"gaussian","dim":2}"#, "--N", "5,50", "--trials", "10", "--probes", "10", "--seed", "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rep: ThresholdReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rep.points.len(), 2);
    assert!(rep.points.iter().all(|p| p.dfm_upper.is_some()));
}

#[test]
fn betadist_and_report() {
    let o = run(&["betadist", "--n", "10", "--beta", "0", "--samples", "20000", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["within_slack"], serde_json::json!(true));
    let o = run(&["report", "--k", "3", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 4);
    let o = run(&["report", "--k", "2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["exploratory"], serde_json::json!(true));
}

#[test]
fn product_law_refusals_and_mc_stats() {
    let cube = r#"{"family":"uniform","params":{"a":-1,"b":1},"dim":2}"#;
    assert_eq!(run(&["conjugate", "--dist", cube]).status.code(), Some(2));
    let o = run(&["stats", "--dist", cube, "--samples", "5000", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: StatReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((rep.e_cramer - 2.0 * 0.760_661_4).abs() < 0.1);
}
