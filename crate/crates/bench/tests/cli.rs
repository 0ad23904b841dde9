use std::fs;
use std::path::Path;
use std::process::Command;

use rsbq_bench::plotdata::Table;
use rsbq_core::optrec::SweepRecord;

fn rsbq(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rsbq")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn corr_demo_with_a_point_mass_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": "corr-demo", "channel": {"mixture": {"sigma": 0.0}}, "solver": {"samples": 3}}"#,
    );
    let out = rsbq(&["corr-demo", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((summary["min_fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let t = Table::parse_csv(&fs::read_to_string(dir.path().join("corr_demo.csv")).unwrap()).unwrap();
    assert_eq!(t.rows.len(), 3);
    assert!(t.numeric_column("fidelity").unwrap().iter().all(|f| (f - 1.0).abs() < 1e-11));
}

#[test]
fn kl_check_reports_satisfied_for_the_n4_code_under_dephasing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": "kl-check",
            "codes": [{"family": "two_mode_binomial", "n": 4, "delta": 0.7853981633974483},
                      {"family": "two_mode_binomial", "n": 2, "delta": 0.7853981633974483}],
            "channel": {"kind": "dephasing", "strengths": [0.001]}}"#,
    );
    let out = rsbq(&["kl-check", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let t = Table::parse_csv(&fs::read_to_string(dir.path().join("kl_check.csv")).unwrap()).unwrap();
    let verdict = t.columns.iter().position(|c| c == "verdict").unwrap();
    assert_eq!(t.rows[0][verdict], "satisfied");
    assert_eq!(t.rows[1][verdict], "violated");
}

#[test]
fn dephasing_sweep_csv_parses_and_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = rsbq(&["sweep", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let dat = fs::read_to_string(dir.path().join("sweep.dat")).unwrap();
    assert_eq!(Table::parse_csv(&csv).unwrap(), Table::parse_dat(&dat).unwrap());
    let records: Vec<SweepRecord> = csv.lines().skip(1).map(|l| SweepRecord::from_csv_row(l).unwrap()).collect();
    for (line, r) in csv.lines().skip(1).zip(&records) {
        assert_eq!(r.csv_row(), line);
    }
    assert_eq!(records.len(), 20);
    let f = |code: &str, s: f64| records.iter().find(|r| r.code == code && r.strength == s).unwrap().f_e;
    for s in [1e-3, 3e-3, 1e-2, 3e-2, 5e-2] {
        assert!(f("two_mode_n4", s) >= f("two_mode_n2", s) - 1e-6, "{s}");
        assert!(f("two_mode_n2", s) >= f("single_mode_n2_k2", s) - 1e-6, "{s}");
    }
    let log = fs::read_to_string(dir.path().join("sweep.log")).unwrap();
    assert_eq!(log.lines().filter(|l| l.starts_with("sdp ")).count(), 20);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert!(rsbq(&["gates", "--seed", "7", "--out", d.path().to_str().unwrap()]).status.success());
        assert!(rsbq(&["landscape", "--out", d.path().to_str().unwrap()]).status.success());
    }
    for name in ["gates.csv", "gates.dat", "gates.json", "gates.log", "landscape.csv", "landscape.json", "landscape.log"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let g = Table::parse_csv(&fs::read_to_string(a.path().join("gates.csv")).unwrap()).unwrap();
    assert!(g.numeric_column("deviation").unwrap().iter().all(|d| *d < 1e-10));
}

#[test]
fn config_errors_exit_with_2_and_a_list() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": "sweep", "channel": {"strengths": [0.01, 0.001]}, "solver": {"target_gap": -1}}"#,
    );
    let out = rsbq(&["sweep", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    let fields: Vec<&str> = err["errors"].as_array().unwrap().iter().map(|e| e["field"].as_str().unwrap()).collect();
    assert!(fields.contains(&"channel.strengths") && fields.contains(&"solver.target_gap"), "{fields:?}");

    let out = rsbq(&["gates", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let out = rsbq(&["sweep", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = rsbq(&["sweep", "--threads", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_convergence_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": "sdp", "channel": {"kind": "loss", "strengths": [0.01]},
            "solver": {"max_iterations": 1, "target_gap": 1e-15, "accept_gap": 1e-15}}"#,
    );
    let out = rsbq(&["sdp", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn phase_dist_writes_both_torus_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": "phase-dist", "codes": [{"family": "two_mode_binomial", "n": 2, "delta": 0.0, "phi": 0.0}],
            "grid": {"phase_points": 16}}"#,
    );
    let out = rsbq(&["phase-dist", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    for tag in ["plus", "minus"] {
        let t = Table::parse_csv(&fs::read_to_string(dir.path().join(format!("phase_dist_{tag}.csv"))).unwrap()).unwrap();
        assert_eq!(t.columns, vec!["phi1", "phi2", "p"]);
        assert_eq!(t.rows.len(), 256);
        let cell = (2.0 * std::f64::consts::PI / 16.0).powi(2);
        let mass: f64 = t.numeric_column("p").unwrap().iter().sum::<f64>() * cell;
        assert!((mass - 1.0).abs() < 1e-10);
    }
}
