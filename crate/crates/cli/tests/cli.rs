use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use squidcav::{run_experiment, sweep, ExperimentConfig};
use squidcav_core::EffectiveParams;

const NOMINAL_RATIOS: &str = r#""cavity": {"g_per_s": 1.8e8, "Delta_c_over_g": 10, "Q": 2e4},
    "drive": [{"Omega_per_s": 1.5e8, "Delta_uw_over_Omega": 10}]"#;

fn config(body: &str) -> String {
    format!("{{{NOMINAL_RATIOS}, {body}}}")
}

fn squidcav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_squidcav")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run_cli(dir: &Path, cfg: &Path, out: &str, extra: &[&str]) -> (Output, PathBuf) {
    let out_dir = dir.join(out);
    let mut args = vec!["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()];
    args.extend(extra);
    (squidcav(&args), out_dir)
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn csv_rows(p: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(p).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn effective_bell_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bell.json", &config(r#""experiment": "bell""#));
    let (out, od) = run_cli(dir.path(), &cfg, "o", &["--model", "effective"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = read_json(&od.join("bell.json"));
    assert_eq!(rec["payload"]["kind"], "protocol");
    let f = rec["payload"]["data"]["fidelity"].as_f64().unwrap();
    assert!((f - 1.0).abs() < 1e-10, "{f}");
    assert_eq!(rec["payload"]["data"]["variant"], "EFF_TWO_VACUUM");
    assert!(rec.get("duration_s").is_none());
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.json", &config(r#""experiment": "stark-sweep", "seed": 3"#));
    let (a, da) = run_cli(dir.path(), &cfg, "a", &[]);
    let (b, db) = run_cli(dir.path(), &cfg, "b", &[]);
    assert!(a.status.success() && b.status.success());
    for f in ["stark_sweep.csv", "stark_sweep.json"] {
        assert_eq!(std::fs::read(da.join(f)).unwrap(), std::fs::read(db.join(f)).unwrap(), "{f}");
    }
    let (c, dc) = run_cli(dir.path(), &cfg, "c", &["--seed", "4"]);
    assert!(c.status.success());
    let hash = |d: &Path| read_json(&d.join("stark_sweep.json"))["config_hash"].clone();
    assert_eq!(hash(&da), hash(&db));
    assert_ne!(hash(&da), hash(&dc));
    assert_ne!(std::fs::read(da.join("stark_sweep.csv")).unwrap(), std::fs::read(dc.join("stark_sweep.csv")).unwrap());
    // Only the renamed outputs remain: no temporary files.
    assert_eq!(std::fs::read_dir(&da).unwrap().count(), 2);
}

#[test]
fn stark_sweep_columns_match_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let state = r#"[[0.5, 0.1], [0.3, -0.2], [0.1, 0.4], [0.0, 0.0]]"#;
    let v: Vec<[f64; 2]> = serde_json::from_str(state).unwrap();
    let n: f64 = v.iter().map(|z| z[0] * z[0] + z[1] * z[1]).sum::<f64>().sqrt();
    let state: Vec<[f64; 2]> = v.iter().map(|z| [z[0] / n, z[1] / n]).collect();
    let body = format!(r#""experiment": "stark-sweep", "stark": {{"state": {}}}"#, serde_json::to_string(&state).unwrap());
    let cfg = write_config(dir.path(), "s.json", &config(&body));
    let (out, od) = run_cli(dir.path(), &cfg, "o", &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&od.join("stark_sweep.csv"));
    assert_eq!(header, ["theta", "Pe_closed_form", "Pe_oracle", "abs_diff"]);
    assert_eq!(rows.len(), 256);
    let p0 = state[0][0].powi(2) + state[0][1].powi(2);
    let p3 = state[3][0].powi(2) + state[3][1].powi(2);
    let mut worst = 0.0f64;
    for (k, r) in rows.iter().enumerate() {
        let x: Vec<f64> = r.iter().map(|s| s.parse().unwrap()).collect();
        assert!((x[0] - 4.0 * PI * k as f64 / 255.0).abs() < 1e-12);
        let closed = 4.0 * (x[0] / 2.0).sin().powi(2) * (p0 * (1.0 - p0) + p3 * (1.0 - p3) + 2.0 * x[0].cos() * p0 * p3);
        assert!((x[1] - closed).abs() < 1e-14);
        assert_eq!(x[3], (x[1] - x[2]).abs());
        worst = worst.max(x[3]);
    }
    assert!(worst < 1e-12, "{worst:e}");
}

#[test]
fn stark_sweep_over_time_vanishes_at_full_periods() {
    let cfg = ExperimentConfig::from_json_str(&config(r#""experiment": "stark-sweep", "seed": 9"#)).unwrap();
    let gp = EffectiveParams::nominal().gamma_prime;
    let values: Vec<f64> = (0..8).map(|k| k as f64 * PI / gp).collect();
    let out = sweep(&cfg, "stark.t_s", &[], &values).unwrap();
    assert_eq!(out.points.len(), 8);
    for (k, p) in out.points.iter().enumerate() {
        let r = p.record.as_ref().unwrap().protocol().unwrap();
        let pe = r.extras["pe_oracle"];
        assert!((r.extras["theta"] - k as f64 * PI).abs() < 1e-9);
        if k % 2 == 0 {
            assert!(pe.abs() < 1e-12, "gamma' t = {k} pi: {pe:e}");
        } else {
            assert!(pe > 1e-3, "gamma' t = {k} pi: {pe:e}");
        }
    }
}

#[test]
fn sudden_bell_sweep_degrades_with_detuning_ratio() {
    let cfg = ExperimentConfig::from_json_str(&config(
        r#""experiment": "bell", "model": {"variant": "FULL_ROTATING", "switching": "sudden", "samples": 101}"#,
    ))
    .unwrap();
    let linked = vec!["drive[0].Delta_uw_over_Omega".to_string()];
    let out = sweep(&cfg, "cavity.Delta_c_over_g", &linked, &[20.0, 10.0, 5.0]).unwrap();
    let f: Vec<f64> = out.points.iter().map(|p| p.record.as_ref().unwrap().protocol().unwrap().fidelity).collect();
    assert!(f[0] >= f[1] && f[1] >= f[2], "{f:?}");
    for p in &out.points {
        let rec = p.record.as_ref().unwrap();
        assert_eq!(rec.swept.as_ref().unwrap().value, p.value);
        let eff = &rec.setup.as_ref().unwrap().squids[0].effective;
        assert!((eff.delta_c / eff.g - p.value).abs() < 1e-12);
        assert!((eff.delta_uw / eff.omega - p.value).abs() < 1e-12);
    }
}

#[test]
fn empty_sweep_gives_no_records_and_bad_path_errors() {
    let cfg = ExperimentConfig::from_json_str(&config(r#""experiment": "bell""#)).unwrap();
    assert!(sweep(&cfg, "cavity.g_per_s", &[], &[]).unwrap().points.is_empty());
    let err = sweep(&cfg, "cavity.nonexistent", &[], &[1.0]).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(sweep(&cfg, "model.variant", &[], &[]).is_err());
}

#[test]
fn failing_points_are_isolated() {
    let cfg = ExperimentConfig::from_json_str(&config(r#""experiment": "bell""#)).unwrap();
    // Omega < 0 is rejected at the middle point only.
    let out = sweep(&cfg, "drive[0].Omega_per_s", &[], &[1.5e8, -1.0, 1.2e8]).unwrap();
    let status: Vec<_> = out.points.iter().map(|p| p.status).collect();
    use squidcav::sweep::PointStatus::*;
    assert_eq!(status, [Ok, Error, Ok]);
    assert!(out.points[1].message.is_some());
    assert_eq!(out.summary("s.csv").rows.len(), 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"cavity": {"bogus": 1}}"#, 2, "/cavity/bogus"),
        (r#"{"drive": [{"Omega_per_s": 1e8}]}"#, 2, "/drive/0"),
        ("not json", 2, "invalid JSON"),
        (r#"{"experiment": "cnot", "cnot": {"reading": "literal"}}"#, 3, "not CNOT"),
        (r#"{"experiment": "spectrum", "grid": {"halfwidth_Phi0": 0.08, "check_convergence": false}}"#, 4, "leaks"),
    ];
    for (k, (text, code, needle)) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("c{k}.json"), text);
        let (out, _) = run_cli(dir.path(), &cfg, "o", &[]);
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(out.status.code(), Some(*code), "{text}: {err}");
        assert!(err.contains(needle), "{text}: {err}");
    }
    let out = squidcav(&["run", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn full_model_override_and_fock_check() {
    let cfg = ExperimentConfig::from_json_str(&config(r#""experiment": "transfer", "seed": 2"#)).unwrap();
    let mut full = cfg.clone();
    full.apply(&squidcav::Overrides { model: Some(squidcav::ModelChoice::Full), ..Default::default() });
    assert_ne!(cfg.hash(), full.hash());
    let out = run_experiment(&full).unwrap();
    let r = out.record.protocol().unwrap();
    assert!(r.fidelity >= 0.95, "{}", r.fidelity);
    assert!(r.extras["fock_check_delta_fidelity"] < 1e-3);
    assert_eq!(
        out.tables[0].header,
        ["t_s", "pop_00", "pop_01", "pop_10", "pop_11", "pop_a_total", "n_photon", "fidelity_vs_target"]
    );
}

#[test]
fn feasibility_reports_stated_timescales() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#""feasibility": {"T1_s": 1.5e-5, "P_a": 0.01, "P_c": 0.01}"#;
    let cfg = write_config(dir.path(), "f.json", &config(body));
    let od = dir.path().join("o");
    let out = squidcav(&["feasibility", "--config", cfg.to_str().unwrap(), "--out", od.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = read_json(&od.join("feasibility.json"));
    let d = &rec["payload"]["data"];
    assert!((d["t_c_over_p_c_s"].as_f64().unwrap() - 1.07e-5).abs() < 5e-8);
    assert!((d["t1_over_p_a_s"].as_f64().unwrap() - 1.5e-3).abs() < 1e-12);
    let table = String::from_utf8_lossy(&out.stdout);
    for key in ["t_c_over_p_c_s", "t1_over_p_a_s", "cavity_ok", "level_a_ok"] {
        assert!(table.lines().any(|l| l.starts_with(key)), "{key} missing:\n{table}");
    }
}

#[test]
fn spectrum_command_writes_levels_and_flux() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.json", "{}");
    let od = dir.path().join("o");
    let out = squidcav(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", od.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = csv_rows(&od.join("squid1_levels.csv"));
    assert_eq!(h, ["level", "index", "E_over_h_GHz"]);
    let labels: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(&labels[..4], ["0", "1", "-", "a"]);
    let ea: f64 = rows[3][2].parse().unwrap();
    assert!((ea - 30.0).abs() < 4.5, "{ea}");
    let (h, rows) = csv_rows(&od.join("squid1_flux_me.csv"));
    assert_eq!(h, ["i", "j", "flux_me_Wb"]);
    assert_eq!(rows.len(), 9);
    let rec = read_json(&od.join("spectrum.json"));
    assert_eq!(rec["payload"]["kind"], "spectrum");
}
