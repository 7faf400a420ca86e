use std::path::Path;
use std::process::{Command, Output};

use leocluster::{load_config, parse_config, ConfigError};
use leocluster_core::ScenarioParams;

fn leocluster(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leocluster"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

#[test]
fn load_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.cfg");
    std::fs::write(&path, "# shell\naltitude_km = 500\nn_followers = 20\n").unwrap();
    let s = load_config(&path).unwrap();
    assert_eq!(s.cfg.altitude_km, 500.0);
    assert_eq!(s.cfg.n_followers, 20);
    assert_eq!(s.lu, ScenarioParams::default().lu);
}

#[test]
fn missing_file() {
    assert!(matches!(load_config(Path::new("/nonexistent/x.cfg")), Err(ConfigError::Io { .. })));
}

#[test]
fn later_lines_win() {
    let s = parse_config("gamma_th_db = -6\ngamma_th_db = -4\n").unwrap();
    assert_eq!(s.gamma_th_db, -4.0);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "n_leaders = 100\nn_followers = ten\n").unwrap();
    let out = leocluster(&["validate", "--config", "bad.cfg", "--out", "o.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert!(!dir.path().join("o.csv").exists());

    std::fs::write(dir.path().join("ok.cfg"), "").unwrap();
    let out = leocluster(&["validate", "--config", "ok.cfg", "--out", "o.csv", "--set", "nope=1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = leocluster(&["validate", "--out", "o.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = leocluster(&["frobnicate", "--config", "ok.cfg", "--out", "o.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn outage_sweep_layout() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.cfg"), "n_followers = 2\n").unwrap();
    let out = leocluster(
        &["outage-sweep", "--config", "s.cfg", "--out", "o.csv", "--trials", "5000", "--sweep", "gamma_th_db=-6:-4:1"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("o.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "sweep_var,p_out_leader,p_out_cluster,p_out_lower,p_out_upper,p_out_mc,mc_ci");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("-6.0000000000000000e0,"));
    assert!(!text.contains('\r'));
    let cols: Vec<f64> = lines[2].split(',').map(|c| c.parse().unwrap()).collect();
    assert!(cols[2] <= cols[1], "cluster outage below leader outage");
}

#[test]
fn casestudy_reports_reductions() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.cfg"), "lu_power_dbw = 10\n").unwrap();
    let out = leocluster(
        &["casestudy", "--config", "s.cfg", "--out", "c.csv", "--sweep", "n_followers=2:10:4"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    let last = text.lines().last().unwrap();
    let n_eff: u32 = last.rsplit(',').next().unwrap().parse().unwrap();
    assert!(n_eff < 10);
    assert!(String::from_utf8_lossy(&out.stderr).contains("supports"));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.cfg"), "").unwrap();
    for f in ["a.csv", "b.csv"] {
        let out = leocluster(
            &["rate-sweep", "--config", "s.cfg", "--out", f, "--trials", "3000", "--seed", "7", "--sweep", "altitude_km=500:700:100"],
            dir.path(),
        );
        assert!(out.status.success());
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
}
