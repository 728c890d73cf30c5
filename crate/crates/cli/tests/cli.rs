use std::path::Path;
use std::process::{Command, Output};

fn ipred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipred"))
        .args(args)
        .output()
        .expect("spawn ipred")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SHORT: &str = "[run]\nn_ttis = 150\n[cqi]\ncalibration_ttis = 200\n";

#[test]
fn run_then_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT);
    let out_dir = dir.path().join("out");
    let out = ipred(&[
        "run",
        "--config",
        &cfg,
        "--seed",
        "7",
        "--drops",
        "2",
        "--predictors",
        "ekf,genie",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("records: 1600"), "{stdout}");

    let records = std::fs::read_to_string(out_dir.join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 1 + 2 * 16 * 50);
    let header = records.lines().next().unwrap();
    assert!(header.contains("pred_ipv_ekf") && header.contains("pred_ipv_genie") && !header.contains("_ma"));

    let saved = std::fs::read_to_string(out_dir.join("config.toml")).unwrap();
    assert!(saved.contains("seed = 7"), "{saved}");

    let again = ipred(&["summarize", "--in", out_dir.to_str().unwrap()]);
    assert!(again.status.success());
    let text = String::from_utf8(again.stdout).unwrap();
    assert!(text.contains("records: 1600") && text.contains("genie"));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT);
    for name in ["a", "b"] {
        let out = ipred(&["run", "--config", &cfg, "--out", dir.path().join(name).to_str().unwrap()]);
        assert!(out.status.success());
    }
    let a = std::fs::read(dir.path().join("a/records.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/records.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "[scenario]\nspeed = -1\n");
    let out = ipred(&["run", "--config", &bad, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("speed"));

    let unknown = write_config(dir.path(), "[scenario]\nwarp = 9\n");
    let out = ipred(&["run", "--config", &unknown]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = ipred(&["run", "--ttis", "50"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let crowded = write_config(
        dir.path(),
        "[scenario]\nn_subnets = 8\nn_subbands = 2\nmin_separation = 19.0\n[run]\nn_ttis = 150\n",
    );
    let out = ipred(&["run", "--config", &crowded, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("drop 0"));

    let out = ipred(&["summarize", "--in", dir.path().join("missing").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn table_generate_and_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mcs.csv");
    let out = ipred(&["table", "--analytic", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("mcs_id,spectral_efficiency,sinr_db,bler\n"));
    assert_eq!(text.lines().count(), 1 + 29 * 601);

    let copy = dir.path().join("copy.csv");
    let out = ipred(&["table", "--load", path.to_str().unwrap(), "--out", copy.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&copy).unwrap());

    let broken = dir.path().join("broken.csv");
    std::fs::write(&broken, "mcs_id,spectral_efficiency,sinr_db,bler\n0,1.0,0,0.1\n0,1.0,1,0.3\n").unwrap();
    let out = ipred(&["table", "--load", broken.to_str().unwrap(), "--out", copy.to_str().unwrap()]);
    assert_ne!(out.status.code(), Some(0));

    let out = ipred(&["table", "--out", copy.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn loaded_table_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("mcs.csv");
    assert!(ipred(&["table", "--analytic", "--out", table.to_str().unwrap()]).status.success());
    let cfg = write_config(dir.path(), &format!("{SHORT}[la]\ntable_path = {:?}\n", table.to_str().unwrap()));
    let out = ipred(&["run", "--config", &cfg, "--predictors", "genie", "--out", dir.path().join("o").to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn defaults_parse_back() {
    let out = ipred(&["defaults"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(ipred_core::RunConfig::from_toml_str(&text).unwrap(), ipred_core::RunConfig::default());
}
