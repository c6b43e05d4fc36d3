use std::path::PathBuf;
use std::process::{Command, Output};

use v2x_twostage::sim::CSV_HEADER;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_v2x-twostage"));
    for (k, _) in std::env::vars() {
        if k.starts_with("V2X_") {
            c.env_remove(k);
        }
    }
    c
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn validate_echoes_resolved_parameters() {
    let out = ok(bin().args(["validate", "--config"]).arg(configs().join("default.toml")).output().unwrap());
    for line in ["slot_duration = 0.001", "tdi_update_interval = 0.5", "total_rbs = 25", "capacity = 10", "kappa_jam = 2.0"] {
        assert!(out.contains(line), "missing {line}");
    }
}

#[test]
fn every_shipped_config_validates() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            ok(bin().arg("validate").arg("--config").arg(&path).output().unwrap());
        }
    }
}

#[test]
fn unknown_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, "[queue]\ncapasity = 3\n").unwrap();
    let out = bin().arg("validate").arg("--config").arg(&p).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("capasity"));
}

#[test]
fn out_of_range_value_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, "[timing]\nslot_duration = -1.0\n").unwrap();
    let out = bin().arg("validate").arg("--config").arg(&p).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("slot_duration"));
}

#[test]
fn equal_densities_give_quarters() {
    let out = ok(bin().args(["solve-stage1", "--kappa", "1,1,1,1"]).output().unwrap());
    let eps: Vec<f64> = out.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(eps, vec![0.25; 4]);
}

#[test]
fn wrong_density_count_fails() {
    let out = bin().args(["solve-stage1", "--kappa", "1,2"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn densities_from_the_environment() {
    let out = ok(bin().arg("solve-stage1").env("V2X_KAPPA", "0,0,0,1").output().unwrap());
    let eps: Vec<f64> = out.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!((eps.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(eps[3] > eps[0]);
}

#[test]
fn oracle_check_reports_small_share_error() {
    let out = ok(bin().args(["oracle-check", "--draws", "50"]).output().unwrap());
    let err: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("stage1_max_share_error,"))
        .expect("share error line")
        .parse()
        .unwrap();
    assert!(err <= 1e-6);
}

#[test]
fn csv_file_with_provenance_and_append() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let args = ["run", "--policy", "random", "--regime", "high", "--rates", "5,10", "--epochs", "1"];
    ok(bin().args(args).arg("--out").arg(&csv).output().unwrap());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(lines.count(), 2);

    let side = dir.path().join("r.csv.provenance.json");
    let prov: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&side).unwrap()).unwrap();
    assert_eq!(prov["seed"], 2024);
    assert_eq!(prov["rows"], 2);
    assert_eq!(prov["config_sha256"].as_str().unwrap().len(), 64);

    ok(bin().args(args).arg("--out").arg(&csv).arg("--append").env("V2X_SEED", "5").output().unwrap());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 5, "one header, four rows");
    assert_eq!(text.lines().filter(|l| l.starts_with("policy,")).count(), 1);
    assert!(text.lines().skip(3).all(|l| l.split(',').nth(3) == Some("5")));
}

#[test]
fn stdout_rows_when_no_file_given() {
    let out = ok(bin().args(["run", "--policy", "random", "--rates", "5", "--epochs", "1"]).output().unwrap());
    let mut r = csv::Reader::from_reader(out.as_bytes());
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER.to_vec());
    let rows: Vec<_> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "random");
    assert_eq!(&rows[0][1], "low");
    let delay: f64 = rows[0][4].parse().unwrap();
    assert!(delay > 0.0);
}
