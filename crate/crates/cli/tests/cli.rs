use std::path::Path;
use std::process::{Command, Output};

use rfid_lab::codec::{parse_log, LogEntry};
use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rfid-lab"))
        .args(args)
        .env_remove("LAB_SEED")
        .output()
        .expect("binary runs")
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn reveal(variant: &str, dir: &Path) -> (Output, Value) {
    let path = dir.join(format!("{variant}.json"));
    let out = lab(&[
        "--protocol", "i2srs", "--variant", variant, "--attack", "i2srs-secret-reveal",
        "--trials", "100", "--seed", "7", "--report", path.to_str().unwrap(),
    ]);
    (out, report(&path))
}

#[test]
fn secret_reveal_on_original() {
    let dir = tempfile::tempdir().unwrap();
    let (out, r) = reveal("original", dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let e = &r["experiments"][0];
    assert_eq!(e["attack"], "i2srs-secret-reveal");
    assert_eq!(e["value"], 1.0);
    assert!(e["max_cost"].as_u64().unwrap() <= 65536);
    assert_eq!(e["seed"].as_u64(), r["experiments"][0]["seed"].as_u64());
    assert!(r["matrix"].is_null());
}

#[test]
fn secret_reveal_on_improved() {
    let dir = tempfile::tempdir().unwrap();
    let (out, r) = reveal("improved", dir.path());
    assert_eq!(out.status.code(), Some(0));
    let e = &r["experiments"][0];
    assert!(e["value"].as_f64().unwrap() <= 0.01);
    assert_eq!(e["verdict"], "resisted");
    assert!(String::from_utf8_lossy(&out.stdout).contains("i2srs-secret-reveal"));
}

#[test]
fn config_errors_exit_2() {
    for args in [
        &["--attack", "no-such-attack"][..],
        &["--trials", "0"],
        &["--protocol", "i2srs", "--width", "40"],
        &["--protocol", "ihrma", "--width", "7"],
        &["--protocol", "ihrma", "--attack", "i2srs-replay"],
        &["--tolerance-resisted", "1.5"],
        &["--variant", "sideways"],
    ] {
        let out = lab(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn failing_criteria_exit_1() {
    // Too few games to separate the improved variant from noise.
    let out = lab(&["--protocol", "i2srs", "--variant", "improved", "--attack", "i2srs-traceability", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn full_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let rep = dir.path().join(format!("{name}.json"));
        let log = dir.path().join(format!("{name}.jsonl"));
        lab(&[
            "--attack", "all", "--trials", "150", "--seed", "11",
            "--report", rep.to_str().unwrap(), "--transcripts", log.to_str().unwrap(),
        ]);
        (std::fs::read(rep).unwrap(), std::fs::read_to_string(log).unwrap())
    };
    let (ra, la) = run("a");
    let (rb, lb) = run("b");
    assert_eq!(ra, rb);
    assert_eq!(la, lb);

    let r: Value = serde_json::from_slice(&ra).unwrap();
    let tables = r["matrix"]["tables"].as_array().unwrap();
    assert_eq!(tables.len(), 2);
    let rows: usize = tables.iter().map(|t| t["rows"].as_array().unwrap().len()).sum();
    assert_eq!(rows, 11);
    for t in tables {
        for row in t["rows"].as_array().unwrap() {
            for cell in row["cells"].as_array().unwrap() {
                assert_eq!(cell["trials"], 150);
                assert!(cell["seed"].is_u64());
            }
        }
    }

    let entries = parse_log(&la).unwrap();
    assert!(entries.iter().any(|e| matches!(e, LogEntry::Game(_))));
    assert!(entries.iter().any(|e| !matches!(e, LogEntry::Game(_))));
}

#[test]
fn seed_defaults_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = Command::new(env!("CARGO_BIN_EXE_rfid-lab"))
        .args(["--protocol", "i2srs", "--attack", "i2srs-replay", "--trials", "10", "--report"])
        .arg(&path)
        .env("LAB_SEED", "4242")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&path)["seed"], 4242);
}

#[test]
fn lists_every_attack() {
    let out = lab(&["--list"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(text.contains("W_7"));
}
