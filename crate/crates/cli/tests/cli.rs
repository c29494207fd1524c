use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn pcinterp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcinterp"))
        .args(args)
        .env_remove("PCINTERP_GRID")
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = pcinterp(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn load(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn number(v: &Value) -> f64 {
    v.as_str().expect("numbers are strings").parse().unwrap()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

#[test]
fn blocked_example_report() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "report.json");
    run_ok(&["interpolate", "--config", fixture("blocked_example.json").to_str().unwrap(), "--out", &out]);
    let doc = load(Path::new(&out));
    assert_eq!(doc["command"], "interpolate");
    assert_eq!(doc["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    let result = &doc["result"];
    assert!((number(&result["delta"]) - 20.0 / 21.0).abs() < 1e-12);
    assert_eq!(result["diagnostics"]["exact"], true);
    let scalar: Vec<(i64, f64)> = result["scalar_taps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| (t["index"].as_i64().unwrap(), number(&t["value"][0])))
        .filter(|(_, v)| v.abs() > 1e-12)
        .collect();
    let expected = [(-1, -2.0 / 3.0), (0, 3.0 / 7.0), (5, 2.0 / 3.0), (6, 3.0 / 7.0)];
    assert_eq!(scalar.len(), expected.len());
    for ((j, v), (ej, ev)) in scalar.iter().zip(expected) {
        assert_eq!(*j, ej);
        assert!((v - ev).abs() < 1e-12);
    }
}

#[test]
fn example_d0_report_and_filter() {
    let dir = TempDir::new().unwrap();
    let (out, csv) = (path(&dir, "d0.json"), path(&dir, "d0.csv"));
    run_ok(&[
        "minimax-d0",
        "--config",
        fixture("minimax_d0.json").to_str().unwrap(),
        "--out",
        &out,
        "--emit-filter",
        &csv,
    ]);
    let doc = load(Path::new(&out));
    assert!((number(&doc["result"]["delta"]) - 10.0 / 9.0).abs() < 1e-12);
    let r2 = &doc["result"]["R"][2];
    for i in 0..2 {
        for j in 0..2 {
            assert!((number(&r2[i][j][0]) - 9.0).abs() < 1e-12);
        }
    }
    assert_eq!(doc["result"]["saddle"]["values"].as_array().unwrap().len(), 2);
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "lag,component,re,im");
    assert_eq!(rows.len(), 3);
    for row in &rows[1..] {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[0], "-2");
        assert!((cols[2].parse::<f64>().unwrap() + 2.0).abs() < 1e-10);
    }
}

#[test]
fn malformed_json_exits_with_schema_code() {
    let dir = TempDir::new().unwrap();
    let cfg = path(&dir, "bad.json");
    std::fs::write(&cfg, "{\"f\": ").unwrap();
    let out = path(&dir, "report.json");
    let res = pcinterp(&["interpolate", "--config", &cfg, "--out", &out]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!Path::new(&out).exists());

    std::fs::write(&cfg, r#"{"f": {"T": 2, "form": "constant", "H": [[1, 0], [0, 1]]}}"#).unwrap();
    let res = pcinterp(&["interpolate", "--config", &cfg, "--out", &out]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!Path::new(&out).exists());
}

#[test]
fn missing_config_is_io_error() {
    let res = pcinterp(&["interpolate", "--config", "/nonexistent/config.json"]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn hypothesis_violation_exit_code() {
    let dir = TempDir::new().unwrap();
    let cfg = path(&dir, "dg.json");
    std::fs::write(
        &cfg,
        r#"{"G": 1, "P": [[[23, 22], [22, 23]], [[1, 0.5], [0.5, 1]]],
            "functional": {"vectors": [{"j": 0, "value": [5, 5]}, {"j": 2, "value": [2, 2]}]}}"#,
    )
    .unwrap();
    let out = path(&dir, "report.json");
    let res = pcinterp(&["minimax-dg", "--config", &cfg, "--out", &out]);
    assert_eq!(res.status.code(), Some(3));
    assert!(!Path::new(&out).exists());
    assert!(!res.stderr.is_empty());
}

#[test]
fn verify_round_trip() {
    let dir = TempDir::new().unwrap();
    for (cmd, name) in [
        ("interpolate", "blocked_example.json"),
        ("interpolate", "noisy.json"),
        ("interpolate", "vector_example.json"),
        ("minimax-d0", "minimax_d0.json"),
        ("minimax-dg", "minimax_dg.json"),
    ] {
        let out = path(&dir, &format!("{name}.report"));
        run_ok(&[cmd, "--config", fixture(name).to_str().unwrap(), "--out", &out]);
        let check = path(&dir, &format!("{name}.verify"));
        run_ok(&["verify", "--config", &out, "--out", &check]);
        let v = load(Path::new(&check));
        assert_eq!(v["result"]["pass"], true, "{name}");
        for c in v["result"]["checks"].as_array().unwrap() {
            assert!(number(&c["abs_diff"]) <= 1e-12);
        }
    }
}

#[test]
fn tampered_report_fails_verification() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "report.json");
    run_ok(&["interpolate", "--config", fixture("blocked_example.json").to_str().unwrap(), "--out", &out]);
    let mut doc = load(Path::new(&out));
    doc["result"]["delta"] = Value::String("9.6e-1".into());
    std::fs::write(&out, serde_json::to_string(&doc).unwrap()).unwrap();
    let res = pcinterp(&["verify", "--config", &out]);
    assert_eq!(res.status.code(), Some(5));
}

fn small_simulation(dir: &TempDir) -> String {
    let mut cfg = load(&fixture("simulate.json"));
    cfg["trials"] = Value::from(500);
    let p = path(dir, "sim.json");
    std::fs::write(&p, serde_json::to_string(&cfg).unwrap()).unwrap();
    p
}

#[test]
fn simulate_outputs_and_seed_override() {
    let dir = TempDir::new().unwrap();
    let cfg = small_simulation(&dir);
    let (out, csv) = (path(&dir, "sim.report"), path(&dir, "errors.csv"));
    run_ok(&["simulate", "--config", &cfg, "--out", &out, "--errors-csv", &csv]);
    let doc = load(Path::new(&out));
    assert_eq!(doc["settings"]["seed"], 20240521);
    assert_eq!(doc["result"]["trials"], 500);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 501);
    let check = path(&dir, "sim.verify");
    run_ok(&["verify", "--config", &out, "--out", &check]);
    assert_eq!(load(Path::new(&check))["result"]["pass"], true);

    let other = path(&dir, "sim2.report");
    run_ok(&["simulate", "--config", &cfg, "--out", &other, "--seed", "7"]);
    let doc2 = load(Path::new(&other));
    assert_eq!(doc2["settings"]["seed"], 7);
    assert_ne!(doc["result"]["mean"], doc2["result"]["mean"]);
    assert_eq!(doc["result"]["delta"], doc2["result"]["delta"]);
}

#[test]
fn errors_csv_rejected_outside_simulate() {
    let dir = TempDir::new().unwrap();
    let res = pcinterp(&[
        "interpolate",
        "--config",
        fixture("blocked_example.json").to_str().unwrap(),
        "--errors-csv",
        &path(&dir, "e.csv"),
    ]);
    assert_eq!(res.status.code(), Some(2));
}

fn without_timestamp(path: &str) -> Value {
    let mut doc = load(Path::new(path));
    doc.as_object_mut().unwrap().remove("generated_at");
    doc
}

#[test]
fn runs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = small_simulation(&dir);
    for (cmd, config) in [
        ("interpolate", fixture("noisy.json").to_str().unwrap().to_owned()),
        ("minimax-d0", fixture("minimax_d0.json").to_str().unwrap().to_owned()),
        ("simulate", cfg),
    ] {
        let (a, b) = (path(&dir, "a.json"), path(&dir, "b.json"));
        run_ok(&[cmd, "--config", &config, "--out", &a]);
        run_ok(&[cmd, "--config", &config, "--out", &b]);
        let (ta, tb) = (std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
        let differing: Vec<(&str, &str)> = ta.lines().zip(tb.lines()).filter(|(x, y)| x != y).collect();
        assert!(differing.iter().all(|(x, _)| x.contains("\"generated_at\"")), "{cmd}: {differing:?}");
        assert_eq!(without_timestamp(&a), without_timestamp(&b));
    }
}

#[test]
fn grid_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg = fixture("blocked_example.json");
    let out = path(&dir, "r.json");
    run_ok(&["interpolate", "--config", cfg.to_str().unwrap(), "--out", &out]);
    assert_eq!(load(Path::new(&out))["settings"]["grid"], 4096);

    let res = Command::new(env!("CARGO_BIN_EXE_pcinterp"))
        .args(["interpolate", "--config", cfg.to_str().unwrap(), "--out", &out])
        .env("PCINTERP_GRID", "1024")
        .output()
        .unwrap();
    assert!(res.status.success());
    assert_eq!(load(Path::new(&out))["settings"]["grid"], 1024);

    run_ok(&["interpolate", "--config", fixture("noisy.json").to_str().unwrap(), "--out", &out]);
    assert_eq!(load(Path::new(&out))["settings"]["grid"], 2048);

    run_ok(&["interpolate", "--config", fixture("noisy.json").to_str().unwrap(), "--out", &out, "--grid", "512"]);
    assert_eq!(load(Path::new(&out))["settings"]["grid"], 512);

    let res = pcinterp(&["interpolate", "--config", cfg.to_str().unwrap(), "--grid", "1000"]);
    assert_eq!(res.status.code(), Some(2));
}
