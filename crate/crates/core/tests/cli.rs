use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn rnd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rnd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn write(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_vec_pretty(value).unwrap()).unwrap();
    path
}

fn measure(weights: &[f64], kind: &str) -> Value {
    let space: Vec<String> = (0..weights.len()).map(|i| i.to_string()).collect();
    json!({ "space": space, "weights": weights, "kind": kind })
}

fn bsc_files(dir: &Path) -> (PathBuf, PathBuf) {
    let kernel = json!({
        "x_space": ["0", "1"],
        "y_space": ["0", "1"],
        "rows": [[0.75, 0.25], [0.25, 0.75]],
    });
    (
        write(dir, "bsc.json", &kernel),
        write(dir, "px.json", &measure(&[0.5, 0.5], "probability")),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_is_deterministic_and_passes() {
    let args = ["verify", "--all", "--seed", "7", "--trials", "20"];
    let (a, b) = (rnd(&args), rnd(&args));
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert_eq!(a.stdout, b.stdout);
    let report = json_of(&a);
    assert_eq!(report["pass"], true);
    assert_eq!(report["theorems"].as_array().unwrap().len(), 13);
}

#[test]
fn different_seeds_differ() {
    let a = rnd(&[
        "verify",
        "--theorem",
        "rn_construction",
        "--seed",
        "1",
        "--trials",
        "5",
    ]);
    let b = rnd(&[
        "verify",
        "--theorem",
        "rn_construction",
        "--seed",
        "2",
        "--trials",
        "5",
    ]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn tight_tolerance_fails_with_exit_one() {
    let out = rnd(&[
        "verify",
        "--theorem",
        "continuity",
        "--trials",
        "5",
        "--tol",
        "continuity=1e-9",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report = json_of(&out);
    assert_eq!(report["pass"], false);
    let section = &report["theorems"][0];
    assert!(section["failed"].as_u64().unwrap() > 0);
    assert!(section["first_failure"]["trial"].is_u64());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        rnd(&["verify", "--theorem", "no_such_theorem"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        rnd(&["verify", "--all", "--theorem", "chain_rule"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        rnd(&["verify", "--tol", "chain_rule"]).status.code(),
        Some(2)
    );
    assert_eq!(
        rnd(&["rnd", "/nonexistent/p.json", "/nonexistent/q.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(rnd(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_file_exits_two() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = rnd(&["rnd", s(&bad), s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let off = write(dir.path(), "off.json", &measure(&[0.5, 0.6], "probability"));
    assert_eq!(rnd(&["rnd", s(&off), s(&off)]).status.code(), Some(2));
}

#[test]
fn generated_kernel_is_row_stochastic() {
    let out = rnd(&[
        "generate", "kernel", "--nx", "3", "--ny", "4", "--seed", "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let k = json_of(&out);
    let rows = k["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let row: Vec<f64> = row
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        assert_eq!(row.len(), 4);
        assert!(row.iter().all(|&w| w >= 0.0));
        assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
    let again = rnd(&[
        "generate", "kernel", "--nx", "3", "--ny", "4", "--seed", "7",
    ]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn generated_chain_is_absolutely_continuous() {
    let out = rnd(&["generate", "measure-chain", "--len", "3", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let chain = json_of(&out);
    assert_eq!(chain["kind"], "measure-chain");
    let weights: Vec<Vec<f64>> = chain["measures"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| {
            m["weights"]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_f64().unwrap())
                .collect()
        })
        .collect();
    assert_eq!(weights.len(), 3);
    for pair in weights.windows(2) {
        for (p, q) in pair[0].iter().zip(&pair[1]) {
            assert!(*q != 0.0 || *p == 0.0);
        }
    }
    assert_eq!(
        rnd(&["generate", "measure-chain", "--strict"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn generated_single_point_measure() {
    let m = json_of(&rnd(&["generate", "measure", "--n", "1"]));
    assert_eq!(m["weights"], json!([1.0]));
}

#[test]
fn generated_density_round_trips_through_verify() {
    let dir = TempDir::new().unwrap();
    let files: Vec<PathBuf> = (0..3)
        .map(|i| {
            let seed = (i + 10).to_string();
            let out = rnd(&["generate", "density", "--seed", &seed, "--grid-n", "101"]);
            assert_eq!(out.status.code(), Some(0));
            let path = dir.path().join(format!("d{i}.json"));
            std::fs::write(&path, &out.stdout).unwrap();
            path
        })
        .collect();
    let mut args = vec!["verify", "--theorem", "chain_rule_density"];
    for f in &files {
        args.extend(["--density", s(f)]);
    }
    let out = rnd(&args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert_eq!(json_of(&out)["theorems"][0]["source"], "supplied");
}

#[test]
fn supplied_identical_chain_has_zero_deviation() {
    let dir = TempDir::new().unwrap();
    let p = write(
        dir.path(),
        "p.json",
        &measure(&[0.2, 0.3, 0.5], "probability"),
    );
    let out = rnd(&[
        "verify",
        "--theorem",
        "chain_rule",
        "--measure",
        s(&p),
        "--measure",
        s(&p),
        "--measure",
        s(&p),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let section = &json_of(&out)["theorems"][0];
    assert_eq!(section["passed"], 1);
    assert_eq!(section["max_deviation"], 0.0);
}

#[test]
fn supplied_chain_file_is_accepted() {
    let dir = TempDir::new().unwrap();
    let out = rnd(&["generate", "measure-chain", "--len", "3", "--seed", "4"]);
    let path = dir.path().join("chain.json");
    std::fs::write(&path, &out.stdout).unwrap();
    let out = rnd(&["verify", "--theorem", "chain_rule", "--measure", s(&path)]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn too_few_supplied_measures_exit_two() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "p.json", &measure(&[0.5, 0.5], "probability"));
    assert_eq!(
        rnd(&["verify", "--theorem", "chain_rule", "--measure", s(&p)])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn supplied_non_ac_pair_is_inapplicable() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "p.json", &measure(&[0.5, 0.5], "probability"));
    let q = write(dir.path(), "q.json", &measure(&[1.0, 0.0], "probability"));
    let out = rnd(&[
        "verify",
        "--theorem",
        "rn_construction",
        "--measure",
        s(&p),
        "--measure",
        s(&q),
    ]);
    let section = &json_of(&out)["theorems"][0];
    assert_eq!(section["inapplicable"], 1);
    assert_eq!(section["failed"], 0);
    assert!(!section["inapplicable_reasons"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn identity_kernel_il_is_inapplicable() {
    let dir = TempDir::new().unwrap();
    let k = write(
        dir.path(),
        "id.json",
        &json!({ "x_space": ["0", "1"], "y_space": ["0", "1"], "rows": [[1.0, 0.0], [0.0, 1.0]] }),
    );
    let px = write(dir.path(), "px.json", &measure(&[0.5, 0.5], "probability"));
    let out = rnd(&[
        "verify",
        "--theorem",
        "il_identity",
        "--kernel",
        s(&k),
        "--px",
        s(&px),
    ]);
    let section = &json_of(&out)["theorems"][0];
    assert_eq!(section["inapplicable"], 1);
    assert_eq!(section["passed"], 0);
}

#[test]
fn info_on_bsc() {
    let dir = TempDir::new().unwrap();
    let (k, px) = bsc_files(dir.path());
    let out = rnd(&["info", s(&k), s(&px)]);
    assert_eq!(out.status.code(), Some(0));
    let r = json_of(&out);
    let i = r["I_nats"].as_f64().unwrap();
    let l = r["L_nats"].as_f64().unwrap();
    assert!((i - 0.130812).abs() < 1e-6);
    assert!((l - 0.143841).abs() < 1e-6);
    assert!((r["I_plus_L_nats"].as_f64().unwrap() - 0.274653).abs() < 1e-6);
    let entries = r["identity_rhs"].as_array().unwrap();
    assert_eq!(entries[0]["Q"], "P_Y");
    assert_eq!(entries[1]["Q"], "counting");
    for e in entries {
        assert!((e["value"].as_f64().unwrap() - (i + l)).abs() <= 1e-9);
    }
    assert!(r.get("I_bits").is_none());

    let bits = json_of(&rnd(&["info", s(&k), s(&px), "--bits"]));
    let ln2 = std::f64::consts::LN_2;
    assert!((bits["I_bits"].as_f64().unwrap() - i / ln2).abs() <= 1e-12);
    assert!((bits["L_bits"].as_f64().unwrap() - l / ln2).abs() <= 1e-12);
}

#[test]
fn info_reports_undefined_reference() {
    let dir = TempDir::new().unwrap();
    let (k, px) = bsc_files(dir.path());
    let q = write(dir.path(), "q.json", &measure(&[1.0, 0.0], "signed"));
    let out = rnd(&["info", s(&k), s(&px), "--q", s(&q)]);
    assert_eq!(out.status.code(), Some(0));
    let r = json_of(&out);
    assert_eq!(r["pass"], true);
    let last = r["identity_rhs"]
        .as_array()
        .unwrap()
        .last()
        .unwrap()
        .clone();
    assert!(last["value"].is_string());
    assert!(last["reason"].is_string());
}

#[test]
fn rnd_command_reports_derivative_and_null_points() {
    let dir = TempDir::new().unwrap();
    let p = write(
        dir.path(),
        "p.json",
        &measure(&[0.5, 0.5, 0.0], "probability"),
    );
    let q = write(
        dir.path(),
        "q.json",
        &measure(&[0.25, 0.25, 0.5], "probability"),
    );
    let r = json_of(&rnd(&["rnd", s(&p), s(&q)]));
    assert_eq!(r["defined"], true);
    assert_eq!(r["rnd"], json!([2.0, 2.0, 0.0]));
    assert_eq!(r["Q_null_points"], json!([]));

    let out = rnd(&["rnd", s(&q), s(&p)]);
    assert_eq!(out.status.code(), Some(0));
    let r = json_of(&out);
    assert_eq!(r["defined"], false);
    assert_eq!(r["rnd"], "undefined (absolute continuity)");
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("report.json");
    let out = rnd(&[
        "verify",
        "--theorem",
        "proportional",
        "--trials",
        "3",
        "--out",
        s(&path),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(written["theorems"][0]["theorem"], "proportional");
}
