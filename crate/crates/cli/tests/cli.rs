use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_soph-pricing"))
}

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn soph-pricing")
}

fn ok_stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect();
    (header, rows)
}

fn col(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn sweep_uniform_grid() {
    let (h, rows) = csv_rows(&ok_stdout(&["sweep", "--dist", "uniform", "--mu", "0:1:0.01"]));
    assert_eq!(h.join(","), "schema_version,mu,p1,t,p2A,p2R_lo,p2R_hi,alpha_lo,regime,rev,rev_naive,rev_soph,welfare");
    assert_eq!(rows.len(), 101);
    assert!(rows.iter().all(|r| r[0] == "1"));
    let rev = col(&h, &rows, "rev");
    assert!((rev[0] - 4.0 / 7.0).abs() <= 1e-5);
    assert!((rev[100] - 0.45).abs() <= 1e-5);
}

#[test]
fn sweep_power_json_has_increasing_sophisticated_suffix() {
    let v: Value =
        serde_json::from_str(&ok_stdout(&["sweep", "--dist", "power:2", "--mu", "0.5:1:0.05", "--format", "json"]))
            .unwrap();
    assert_eq!(v["schema_version"], 1);
    assert!(v["regime_boundary"].is_number());
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 11);
    let start = rows.iter().rposition(|r| r["regime"] == "naive").map_or(0, |k| k + 1);
    let suffix: Vec<f64> = rows[start..].iter().map(|r| r["rev"].as_f64().unwrap()).collect();
    assert!(!suffix.is_empty());
    assert!(suffix.windows(2).all(|w| w[1] > w[0]), "{suffix:?}");
}

#[test]
fn usage_errors_exit_nonzero_without_output() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("rows.csv");
    let o = out.to_str().unwrap();
    for args in [
        vec!["sweep", "--mu", "1:0:0.1", "--out", o],
        vec!["sweep", "--mu", "0:1:0.5", "--dist", "lognormal", "--out", o],
        vec!["solve", "--mu", "0:1:0.5", "--out", o],
        vec!["sweep", "--mu", "0.5", "--workers", "0", "--out", o],
    ] {
        let r = run(&args);
        assert!(!r.status.success(), "{args:?}");
        assert!(!out.exists(), "{args:?} left a file behind");
    }
}

#[test]
fn failed_run_keeps_previous_output() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("rows.csv");
    std::fs::write(&out, "previous").unwrap();
    let table = dir.path().join("bad.csv");
    std::fs::write(&table, "value,cdf\n0,0\n0.5,0.9\n1,1\n").unwrap();
    let dist = format!("table:{}", table.display());
    let r = run(&["sweep", "--dist", &dist, "--mu", "0.5", "--out", out.to_str().unwrap()]);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("error"));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "previous");
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().filter_map(|e| e.ok()).collect();
    assert_eq!(leftovers.len(), 2);
}

#[test]
fn out_file_matches_stdout() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("c.csv");
    let args = ["commitment", "--mu", "0:1:0.5"];
    let stdout = ok_stdout(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", out.to_str().unwrap()]);
    assert!(ok_stdout(&with_out).is_empty());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), stdout);
}

#[test]
fn simulate_is_reproducible_and_consistent() {
    let args = ["simulate", "--dist", "uniform", "--mu", "1", "--trials", "1000000", "--seed", "7"];
    let a = ok_stdout(&args);
    let mut seq = args.to_vec();
    seq.extend(["--workers", "1"]);
    assert_eq!(a, ok_stdout(&args));
    assert_eq!(a, ok_stdout(&seq));
    let (h, rows) = csv_rows(&a);
    let mean = col(&h, &rows, "rev_mean")[0];
    let se = col(&h, &rows, "rev_stderr")[0];
    assert!((mean - 0.45).abs() <= 4.0 * se, "{mean} ± {se}");
}

#[test]
fn commitment_table() {
    let (h, rows) = csv_rows(&ok_stdout(&["commitment", "--dist", "uniform", "--mu", "0:1:0.05"]));
    assert_eq!(h.join(","), "schema_version,mu,p1,p2R,p2A,t,rev");
    assert_eq!(rows.len(), 21);
    let rev = col(&h, &rows, "rev");
    assert!(rev.windows(2).all(|w| w[1] <= w[0]), "{rev:?}");
    assert!((rev[0] - 4.0 / 7.0).abs() <= 1e-4 && (rev[20] - 0.5).abs() <= 1e-4);
    let (p1, p2r, p2a) = (col(&h, &rows, "p1"), col(&h, &rows, "p2R"), col(&h, &rows, "p2A"));
    assert!((0..rows.len()).all(|i| p2r[i] <= p1[i] && p1[i] <= p2a[i]));
}

#[test]
fn linear_oracle_agrees_with_sweep() {
    let args = ["--mu", "0:1:0.1"];
    let (h, closed) = csv_rows(&ok_stdout(&["linear-oracle", args[0], args[1]]));
    let (h2, solved) = csv_rows(&ok_stdout(&["sweep", args[0], args[1]]));
    assert_eq!(h, h2);
    for name in ["p1", "rev"] {
        for (a, b) in col(&h, &closed, name).iter().zip(col(&h, &solved, name)) {
            assert!((a - b).abs() <= 1e-5, "{name}: {a} vs {b}");
        }
    }
    let v: Value = serde_json::from_str(&ok_stdout(&["linear-oracle", "--mu", "0.5", "--format", "json"])).unwrap();
    assert!((v["mu_bar"].as_f64().unwrap() - 0.630209).abs() < 1e-6);
}

#[test]
fn solve_emits_json_by_default() {
    let v: Value = serde_json::from_str(&ok_stdout(&["solve", "--mu", "0.81"])).unwrap();
    assert_eq!(v["schema_version"], 1);
    let eq = &v["equilibrium"];
    assert_eq!(eq["regime"], "sophisticated");
    assert!((eq["cont"]["p1"].as_f64().unwrap() - 0.28519).abs() < 1e-4);
    let (_, rows) = csv_rows(&ok_stdout(&["solve", "--mu", "0.81", "--format", "csv"]));
    assert_eq!(rows.len(), 1);
}

fn verify(model: &str, extra: &[&str]) -> Value {
    let path = models().join(model);
    let mut args = vec!["verify-infinite", "--model", path.to_str().unwrap()];
    args.extend(extra);
    serde_json::from_str(&ok_stdout(&args)).unwrap()
}

#[test]
fn verify_infinite_example() {
    let v = verify("example3pt.toml", &[]);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["profile"], "example3pt");
    assert!((v["revenue_sophisticated"].as_f64().unwrap() - 26.0 / 3.0).abs() <= 1e-12);
    assert_eq!(v["clean"], true);
    assert_eq!(v["properties"]["naive_justified"], true);
    assert_eq!(v["properties"]["above_baseline"], true);
    assert!((v["bounds"]["revenue_lower_bound"].as_f64().unwrap() - 4.0 / 3.0).abs() <= 1e-12);
    assert!(v.get("epsilon_search").is_none());
}

#[test]
fn verify_infinite_no_learning_and_epsilon_search() {
    let v = verify("example3pt.toml", &["--profile", "no-learning"]);
    assert_eq!(v["clean"], false);
    let s = &v["certificate"]["seller_violations"][0];
    assert_eq!(s["prescribed_price"], 0.0);

    let v = verify("all_sophisticated_zero.json", &["--profile", "no-learning"]);
    assert_eq!(v["clean"], true);

    let v = verify("example3pt.toml", &["--epsilon-search"]);
    let e = v["epsilon_search"]["largest_certified"].as_f64().unwrap();
    assert!((0.05..1.0).contains(&e), "{e}");
}

#[test]
fn verify_infinite_rejects_bad_models() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("extra.toml", "values = [1.0]\nprobs_naive = [1.0]\nprobs_soph = [1.0]\nmu = 0.5\ndelta = 0.5\nseed = 3\n"),
        ("short.toml", "values = [1.0, 2.0]\nprobs_naive = [1.0]\nprobs_soph = [1.0]\nmu = 0.5\ndelta = 0.5\n"),
        ("broken.json", "{\"values\": [1.0,"),
        ("model.yaml", "values: [1.0]\n"),
    ];
    for (name, text) in cases {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        let r = run(&["verify-infinite", "--model", p.to_str().unwrap()]);
        assert!(!r.status.success(), "{name} accepted");
    }
    let p = models().join("example3pt.toml");
    let r = run(&["verify-infinite", "--model", p.to_str().unwrap(), "--format", "csv"]);
    assert!(!r.status.success());
}
