use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use whlab::spaces::Weight;
use whlab::spectra::AnnulusBounds;
use whlab_cli::experiments::default_radii;

fn whlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_whlab")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, doc: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(doc).unwrap()).unwrap();
    path
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn list_builtins_names_families_and_experiments() {
    let o = whlab(&["list-builtins"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["dyadic_zigzag", "orlicz:power", "annulus", "vector-symbol", "weights-report", "samples"] {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn validate_reports_json_pointer_and_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (json!({ "space": { "weight": { "family": "zigzag" } }, "experiment": { "kind": "cutoff", "epsilon": 0.1, "c0": 1, "eta0": 0, "delta": 1 } }), "/space/weight/family"),
        (json!({ "experiment": { "kind": "annulus", "radii": [1.0, "two"] } }), "/experiment/radii/1"),
        (json!({ "experiment": { "kind": "cutoff", "epsilon": 0.1, "c0": 1, "eta0": 0, "delta": 1, "colour": 3 } }), "/experiment/colour"),
        (json!({ "experiment": { "kind": "cutoff", "epsilon": 2.0, "c0": 1, "eta0": 0, "delta": 1 } }), "/experiment/epsilon"),
        (json!({ "experiment": { "kind": "symbol" } }), "/operator"),
        (json!({ "operator": { "kind": "gaussian", "centre": 1 }, "experiment": { "kind": "symbol" } }), "/operator"),
        (
            json!({ "experiment": { "kind": "vector-symbol", "matrix": { "kind": "shift", "by": 1 }, "weight": { "kind": "diagonal", "entries": [{ "poly": ["a"], "rate": 0 }] } } }),
            "/experiment/weight/entries/0/poly/0",
        ),
        (json!({ "grid": { "span": -1, "step": 0.01 }, "experiment": { "kind": "inclusion" } }), "/grid/span"),
    ];
    for (i, (doc, pointer)) in cases.iter().enumerate() {
        let path = write_config(dir.path(), &format!("bad{i}.json"), doc);
        let o = whlab(&["validate", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "case {i}: {}", stderr(&o));
        assert!(stderr(&o).contains(pointer), "case {i}: expected {pointer} in {}", stderr(&o));
    }
}

#[test]
fn malformed_json_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ \"experiment\": ").unwrap();
    let o = whlab(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = whlab(&["run", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn shipped_configs_validate() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        if path.file_name().unwrap() == "schema.json" {
            continue;
        }
        let o = whlab(&["validate", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}: {}", path.display(), stderr(&o));
        seen += 1;
    }
    assert!(seen >= 6);
}

#[test]
fn run_writes_report_tables_and_plotdata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "cutoff.json",
        &json!({ "experiment": { "kind": "cutoff", "epsilon": 0.1, "c0": 2, "eta0": 5, "delta": 1 } }),
    );
    let out = dir.path().join("out");
    let o = whlab(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], json!(true));
    assert_eq!(report["metadata"]["seed"], json!(4));
    assert!(report["metadata"].get("timestamp").is_none());
    let info: Value = serde_json::from_slice(&std::fs::read(out.join("run_info.json")).unwrap()).unwrap();
    assert!(info["timestamp"].is_string());
    let csvs = |sub: &str| std::fs::read_dir(out.join(sub)).map(|d| d.filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv")).count()).unwrap_or(0);
    assert!(csvs("tables") > 0);
    assert!(csvs("plotdata") > 0);
}

#[test]
fn failed_verdict_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "wrong.json",
        &json!({
            "space": { "weight": { "family": "exponential", "beta": 1.0 } },
            "experiment": { "kind": "weights-report", "expect": { "forward": 2.0, "backward": 0.5, "tolerance": 1e-6 } }
        }),
    );
    let o = whlab(&["run", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL rho_forward_error"));
}

#[test]
fn kernel_samples_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let h = 0.01;
    let mut csv = String::from("x,re,im\n");
    for k in 0..=400 {
        let x = -1.0 + k as f64 * h;
        let v = (-(x - 1.0).powi(2) / 0.5).exp() / (0.5 * std::f64::consts::PI).sqrt();
        csv.push_str(&format!("{x},{v},0\n"));
    }
    std::fs::write(dir.path().join("kernel.csv"), csv).unwrap();
    let cfg = write_config(
        dir.path(),
        "samples.json",
        &json!({
            "grid": { "span": 20, "step": 0.01 },
            "operator": { "kind": "samples", "path": "kernel.csv" },
            "experiment": { "kind": "symbol", "levels": 1, "probes": 3 }
        }),
    );
    let o = whlab(&["run", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert!(o.status.success(), "{}\n{}", String::from_utf8_lossy(&o.stdout), stderr(&o));

    std::fs::write(dir.path().join("kernel.csv"), "x,y\n0,1\n").unwrap();
    let o = whlab(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/operator"), "{}", stderr(&o));
}

#[test]
fn default_annulus_radii_bracket_the_annulus() {
    let w = Weight::dyadic_zigzag(1.0);
    let bounds = AnnulusBounds::from_weight(&w, 2.0);
    let r = default_radii(&bounds);
    let min = r.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = r.iter().cloned().fold(0.0, f64::max);
    assert!((min - 0.8 * bounds.inner()).abs() < 1e-12);
    assert!((max - 1.2 * bounds.outer()).abs() < 1e-12);
    assert!(r.windows(2).all(|p| p[0] < p[1]));
}
