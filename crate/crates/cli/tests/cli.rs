use std::fs;
use std::process::{Command, Output};

fn fibervol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fibervol"))
        .args(args)
        .env_remove("FIBERVOL_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Header and first data row of a one-row CSV as (name, value) pairs.
fn csv_row(text: &str) -> Vec<(String, String)> {
    let mut lines = text.lines();
    let head = lines.next().unwrap().split(',').map(str::to_owned);
    let row = lines.next().unwrap().split(',').map(str::to_owned);
    head.zip(row).collect()
}

fn field(text: &str, name: &str) -> f64 {
    csv_row(text)
        .into_iter()
        .find(|(k, _)| k == name)
        .unwrap()
        .1
        .parse()
        .unwrap()
}

#[test]
fn closed_form_volume_so3() {
    let o = fibervol(&[
        "volume",
        "--group",
        "so3",
        "--spectrum",
        "0.5,0.3,0.2",
        "--method",
        "closed-form",
    ]);
    assert!(o.status.success());
    assert!((field(&stdout(&o), "normalized") - 0.97211).abs() < 1e-5);
}

#[test]
fn pure_qubit_has_no_volume() {
    let o = fibervol(&["volume", "--group", "su2", "--spectrum", "1,0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(field(&text, "normalized").abs() <= field(&text, "estimator_error"));
}

#[test]
fn exit_codes() {
    let bad = fibervol(&["volume", "--group", "so3", "--spectrum", "0.5,0.6,0.1"]);
    assert_eq!(bad.status.code(), Some(2));
    let neg = fibervol(&["entropy", "--spectrum", "1.5,-0.5"]);
    assert_eq!(neg.status.code(), Some(2));
    let mismatch = fibervol(&["volume", "--group", "su2", "--spectrum", "0.5,0.3,0.2"]);
    assert_eq!(mismatch.status.code(), Some(3));
    let point = fibervol(&[
        "metric",
        "--group",
        "so3",
        "--spectrum",
        "0.5,0.3,0.2",
        "--point",
        "0.1,0.2",
    ]);
    assert_eq!(point.status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let target = blocker.join("out");
    let o = fibervol(&[
        "coarse-grain",
        "--ell",
        "5",
        "--k",
        "2",
        "--output",
        target.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));
    let o = fibervol(&[
        "entropy",
        "--spectrum",
        "0.5,0.5",
        "--output",
        target.join("e.csv").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn json_and_csv_agree() {
    for args in [
        vec![
            "volume",
            "--group",
            "so3",
            "--spectrum",
            "0.6,0.3,0.1",
            "--budget",
            "8000",
        ],
        vec![
            "volume",
            "--group",
            "son",
            "--spectrum",
            "0.4,0.3,0.2,0.1",
            "--budget",
            "5000",
            "--seed",
            "3",
        ],
        vec!["entropy", "--spectrum", "0.5,0.3,0.2"],
    ] {
        let csv = stdout(&fibervol(&args));
        let mut json_args = args.clone();
        json_args.extend(["--format", "json"]);
        let json: serde_json::Value = serde_json::from_str(&stdout(&fibervol(&json_args))).unwrap();
        for (k, v) in csv_row(&csv) {
            let Ok(x) = v.parse::<f64>() else { continue };
            let y = json[&k].as_f64().unwrap_or_else(|| panic!("{k} missing"));
            assert_eq!(x.to_bits(), y.to_bits(), "{k}");
        }
    }
}

#[test]
fn coarse_grain_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = fibervol(&["coarse-grain", "--ell", "5", "--k", "2", "--output", out]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("volume: top bins"));
    let cells = fs::read_to_string(dir.path().join("cells_volume.csv")).unwrap();
    assert_eq!(cells.lines().count(), 26);
    for m in ["volume", "linear", "von_neumann"] {
        assert_eq!(
            fs::read_to_string(dir.path().join(format!("bins_{m}.csv")))
                .unwrap()
                .lines()
                .count(),
            3
        );
    }

    // identical flags, identical bytes
    let again = tempfile::tempdir().unwrap();
    fibervol(&[
        "coarse-grain",
        "--ell",
        "5",
        "--k",
        "2",
        "--output",
        again.path().to_str().unwrap(),
    ]);
    for f in [
        "bins_volume.csv",
        "cells_linear.csv",
        "cells_von_neumann.csv",
    ] {
        assert_eq!(
            fs::read(dir.path().join(f)).unwrap(),
            fs::read(again.path().join(f)).unwrap()
        );
    }

    let j = tempfile::tempdir().unwrap();
    fibervol(&[
        "coarse-grain",
        "--ell",
        "5",
        "--k",
        "2",
        "--measure",
        "volume",
        "--format",
        "json",
        "--output",
        j.path().to_str().unwrap(),
    ]);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(j.path().join("coarse_volume.json")).unwrap())
            .unwrap();
    let bins = fs::read_to_string(dir.path().join("bins_volume.csv")).unwrap();
    for (line, bin) in bins.lines().skip(1).zip(report["bins"].as_array().unwrap()) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(
            cols[4].parse::<f64>().unwrap(),
            bin["fraction"].as_f64().unwrap()
        );
        assert_eq!(cols[5].parse::<f64>().ok(), bin["mean_svn_norm"].as_f64());
    }
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fibervol"))
        .args(["scaling", "--n-list", "3,5", "--curve-samples", "11"])
        .env("FIBERVOL_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let table = fs::read_to_string(dir.path().join("scaling.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    let curve = fs::read_to_string(dir.path().join("vnorm_curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 23);
}

#[test]
fn monte_carlo_is_reproducible() {
    let args = [
        "volume",
        "--group",
        "son",
        "--spectrum",
        "0.4,0.3,0.2,0.1",
        "--method",
        "monte-carlo",
        "--budget",
        "20000",
        "--seed",
        "7",
    ];
    let a = stdout(&fibervol(&args));
    assert_eq!(a, stdout(&fibervol(&args)));
    let mut other = args;
    other[9] = "8";
    assert_ne!(a, stdout(&fibervol(&other)));
}

#[test]
fn matrix_input_matches_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rho.txt");
    // eigenvalues 0.7 and 0.3
    fs::write(&path, "2\n0.5+0j 0-0.2j\n0+0.2j 0.5+0j\n").unwrap();
    let m = stdout(&fibervol(&["entropy", "--matrix", path.to_str().unwrap()]));
    let s = stdout(&fibervol(&["entropy", "--spectrum", "0.7,0.3"]));
    for k in ["s_vn", "s_lin", "v_norm"] {
        assert!((field(&m, k) - field(&s, k)).abs() < 1e-12, "{k}");
    }
    fs::write(&path, "2\n0.5 0.3\n0.1 0.5\n").unwrap();
    let o = fibervol(&["entropy", "--matrix", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_default_suites() {
    let o = fibervol(&["validate", "--threads", "1"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    for s in ["metric", "derivatives", "partial-trace", "volume"] {
        assert!(
            text.lines().any(|l| l.starts_with(s) && l.contains("PASS")),
            "{s}"
        );
    }
    let j = fibervol(&["validate", "--suite", "partial-trace", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&j)).unwrap();
    assert_eq!(v[0]["passed"], serde_json::Value::Bool(true));
}

#[test]
fn metric_at_origin() {
    let o = fibervol(&[
        "metric",
        "--group",
        "so3",
        "--spectrum",
        "0.3333333333333333,0.3333333333333333,0.3333333333333334",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let want = (2.0f64 / 3.0).powf(1.5);
    assert!((v["volume_element"].as_f64().unwrap() - want).abs() < 1e-12);
}
