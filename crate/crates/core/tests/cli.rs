use std::fs;
use std::path::Path;

use stratdisc::cli::{parse_n_list, run, CliError};
use stratdisc::geometry::Family;
use stratdisc::io::{read_points, read_table};

fn stratdisc(args: &[&str]) -> (Result<i32, CliError>, String) {
    let mut out = Vec::new();
    let res = run(std::iter::once("stratdisc").chain(args.iter().copied()), &mut out);
    (res, String::from_utf8(out).unwrap())
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn sample_then_measure() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    let (res, _) = stratdisc(&[
        "sample",
        "--family",
        "equivolume_diag",
        "--n",
        "64",
        "--seed",
        "42",
        "--out",
        pts.to_str().unwrap(),
    ]);
    assert_eq!(res.unwrap(), 0);
    let ps = read_points(fs::File::open(&pts).unwrap()).unwrap();
    assert_eq!((ps.len(), ps.dim()), (64, 2));

    let manifest = json(&dir.path().join("pts.csv.manifest.json"));
    assert_eq!(manifest["command"], "sample");
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["outputs"][0], pts.to_str().unwrap());

    let again = dir.path().join("again.csv");
    stratdisc(&[
        "sample",
        "--family",
        "equivolume_diag",
        "--n",
        "64",
        "--seed",
        "42",
        "--out",
        again.to_str().unwrap(),
    ])
    .0
    .unwrap();
    assert_eq!(fs::read(&pts).unwrap(), fs::read(&again).unwrap());

    let (res, out) = stratdisc(&["disc", "--points", pts.to_str().unwrap(), "--kind", "l2"]);
    assert_eq!(res.unwrap(), 0);
    let l2: serde_json::Value = serde_json::from_str(&out).unwrap();
    let (_, out) = stratdisc(&[
        "disc",
        "--points",
        pts.to_str().unwrap(),
        "--kind",
        "lp",
        "--p",
        "2",
        "--grid",
        "2048",
    ]);
    let quad: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((l2["value"].as_f64().unwrap() - quad["value"].as_f64().unwrap()).abs() < 1e-4);
    let (_, out) = stratdisc(&["disc", "--points", pts.to_str().unwrap(), "--kind", "star"]);
    let star: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(star["exact"], true);
}

#[test]
fn replicates_go_to_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("part.json");
    fs::write(&spec, r#"{"family": "diag", "dim": 2, "n": 2, "v": [0.7934]}"#).unwrap();
    let out = dir.path().join("reps");
    let (res, _) = stratdisc(&[
        "sample",
        "--partition",
        spec.to_str().unwrap(),
        "--seed",
        "42",
        "--replicates",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.unwrap(), 0);
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);
    let third = fs::read(out.join("replicate_0002.csv")).unwrap();

    // a single replicate drawn on its own matches the batch
    let single = dir.path().join("single.csv");
    stratdisc(&[
        "sample",
        "--partition",
        spec.to_str().unwrap(),
        "--seed",
        "42",
        "--replicate",
        "2",
        "--out",
        single.to_str().unwrap(),
    ])
    .0
    .unwrap();
    assert_eq!(fs::read(single).unwrap(), third);
    assert!(matches!(
        stratdisc(&["sample", "--partition", spec.to_str().unwrap(), "--replicates", "2"]).0,
        Err(CliError::Usage(_))
    ));
}

#[test]
fn partition_file_and_expectation() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("part.json");
    fs::write(&spec, r#"{"family": "jittered", "dim": 2, "n": 4}"#).unwrap();
    let (res, out) = stratdisc(&["expect", "--partition", spec.to_str().unwrap(), "--grid", "512"]);
    assert_eq!(res.unwrap(), 0);
    let r: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((r["value"].as_f64().unwrap() - 0.01909).abs() < 1e-4);
    assert_eq!(r["method"], "quadrature");

    let (_, out) = stratdisc(&[
        "expect",
        "--family",
        "diag",
        "--v",
        "0.7934",
        "--grid",
        "256",
        "--empirical",
        "200",
    ]);
    let r: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["replicates"], 200);
    assert!(r["error_estimate"].as_f64().unwrap() > 0.0);
}

#[test]
fn scan_and_uniformity_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    stratdisc(&[
        "scan",
        "--example",
        "3",
        "--points",
        "21",
        "--out",
        out.to_str().unwrap(),
    ])
    .0
    .unwrap();
    let (header, rows) = read_table(fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(header, ["v", "param", "branch", "value"]);
    assert_eq!(rows.len(), 21);

    let boxes = dir.path().join("boxes.csv");
    fs::write(&boxes, "lo1,lo2,hi1,hi2\n0.1,0.2,0.6,0.5\n0,0,0.5,0.5\n").unwrap();
    let out = dir.path().join("uni.csv");
    stratdisc(&[
        "uniformity",
        "--family",
        "jittered",
        "--boxes",
        boxes.to_str().unwrap(),
        "--n",
        "2..40",
        "--out",
        out.to_str().unwrap(),
    ])
    .0
    .unwrap();
    let (header, rows) = read_table(fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(header[1], "N");
    // squares 4, 9, 16, 25, 36 for each of two boxes
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| (r[3] - r[2]).abs() < 1e-12));
}

#[test]
fn verify_reports_and_sets_status() {
    let (res, out) = stratdisc(&["verify", "geometry"]);
    assert_eq!(res.unwrap(), 0);
    assert!(out.lines().all(|l| l.starts_with("PASS [geometry]")));
}

#[test]
fn usage_errors() {
    assert!(matches!(stratdisc(&["sample", "--n", "4"]).0, Err(CliError::Usage(_))));
    assert!(matches!(stratdisc(&["frobnicate"]).0, Err(CliError::Args(_))));
    assert!(matches!(
        stratdisc(&["reproduce", "table1", "--replicates", "5"]).0,
        Err(CliError::Usage(_))
    ));
    assert!(stratdisc(&["expect", "--family", "diag", "--v", "0.9,0.2"]).0.is_err());
    assert!(stratdisc(&["disc", "--points", "/nonexistent.csv"]).0.is_err());
}

#[test]
fn n_lists() {
    assert_eq!(parse_n_list("2..10", Family::Jittered, 2).unwrap(), [4, 9]);
    assert_eq!(parse_n_list("1..30", Family::Jittered, 3).unwrap(), [1, 8, 27]);
    assert_eq!(parse_n_list("3..5", Family::Vertical, 2).unwrap(), [3, 4, 5]);
    assert_eq!(parse_n_list("4, 16,64", Family::Jittered, 2).unwrap(), [4, 16, 64]);
    assert!(parse_n_list("a..b", Family::Vertical, 2).is_err());
}
