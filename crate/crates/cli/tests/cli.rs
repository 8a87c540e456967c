use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;
use tempfile::TempDir;

fn capdisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capdisc"))
        .args(args)
        .env_remove("CAPDISC_THREADS")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn figure_one() -> String {
    let h: f64 = 0.5e-3;
    format!("1 0 0\n{} {} 0\n{} {} 0\n", -h.cos(), h.sin(), -h.cos(), -h.sin())
}

#[test]
fn compute_single_point() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "one.txt", "# one point\n0 0 1\n");
    let v = json(&capdisc(&["compute", "--points", s(&p), "--threads", "1"]));
    assert_eq!(v["delta"].as_f64(), Some(1.0));
    assert_eq!(v["N"].as_u64(), Some(1));
    assert_eq!(v["threads"].as_u64(), Some(1));
}

#[test]
fn report_structure_is_stable() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "fig.txt", &figure_one());
    let out_path = dir.path().join("report.json");
    let out = capdisc(&["compute", "--points", s(&p), "--output", s(&out_path)]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    let mut expected = [
        "delta",
        "delta1",
        "delta0",
        "delta_tilde",
        "argmax",
        "n",
        "N",
        "min_bound",
        "subset_space_size",
        "subsets_enumerated",
        "subsets_pruned",
        "subsets_skipped_rank",
        "subsets_skipped_gamma",
        "gamma_tol",
        "rank_tol",
        "threads",
        "wall_time_seconds",
        "tool_version",
    ];
    keys.sort_unstable();
    expected.sort_unstable();
    assert_eq!(keys, expected);
    let mut argmax: Vec<&str> = v["argmax"].as_object().unwrap().keys().map(String::as_str).collect();
    argmax.sort_unstable();
    assert_eq!(
        argmax,
        ["cap_measure", "empirical", "family", "negated", "subset", "t", "w"]
    );
    let delta = v["delta"].as_f64().unwrap();
    assert!(delta > 2.0 / 3.0 - 1e-2 && delta < 2.0 / 3.0);
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("\"gamma_tol\": 1.0000000000000000e-10"));
}

#[test]
fn figure_one_verifies() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "fig.txt", &figure_one());
    let out = capdisc(&["verify", "--points", s(&p)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("PASS"));
}

#[test]
fn compute_on_three_sphere_sample() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("s3.txt");
    let out = capdisc(&[
        "sample",
        "--scheme",
        "gauss-mc",
        "--dim",
        "4",
        "--count",
        "100",
        "--seed",
        "3",
        "--out",
        s(&p),
    ]);
    assert!(out.status.success());
    let v = json(&capdisc(&["compute", "--points", s(&p)]));
    assert!(v["wall_time_seconds"].as_f64().unwrap() > 0.0);
    assert_eq!(v["n"].as_u64(), Some(4));
    assert_eq!(v["min_bound"].as_u64(), Some(4));
    assert!(v["subsets_enumerated"].as_u64().unwrap() > 0);
    assert!(v["delta"].as_f64().unwrap() >= v["delta_tilde"].as_f64().unwrap());
}

#[test]
fn lower_bound_command() {
    let dir = TempDir::new().unwrap();
    let one = write(&dir, "one.txt", "0.6 0.8\n");
    let v = json(&capdisc(&["lower-bound", "--points", s(&one)]));
    assert_eq!(v["delta_tilde"].as_f64(), Some(1.0));
    assert_eq!(v["directions"].as_array().unwrap().len(), 1);

    let p = dir.path().join("mc.txt");
    capdisc(&[
        "sample",
        "--scheme",
        "gauss-mc",
        "--dim",
        "3",
        "--count",
        "40",
        "--seed",
        "9",
        "--out",
        s(&p),
    ]);
    let lb = json(&capdisc(&["lower-bound", "--points", s(&p)]));
    let ex = json(&capdisc(&["compute", "--points", s(&p)]));
    assert!(lb["delta_tilde"].as_f64().unwrap() <= ex["delta"].as_f64().unwrap());
    assert_eq!(lb["delta_tilde"], ex["delta_tilde"]);

    let big = dir.path().join("big.txt");
    capdisc(&[
        "sample",
        "--scheme",
        "lambert-mc",
        "--dim",
        "3",
        "--count",
        "2000",
        "--out",
        s(&big),
    ]);
    let t = Instant::now();
    let out = capdisc(&["lower-bound", "--points", s(&big)]);
    assert!(out.status.success());
    assert!(t.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn sample_files() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for p in [&a, &b] {
        let out = capdisc(&[
            "sample",
            "--scheme",
            "gauss-mc",
            "--dim",
            "3",
            "--count",
            "10",
            "--seed",
            "7",
            "--out",
            s(p),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let out = capdisc(&["sample", "--scheme", "lambert-sobol", "--dim", "3", "--count", "100"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 100);
    for r in &rows {
        assert!((r.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < 1e-12);
    }

    let g = dir.path().join("g.txt");
    assert!(capdisc(&[
        "sample",
        "--scheme",
        "gauss-sobol",
        "--dim",
        "5",
        "--count",
        "50",
        "--out",
        s(&g)
    ])
    .status
    .success());
    let v = json(&capdisc(&["lower-bound", "--points", s(&g)]));
    assert_eq!(v["N"].as_u64(), Some(50));
    assert_eq!(v["n"].as_u64(), Some(5));
}

#[test]
fn sample_rejects_lambert_off_two_sphere() {
    let out = capdisc(&["sample", "--scheme", "lambert-mc", "--dim", "4", "--count", "5"]);
    assert_eq!(out.status.code(), Some(4));
    let out = capdisc(&["sample", "--scheme", "halton", "--dim", "3", "--count", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn input_errors() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.txt", "1 0 0\n0 1 zero\n");
    let out = capdisc(&["compute", "--points", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let ragged = write(&dir, "ragged.txt", "1 0 0\n0 1\n");
    assert_eq!(capdisc(&["compute", "--points", s(&ragged)]).status.code(), Some(2));

    let off = write(&dir, "off.txt", "1 0\n0.5 0.5\n0 1\n0 -2\n");
    let out = capdisc(&["compute", "--points", s(&off)]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("point 1 (line 2)") && err.contains("point 3 (line 4)"),
        "{err}"
    );

    let missing = dir.path().join("missing.txt");
    assert_eq!(capdisc(&["compute", "--points", s(&missing)]).status.code(), Some(2));
}

#[test]
fn verify_cases() {
    let dir = TempDir::new().unwrap();
    let pair = write(&dir, "pair.txt", "1 0\n-1 0\n");
    let out = capdisc(&["verify", "--points", s(&pair), "--grid-resolution", "1e-4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&capdisc(&["compute", "--points", s(&pair)]));
    assert!((v["delta"].as_f64().unwrap() - 0.5).abs() < 1e-3);

    let dup = write(
        &dir,
        "dup.txt",
        "1 0 0\n1 0 0\n0 1 0\n0 -1 0\n0 -1 0\n0.6 0 0.8\n-0.6 0 -0.8\n",
    );
    assert_eq!(capdisc(&["verify", "--points", s(&dup)]).status.code(), Some(0));

    let s3 = write(&dir, "s3.txt", "1 0 0 0\n0 1 0 0\n");
    assert_eq!(capdisc(&["verify", "--points", s(&s3)]).status.code(), Some(4));
}

#[test]
fn threads_from_environment() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "fig.txt", &figure_one());
    let out = Command::new(env!("CARGO_BIN_EXE_capdisc"))
        .args(["compute", "--points", s(&p)])
        .env("CAPDISC_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(json(&out)["threads"].as_u64(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_capdisc"))
        .args(["compute", "--points", s(&p), "--threads", "2"])
        .env("CAPDISC_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(json(&out)["threads"].as_u64(), Some(2));
}

#[test]
fn experiment_outputs() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("exp.csv");
    let out = capdisc(&[
        "experiment",
        "--scheme",
        "all",
        "--dim",
        "3",
        "--sizes",
        "10:30:10",
        "--seeds",
        "0,1",
        "--out",
        s(&csv),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "scheme,n,N,seeds,delta,delta_tilde,ratio,wall_time_seconds,status"
    );
    assert_eq!(lines.len(), 13);
    assert!(lines[1].starts_with("gauss-mc,3,10,2,"));
    assert!(lines[12].starts_with("lambert-sobol,3,30,2,"));
    let ll = std::fs::read_to_string(dir.path().join("exp_loglog.csv")).unwrap();
    assert_eq!(ll.lines().next(), Some("scheme,N,log10_N,log10_delta"));
    assert_eq!(ll.lines().count(), 13);

    let out = capdisc(&[
        "experiment",
        "--scheme",
        "gauss-mc",
        "--sizes",
        "10:20:10",
        "--budget",
        "0",
        "--out",
        s(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",skipped")));

    let out = capdisc(&["experiment", "--scheme", "lambert-mc", "--dim", "4", "--out", s(&csv)]);
    assert_eq!(out.status.code(), Some(4));
}
