use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ctfield::measures::{quadrature_segment, save_measure_csv};
use tempfile::TempDir;

fn ctfield(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctfield")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn error_line(out: &Output) -> serde_json::Value {
    let err = String::from_utf8_lossy(&out.stderr);
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "stderr: {err}");
    serde_json::from_str(lines[0]).expect("JSON error line")
}

#[test]
fn missing_input_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = ctfield(&["--out", s(dir.path()), "ctf", "--input", "/nonexistent/measure.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["error"], "config");
}

#[test]
fn bad_arguments_and_configs_exit_with_2() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"seed": 1, "no_such_field": 3}"#).unwrap();
    for args in [
        vec!["--config", s(&cfg), "gen", "three-lines"],
        vec!["--bogus-flag"],
        vec!["--out", s(dir.path()), "ctf", "--input", "x.csv", "--grid", "0,1,0"],
        vec!["--out", s(dir.path()), "--threads", "0", "gen", "circle"],
    ] {
        let out = ctfield(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(error_line(&out)["error"], "config");
    }
}

#[test]
fn inconsistent_surface_fit_exits_with_3() {
    // A straight line in R^3 does not follow the surface model.
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("line3.csv");
    save_measure_csv(&quadrature_segment(&[-1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], 1e-4).unwrap(), &input).unwrap();
    let out = ctfield(&["--out", s(dir.path()), "curvature", "--input", s(&input), "--point", "0,0,0"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(error_line(&out)["error"], "numerical");
}

#[test]
fn generated_data_and_clustering_are_reproducible() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for dir in [&a, &b] {
        let out = ctfield(&["--seed", "5", "--out", s(dir.path()), "gen", "noisy-lines", "--json"]);
        assert!(out.status.success());
        let input = dir.path().join("noisy_lines.csv");
        let out = ctfield(&[
            "--out",
            s(dir.path()),
            "cluster",
            "--input",
            s(&input),
            "--kernel",
            "gaussian",
            "--sigma",
            "0.51",
            "--gamma",
            "3e-5",
            "--k",
            "80",
            "--topk",
            "3",
            "--svg",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["noisy_lines.csv", "noisy_lines.json", "labels.csv", "dendrogram.csv", "cluster.json", "dendrogram.svg"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join("cluster.json")).unwrap()).unwrap();
    assert_eq!(report["k"], 3);
    let n = report["n_points"].as_u64().unwrap() as usize;
    let dendro = fs::read_to_string(a.path().join("dendrogram.csv")).unwrap();
    assert_eq!(dendro.lines().next().unwrap(), "a,b,height,size");
    assert_eq!(dendro.lines().count(), n);
    let labels = fs::read_to_string(a.path().join("labels.csv")).unwrap();
    assert_eq!(labels.lines().next().unwrap(), "x1,x2,cluster,truth");
}

#[test]
fn converge_is_reproducible_from_seed() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for dir in [&a, &b] {
        let out = ctfield(&["--seed", "3", "--out", s(dir.path()), "converge", "--replicates", "1", "--n-ladder", "10,100,1000"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["converge.csv", "converge.json", "converge.svg"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"field": {"sigma": 0.25, "kernel": {"name": "gaussian"}}}"#).unwrap();
    let out = ctfield(&["--out", s(dir.path()), "gen", "circle", "--n", "500"]);
    assert!(out.status.success());
    let input = dir.path().join("circle.csv");
    let grid = "-1.5,1.5,-1.5,1.5,5,5";
    let out = ctfield(&["--config", s(&cfg), "--out", s(dir.path()), "ctf", "--input", s(&input), "--grid", grid]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["sigma"], 0.25);
    let out =
        ctfield(&["--config", s(&cfg), "--out", s(dir.path()), "ctf", "--input", s(&input), "--grid", grid, "--sigma", "0.4"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["sigma"], 0.4);
}

#[test]
fn field_commands_write_tables_and_plots() {
    let dir = TempDir::new().unwrap();
    let d = s(dir.path());
    assert!(ctfield(&["--out", d, "gen", "circle", "--n", "2000"]).status.success());
    let input = dir.path().join("circle.csv");
    let grid = "-1.5,1.5,-1.5,1.5,6,6";
    for cmd in ["ctf", "spectrum", "frechet", "flow"] {
        let out = ctfield(&[
            "--threads", "1", "--out", d, cmd, "--input", s(&input), "--kernel", "gaussian", "--sigma", "0.5", "--grid", grid, "--svg",
        ]);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let csv = fs::read_to_string(dir.path().join(format!("{cmd}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 37, "{cmd}");
        assert!(dir.path().join(format!("{cmd}.json")).exists());
    }
    assert!(fs::read_to_string(dir.path().join("ctf.svg")).unwrap().contains("<ellipse"));
    assert!(dir.path().join("frechet.svg").exists());
    let frechet = fs::read_to_string(dir.path().join("frechet.csv")).unwrap();
    assert_eq!(frechet.lines().next().unwrap(), "x_1,x_2,sigma,V");
}

#[test]
fn aligned_circle_curvature_via_cli() {
    let dir = TempDir::new().unwrap();
    let d = s(dir.path());
    assert!(ctfield(&["--out", d, "gen", "circle", "--radius", "2", "--ladder", "0.05,0.04,0.03", "--spacing", "1e-5"])
        .status
        .success());
    let input = dir.path().join("circle.csv");
    let out = ctfield(&["--out", d, "curvature", "--input", s(&input), "--point", "2,0"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let k = v["kappa_abs"].as_f64().unwrap();
    assert!((k - 0.5).abs() < 0.05, "{k}");
}

#[test]
fn stability_report_for_probability_measures() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    fs::write(&a, "x1,x2,weight\n0,0,0.5\n1,0,0.5\n").unwrap();
    fs::write(&b, "x1,x2,weight\n0,0.1,0.5\n1,-0.1,0.5\n").unwrap();
    let out = ctfield(&[
        "--out", s(dir.path()), "stability", "--alpha", s(&a), "--beta", s(&b), "--kernel", "gaussian", "--sigma", "0.5",
        "--grid", "-1,2,-1,1,7,5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!((v["wasserstein"].as_f64().unwrap() - 0.1).abs() < 1e-12);
}
