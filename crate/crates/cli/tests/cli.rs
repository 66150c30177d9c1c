use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn rrg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rrg"))
        .args(args)
        .env("RRG_JOBS", "1")
        .output()
        .expect("spawn rrg")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rrg-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn oracle_edge_probability_is_exact() {
    let v = stdout_json(&rrg(&["oracle", "--n", "4", "--d", "2", "--edge", "0,1"]));
    assert_eq!(v["value"], "2/3");
    let v = stdout_json(&rrg(&["oracle", "--n", "6", "--d", "2", "--count"]));
    assert_eq!(v["value"], "70");
    let v = stdout_json(&rrg(&[
        "oracle", "--n", "6", "--d", "2", "--missing", "0,1", "--edge", "0,2",
    ]));
    assert_eq!(v["value"], "1/2");
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    assert_eq!(rrg(&["oracle", "--n", "4", "--d", "2"]).status.code(), Some(2));
    assert_eq!(rrg(&["oracle", "--n", "4", "--d", "2", "--edge", "1,1"]).status.code(), Some(2));
    assert_eq!(rrg(&["oracle", "--n", "40", "--d", "3", "--count"]).status.code(), Some(2));
    assert_eq!(rrg(&["no-such-command"]).status.code(), Some(2));

    let bad = scratch("bad-grid.json");
    fs::write(&bad, r#"{"n": [10], "d": [3], "k": [3], "seeds": [1]}"#).unwrap();
    let out = rrg(&["trace-experiment", "--grid", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn trace_experiment_is_reproducible() {
    let grid = scratch("grid.json");
    fs::write(&grid, r#"{"n": [20, 30], "d": [3, 4], "k": [2, 4], "seeds": [1, 2]}"#).unwrap();
    let run = |name: &str, stamp: bool| {
        let path = scratch(name);
        let mut args = vec!["trace-experiment", "--grid", grid.to_str().unwrap()];
        let out_path = path.to_str().unwrap().to_string();
        args.extend(["--out", &out_path]);
        if !stamp {
            args.push("--no-timestamp");
        }
        let out = rrg(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        fs::read(&path).unwrap()
    };
    let a = run("a.csv", false);
    let b = run("b.csv", false);
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("n,d,k,seed,lambda,ratio,trace,bound_log\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 2 * 2);

    let stamped = String::from_utf8(run("c.csv", true)).unwrap();
    let (first, rest) = stamped.split_once('\n').unwrap();
    assert!(first.starts_with("# generated"));
    assert_eq!(rest, text);
}

#[test]
fn fourier_reads_a_table() {
    let input = scratch("table.json");
    fs::write(&input, r#"{"t": 2, "values": [1.0, 1.1, 1.2, 1.25]}"#).unwrap();
    let v = stdout_json(&rrg(&["fourier", "--input", input.to_str().unwrap(), "--reciprocal"]));
    let coeffs: Vec<f64> = serde_json::from_value(v["coefficients"].clone()).unwrap();
    let expected = [1.0, 0.1, 0.2, -0.05];
    for (c, e) in coeffs.iter().zip(expected) {
        assert!((c - e).abs() < 1e-12);
    }
    let inv: Vec<f64> = serde_json::from_value(v["reciprocal"].clone()).unwrap();
    assert!((inv[0] - 1.0).abs() < 1e-12);
    assert!((inv[3] - (1.0 / 1.25 - 1.0 / 1.1 - 1.0 / 1.2 + 1.0)).abs() < 1e-9);

    let diverging = scratch("diverging.json");
    fs::write(&diverging, r#"{"t": 1, "values": [1.0, 6.0]}"#).unwrap();
    let out = rrg(&["fourier", "--input", diverging.to_str().unwrap(), "--reciprocal"]);
    assert!(!out.status.success());
}

#[test]
fn estimate_tracks_oracle() {
    let input = scratch("estimate.json");
    fs::write(
        &input,
        r#"{"n": 8, "d": 3, "missing": [[0, 1]], "queries": [{"edge": [0, 2]}, {"cherry": [0, 2, 3]}]}"#,
    )
    .unwrap();
    let v = stdout_json(&rrg(&["estimate", "--input", input.to_str().unwrap()]));
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    assert_eq!(results[0]["oracle"], "1/2");
    for r in results {
        assert!(r["relative_error"].as_f64().unwrap() < 0.05);
    }
}

#[test]
fn spectrum_round_trips_a_saved_graph() {
    let saved = scratch("g.txt");
    let sampled = rrg(&[
        "spectrum", "--n", "30", "--d", "4", "--k", "4", "--save", saved.to_str().unwrap(),
        "--no-timestamp",
    ]);
    assert!(sampled.status.success());
    let read = rrg(&["spectrum", "--graph", saved.to_str().unwrap(), "--k", "4", "--no-timestamp"]);
    assert!(read.status.success());
    let row = |o: &Output| String::from_utf8_lossy(&o.stdout).lines().nth(1).unwrap().to_string();
    let tail = |s: String| s.split(',').skip(4).collect::<Vec<_>>().join(",");
    assert_eq!(tail(row(&sampled)), tail(row(&read)));
}

#[test]
fn walks_table_has_header_and_rows() {
    let out = rrg(&["walks", "--n", "4", "--k", "2,4", "--d", "2", "--no-timestamp"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,t,t2,m,b,r,count,bound_log,worst_ratio"));
    let total: u64 = lines.map(|l| l.split(',').nth(6).unwrap().parse::<u64>().unwrap()).sum();
    // Closed non-lazy walks on K_4: 3^k + 3.
    assert_eq!(total, (9 + 3) + (81 + 3));
}
