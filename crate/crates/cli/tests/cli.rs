use std::process::{Command, Output};

use serde_json::Value;

fn lsf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lsf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json output")
}

#[test]
fn exact_edge_probability_on_k4() {
    let v = json_of(&lsf(&[
        "exact",
        "--n",
        "4",
        "--lambda",
        "1",
        "--include-edge",
        "0,1",
        "--oracle",
    ]));
    assert!((v["probability"].as_f64().unwrap() - 0.4).abs() < 1e-12);
    assert_eq!(v["exact"], "2/5");
    assert_eq!(v["config"]["lambda"], "1");
}

#[test]
fn exact_mixed_events_and_indices() {
    let both = json_of(&lsf(&[
        "exact",
        "--n",
        "4",
        "--lambda",
        "1",
        "--include-edge",
        "0,1",
        "--include-edge",
        "2,3",
    ]));
    assert!((both["probability"].as_f64().unwrap() - 0.16).abs() < 1e-12);
    // Edge 5 of K_4 is {2,3}.
    let by_index = json_of(&lsf(&[
        "exact",
        "--n",
        "4",
        "--lambda",
        "1",
        "--include-index",
        "0",
        "--exclude-index",
        "5",
    ]));
    assert!((by_index["probability"].as_f64().unwrap() - 0.24).abs() < 1e-12);
}

#[test]
fn exact_queries() {
    let cp = json_of(&lsf(&[
        "exact",
        "--n",
        "3",
        "--lambda",
        "1",
        "--query",
        "char-poly",
    ]));
    assert_eq!(cp["coefficients"], serde_json::json!(["0", "9", "6", "1"]));
    assert_eq!(cp["value"], "16");
    let law = json_of(&lsf(&[
        "exact",
        "--n",
        "4",
        "--lambda",
        "1",
        "--query",
        "forest-law",
    ]));
    assert_eq!(law["atoms"], 38);
    assert_eq!(law["partition_function"], "125");
    let shape = json_of(&lsf(&[
        "exact",
        "--n",
        "4",
        "--lambda",
        "1",
        "--query",
        "shape-law",
        "--h",
        "1",
    ]));
    assert_eq!(shape["law"]["(())"], "72/125");
    let mean = json_of(&lsf(&[
        "exact",
        "--n",
        "5",
        "--lambda",
        "2",
        "--query",
        "mean-components",
        "--oracle",
    ]));
    assert_eq!(mean["exact"], "15/7");
    assert!((mean["mean"].as_f64().unwrap() - 15.0 / 7.0).abs() < 1e-12);
}

#[test]
fn verify_default_budget_passes() {
    let out = lsf(&["verify"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["passed"], true);
    assert!(v["report"]["max_error"].as_f64().unwrap() < 1e-10);
    assert!(v["report"]["suites"].as_array().unwrap().len() >= 10);
}

#[test]
fn convergence_table_gaps_shrink() {
    let out = lsf(&[
        "convergence-table",
        "--alpha",
        "1",
        "--h",
        "1",
        "--n",
        "100,1000,10000",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some("shape,n,lambda,finite,limit,gap"));
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert!(!rows.is_empty());
    for chunk in rows.chunks(3) {
        let gaps: Vec<f64> = chunk.iter().map(|r| r[5].parse().unwrap()).collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{chunk:?}");
        assert!(gaps[2] <= 0.01);
    }
}

#[test]
fn plot_data_series() {
    let v = json_of(&lsf(&[
        "plot-data",
        "--regime",
        "superlinear",
        "--h",
        "1",
        "--n",
        "10,100",
        "--shape",
        "()",
    ]));
    let series = v["series"].as_array().unwrap();
    assert_eq!(series.len(), 1);
    assert_eq!(series[0]["points"].as_array().unwrap().len(), 2);
    assert_eq!(series[0]["limit"], 1.0);
}

#[test]
fn sampling_is_reproducible_and_thread_independent() {
    let base = [
        "sample", "--n", "6", "--lambda", "1/2", "--count", "300", "--seed", "7",
    ];
    let a = lsf(&base);
    let b = lsf(&base);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut one = vec!["--threads", "1"];
    one.extend(base);
    let mut four = vec!["--threads", "4"];
    four.extend(base);
    assert_eq!(lsf(&one).stdout, lsf(&four).stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    let header: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(header["config"]["seed"], 7);
    assert_eq!(header["config"]["lambda"], "1/2");
    let records: Vec<Value> = lines.map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 300);
    for r in &records {
        let parents = r["parents"].as_array().unwrap();
        assert_eq!(parents.len(), 6);
        for root in r["roots"].as_array().unwrap() {
            assert!(parents[root.as_u64().unwrap() as usize].is_null());
        }
    }
    let other_seed = lsf(&[
        "sample", "--n", "6", "--lambda", "1/2", "--count", "300", "--seed", "8",
    ]);
    assert_ne!(other_seed.stdout, b.stdout);
}

#[test]
fn aggregated_sampling_on_a_graph_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c4.txt");
    std::fs::write(&path, "# 4-cycle\n4\n0 1\n1 2\n2 3\n3 0\n").unwrap();
    let out_path = dir.path().join("hist.json");
    let out = lsf(&[
        "sample",
        "--graph",
        path.to_str().unwrap(),
        "--lambda",
        "1",
        "--count",
        "20000",
        "--aggregate",
        "forest",
        "--compare",
        "--format",
        "json",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["total"], 20000);
    // C_4 has 15 forests: every edge subset but the full cycle.
    assert_eq!(v["histogram"].as_object().unwrap().len(), 15);
    assert!(v["comparison"]["tv_distance"].as_f64().unwrap() < 0.03);
}

#[test]
fn limit_sampling_and_laws() {
    let v = json_of(&lsf(&[
        "sample-limit",
        "--tree",
        "t-alpha",
        "--alpha",
        "1",
        "--h",
        "1",
        "--count",
        "20000",
        "--compare",
    ]));
    assert_eq!(v["total"], 20000);
    assert!(v["comparison"]["tv_distance"].as_f64().unwrap() < 0.03);
    let b = json_of(&lsf(&[
        "sample-limit",
        "--tree",
        "bgwp",
        "--beta",
        "0.5",
        "--count",
        "2000",
    ]));
    assert_eq!(b["total"], 2000);
    let t0 = json_of(&lsf(&[
        "sample-limit",
        "--tree",
        "t0",
        "--h",
        "0",
        "--count",
        "10",
    ]));
    assert_eq!(t0["histogram"]["()"], 10);

    let finite = json_of(&lsf(&[
        "limit", "--law", "finite", "--n", "4", "--lambda", "1", "--h", "1", "--exact",
    ]));
    assert_eq!(finite["exact"]["()"], "16/125");
    assert!((finite["listed_mass"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let lin = json_of(&lsf(&[
        "limit",
        "--law",
        "linear",
        "--alpha",
        "1",
        "--h",
        "2",
        "--max-size",
        "9",
    ]));
    let mass = lin["listed_mass"].as_f64().unwrap();
    assert!(mass < 1.0 && mass > 0.9);
    let csv = lsf(&[
        "limit",
        "--law",
        "sublinear",
        "--h",
        "1",
        "--format",
        "csv",
        "--shape",
        "()",
    ]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.contains("code,probability\n(),"));
}

#[test]
fn config_errors_exit_with_two() {
    let cases: &[&[&str]] = &[
        &["exact", "--n", "4", "--graph", "x.txt", "--lambda", "1"],
        &["exact", "--n", "4", "--lambda", "abc"],
        &[
            "exact",
            "--n",
            "4",
            "--lambda",
            "1",
            "--include-edge",
            "0,9",
        ],
        &["exact", "--n", "4", "--lambda", "-1"],
        &[
            "sample",
            "--graph",
            "/nonexistent/graph.txt",
            "--lambda",
            "1",
        ],
        &["convergence-table", "--h", "1"],
        &["limit", "--law", "linear", "--h", "1"],
        &["limit", "--law", "bgwp", "--beta", "0.5", "--alpha", "1"],
        &["sample-limit", "--tree", "t-alpha"],
        &[
            "limit", "--law", "linear", "--alpha", "1", "--h", "0", "--shape", "(())",
        ],
    ];
    for args in cases {
        let out = lsf(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}
