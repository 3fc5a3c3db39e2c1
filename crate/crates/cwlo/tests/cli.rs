//! End-to-end checks of the cwlo binary: spec'd examples, exit codes, JSON
//! determinism, scan round-trips, and config-file precedence.

use std::process::{Command, Output};

fn cwlo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cwlo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn exact_examples_match_the_closed_forms() {
    let v = stdout_json(&cwlo(&[
        "exact",
        "--d",
        "1",
        "--beta",
        "0",
        "--h",
        "0",
        "--n",
        "4",
        "--quantity",
        "qn",
    ]));
    assert_eq!(v["probability"].as_f64().unwrap(), 0.375);

    let v = stdout_json(&cwlo(&[
        "exact",
        "--d",
        "1",
        "--beta",
        "1",
        "--h",
        "0",
        "--n",
        "4",
        "--quantity",
        "qnplus",
    ]));
    // e^4 / (2 e^4 + 8 e + 6), loosely "0.39870".
    assert!((v["probability"].as_f64().unwrap() - 0.398_693_818_405_536_2).abs() < 1e-12);
    assert_eq!(v["attaining_indices"], serde_json::json!([0, 4]));

    // Odd n: the bracket P_n <= Q_n <= Q_{n-1}.
    let v = stdout_json(&cwlo(&[
        "exact",
        "--d",
        "1",
        "--beta",
        "0.3",
        "--h",
        "0",
        "--n",
        "5",
        "--quantity",
        "qn",
    ]));
    let lower = v["lower_bound"].as_f64().unwrap();
    let upper = v["upper_bound"].as_f64().unwrap();
    assert!(0.0 < lower && lower < upper && upper < 1.0);
}

#[test]
fn exit_codes_follow_the_contract() {
    // 0: fine; 2: usage; 4: IO.
    assert_eq!(
        cwlo(&["meanfield", "--d", "1", "--beta", "0.3"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        cwlo(&["exact", "--d", "1", "--beta", "0.3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        cwlo(&[
            "exact",
            "--d",
            "1",
            "--beta",
            "1",
            "--h",
            "0",
            "--n",
            "4",
            "--quantity",
            "nope"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(cwlo(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(
        cwlo(&["coeffs", "--d", "1", "--beta", "0", "--kind", "qn"])
            .status
            .code(),
        Some(2)
    );
    let out = cwlo(&[
        "scan",
        "--d-list",
        "1",
        "--beta-list",
        "0.3",
        "--h-list",
        "0",
        "--n-list",
        "8",
        "--quantities",
        "z",
        "--output",
        "/nonexistent-dir/out.csv",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    for args in [
        vec![
            "exact",
            "--d",
            "2",
            "--beta",
            "0.4",
            "--h",
            "0.1",
            "--n",
            "12",
            "--quantity",
            "qn",
        ],
        vec!["asymptotic", "--d", "1", "--beta", "0.5", "--h", "0"],
        vec![
            "coeffs", "--d", "1", "--beta", "0.3", "--h", "0.2", "--kind", "qn",
        ],
        vec!["verify", "--suite", "graphs"],
    ] {
        let a = cwlo(&args);
        let b = cwlo(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "args: {args:?}");
    }
}

#[test]
fn verify_prints_report_and_summary() {
    let out = cwlo(&["verify", "--suite", "meanfield"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["suite"], "meanfield");
    assert_eq!(report["pass"], true);
    assert!(report["cases"].as_array().unwrap().len() > 10);
    let human = String::from_utf8_lossy(&out.stderr);
    assert!(
        human.contains("suite meanfield:"),
        "summary on stderr: {human}"
    );
}

#[test]
fn scan_csv_round_trips_to_library_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = cwlo(&[
        "scan",
        "--d-list",
        "1",
        "--beta-list",
        "0.3,0.5",
        "--h-list",
        "0,0.2",
        "--n-list",
        "16,64",
        "--quantities",
        "z,qnplus,qn",
        "--output",
        path.to_str().unwrap(),
    ]);
    let summary = stdout_json(&out);
    assert_eq!(summary["rows"].as_i64().unwrap(), 24);
    assert_eq!(summary["failures"].as_i64().unwrap(), 0);

    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "d,beta,h,n,quantity,exact,pred_M0,pred_M1,residual_M0,residual_M1"
    );
    let mut checked = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 10);
        let p = cwlo::ModelParams::new(
            cells[0].parse().unwrap(),
            cells[1].parse().unwrap(),
            cells[2].parse().unwrap(),
        )
        .unwrap();
        let n: u64 = cells[3].parse().unwrap();
        let exact_cell: f64 = cells[5].parse().unwrap();
        // Shortest round-trip decimals: the parsed cell must equal the
        // library value bit for bit.
        let lib = match cells[4] {
            "z" => cwlo::exact::reduced_log_partition(&p, n).unwrap(),
            "qnplus" => cwlo::exact::qn_plus_exact(&p, n).unwrap().probability,
            "qn" => cwlo::exact::qn_even_exact(&p, n).unwrap().probability,
            other => panic!("unexpected quantity {other}"),
        };
        assert_eq!(exact_cell.to_bits(), lib.to_bits(), "row: {line}");
        checked += 1;
    }
    assert_eq!(checked, 24);
}

#[test]
fn scan_output_is_stable_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let path = dir.path().join(format!("t{threads}.csv"));
        let out = Command::new(env!("CARGO_BIN_EXE_cwlo"))
            .env("CW_LO_THREADS", threads)
            .args([
                "scan",
                "--d-list",
                "1,2",
                "--beta-list",
                "0.3,0.5",
                "--h-list",
                "0",
                "--n-list",
                "8,32",
                "--quantities",
                "z,qn,asymptotic",
                "--output",
                path.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
        outputs.push(std::fs::read_to_string(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn config_file_fills_flags_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cwlo.json");
    std::fs::write(
        &cfg,
        r#"{"d": 1, "beta": 0.3, "h": 0.0, "n": 4, "quantity": "qn"}"#,
    )
    .unwrap();

    let v = stdout_json(&cwlo(&["exact", "--config", cfg.to_str().unwrap()]));
    assert_eq!(v["n"].as_i64().unwrap(), 4);
    assert_eq!(v["quantity"], "qn");

    let v = stdout_json(&cwlo(&[
        "exact",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "6",
    ]));
    assert_eq!(v["n"].as_i64().unwrap(), 6);

    // Unknown keys are a usage error, as is a missing file (IO).
    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    assert_eq!(
        cwlo(&["exact", "--config", cfg.to_str().unwrap(), "--n", "4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cwlo(&["exact", "--config", "/no/such/file.json", "--n", "4"])
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn scan_failures_stay_in_row_and_scan_continues() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mixed.json");
    // Odd n makes qn rows fail; z rows on the same sweep still succeed.
    let out = cwlo(&[
        "scan",
        "--d-list",
        "1",
        "--beta-list",
        "0.3",
        "--h-list",
        "0",
        "--n-list",
        "7",
        "--quantities",
        "z,qn",
        "--output",
        path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let summary = stdout_json(&out);
    assert_eq!(summary["rows"].as_i64().unwrap(), 2);
    assert_eq!(summary["failures"].as_i64().unwrap(), 1);
    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert!(rows[0]["error"].is_null() && rows[0]["exact"].is_number());
    assert!(rows[1]["error"].is_string() && rows[1]["exact"].is_null());
}
