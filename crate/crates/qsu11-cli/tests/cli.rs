use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qsu11(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsu11"))
        .args(args)
        .env_remove("QSU11_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn continuous_spectrum_report() {
    let out = qsu11(&[
        "spectrum", "--op", "I1", "--q", "0.5", "--l", "1", "--dim", "300", "--format", "json",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    let hi = report["prediction"]["hi"].as_f64().unwrap();
    assert!((hi - 2.0 * 0.5f64.sqrt() / 0.5).abs() < 1e-15);
    assert_eq!(report["prediction"]["lo"].as_f64(), Some(0.0));
    assert_eq!(report["eigenvalues"].as_array().unwrap().len(), 300);
    assert_eq!(report["params"]["dim"].as_u64(), Some(300));
    for check in report["checks"].as_array().unwrap() {
        assert_eq!(check["pass"], Value::Bool(true));
        for key in ["name", "value", "tol"] {
            assert!(check.get(key).is_some());
        }
    }
}

#[test]
fn discrete_ladder_report_matches_eight_points() {
    let out = qsu11(&[
        "spectrum", "--op", "I2", "--q", "0.5", "--l", "1", "--dim", "200",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 8);
    for (n, check) in checks.iter().enumerate() {
        assert_eq!(check["name"].as_str().unwrap(), format!("ladder point {n}"));
        assert!(check["value"].as_f64().unwrap() < 1e-9);
    }
}

#[test]
fn invalid_q_exits_with_two() {
    let out = qsu11(&["spectrum", "--op", "I1", "--q", "1.5", "--dim", "300"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("q must lie in (0,1)"));
    assert!(out.stdout.is_empty());
}

#[test]
fn other_invalid_configurations_exit_with_two() {
    for args in [
        &["spectrum", "--dim", "4"][..],
        &["spectrum", "--op", "I7"],
        &["ortho", "--relation", "unknown"],
        &["ortho", "--nmax", "99"],
        &["limits", "--q-seq", "0.5,abc"],
        &["spectrum", "--tol-spectrum", "-1"],
        &["spectrum", "--config", "/nonexistent/run.cfg"],
        &["spectrum", "--bogus"],
    ] {
        assert_eq!(code(&qsu11(args)), 2, "{args:?}");
    }
}

#[test]
fn lattice_function_system_gram() {
    let out = qsu11(&[
        "ortho",
        "--relation",
        "fk_719",
        "--q",
        "0.5",
        "--l",
        "1",
        "--c",
        "1",
        "--nmax",
        "6",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn continuous_gram_report() {
    let out = qsu11(&[
        "ortho",
        "--relation",
        "cont_qL_313",
        "--q",
        "0.5",
        "--l",
        "1",
        "--nmax",
        "8",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    assert!(report["report"]["max_offdiag"].as_f64().unwrap() < 1e-8);
    assert_eq!(report["report"]["gram"].as_array().unwrap().len(), 9);
}

#[test]
fn degree_zero_gram_is_one_by_one() {
    for relation in [
        "cont_qL_313",
        "little_qL_510",
        "qLaguerre_712",
        "asc_dual_514",
    ] {
        let out = qsu11(&["ortho", "--relation", relation, "--nmax", "0"]);
        assert_eq!(code(&out), 0, "{relation}: {}", stderr(&out));
        let gram = json(&out)["report"]["gram"].clone();
        assert_eq!(gram.as_array().unwrap().len(), 1, "{relation}");
        assert_eq!(gram[0].as_array().unwrap().len(), 1, "{relation}");
    }
}

#[test]
fn gram_csv_is_square_with_labels() {
    let out = qsu11(&[
        "ortho",
        "--relation",
        "little_qL_510",
        "--nmax",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "label,0,1,2,3");
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 5));
}

#[test]
fn i4_deficiency_verdict() {
    let out = qsu11(&[
        "deficiency",
        "--op",
        "I4",
        "--q",
        "0.5",
        "--l",
        "1",
        "--kmax",
        "200",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        json(&out)["verdict"]["verdict"].as_str(),
        Some("indices_1_1")
    );
}

#[test]
fn bounded_deficiency_verdicts() {
    for op in ["I1", "I2"] {
        let out = qsu11(&["deficiency", "--op", op]);
        assert_eq!(code(&out), 0, "{op}");
        assert_eq!(
            json(&out)["verdict"]["verdict"].as_str(),
            Some("bounded_selfadjoint")
        );
    }
}

#[test]
fn eigenvalue_map_limit_table() {
    let out = qsu11(&[
        "limits",
        "--check",
        "eigenvalue-map",
        "--mu",
        "1.0",
        "--q-seq",
        "0.9,0.99,0.999",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    let rows = report["tables"][0]["rows"].as_array().unwrap();
    let errors: Vec<f64> = rows.iter().map(|r| r["error"].as_f64().unwrap()).collect();
    assert_eq!(errors.len(), 3);
    assert!(errors.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn all_limit_tables_decrease_by_default() {
    let out = qsu11(&["limits", "--format", "text"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert_eq!(
        stdout(&out)
            .lines()
            .filter(|l| l.starts_with("PASS"))
            .count(),
        3
    );
}

#[test]
fn verify_all_summary() {
    let out = qsu11(&["verify-all", "--q", "0.5", "--l", "1"]);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 9, "{text}");
    assert_eq!(
        text.lines().filter(|l| l.starts_with("PASS")).count(),
        9,
        "{text}"
    );
    assert_eq!(code(&out), 0);
}

#[test]
fn verify_all_lines_are_fixed_and_ordered() {
    let out = qsu11(&["verify-all"]);
    let names: Vec<String> = stdout(&out)
        .lines()
        .map(|l| l.split(':').next().unwrap()[5..].to_string())
        .collect();
    assert_eq!(
        names,
        [
            "I1 spectrum covers the interval [0, 2 sqrt(q)/(1-q)]",
            "rotated I1 sections share the I1 spectrum",
            "I2 spectrum is the ladder q^n/(1-1/q)",
            "I1 eigenfunctions reconstruct the canonical basis",
            "little q-Laguerre polynomials satisfy the dual orthogonality",
            "I2 eigenfunctions reconstruct the canonical basis",
            "I3 has deficiency indices (1,1)",
            "lattice function system is orthogonal",
            "I4 has deficiency indices (1,1)",
        ]
    );
    // exit status follows the lines
    let all_pass = stdout(&out).lines().all(|l| l.starts_with("PASS"));
    assert_eq!(code(&out) == 0, all_pass);
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for threads in ["1", "4"] {
        let path = dir.path().join(format!("verify_{threads}.json"));
        let out = Command::new(env!("CARGO_BIN_EXE_qsu11"))
            .args(["verify-all", "--format", "json", "--out"])
            .arg(&path)
            .env("QSU11_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.code().is_some());
        bodies.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);

    let first = qsu11(&["spectrum", "--op", "I2", "--dim", "64", "--format", "csv"]);
    let second = qsu11(&["spectrum", "--op", "I2", "--dim", "64", "--format", "csv"]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn invalid_thread_count_exits_with_two() {
    let out = Command::new(env!("CARGO_BIN_EXE_qsu11"))
        .args(["verify-all"])
        .env("QSU11_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn out_file_is_written_whole_without_leftovers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spectrum.json");
    std::fs::write(&path, "stale").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qsu11"))
        .args(["spectrum", "--op", "I1", "--dim", "32", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    assert!(stderr(&out).starts_with("PASS"));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["eigenvalues"].as_array().unwrap().len(), 32);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# shared settings\nq = 0.3\nl = 2   # weight\nop = I2\ndim = 40\nformat = json\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let report = json(&qsu11(&["spectrum", "--config", cfg]));
    assert_eq!(report["params"]["q"].as_f64(), Some(0.3));
    assert_eq!(report["params"]["op"].as_str(), Some("I2_psi"));
    assert_eq!(report["params"]["dim"].as_u64(), Some(40));
    let report = json(&qsu11(&[
        "spectrum", "--config", cfg, "--q", "0.6", "--op", "I1",
    ]));
    assert_eq!(report["params"]["q"].as_f64(), Some(0.6));
    assert_eq!(report["params"]["l"].as_f64(), Some(2.0));
    assert_eq!(report["params"]["op"].as_str(), Some("I1"));
}

#[test]
fn spectrum_csv_columns() {
    let out = qsu11(&["spectrum", "--op", "I1", "--dim", "20", "--format", "csv"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,eigenvalue,predicted,abs_error"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 20);
    // inside the interval the nearest predicted value is the eigenvalue itself
    assert!(rows.iter().all(|r| r[1] == r[2] && r[3] == 0.0));
}

#[test]
fn golden_reports() {
    let out = qsu11(&["spectrum", "--op", "I2", "--dim", "16", "--format", "csv"]);
    assert_eq!(stdout(&out), golden("i2_section16.csv"));
    let out = qsu11(&[
        "limits",
        "--check",
        "eigenvalue-map",
        "--mu",
        "1.0",
        "--q-seq",
        "0.9,0.99,0.999",
        "--format",
        "csv",
    ]);
    assert_eq!(stdout(&out), golden("eigenvalue_map.csv"));
}
