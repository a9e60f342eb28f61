use std::path::Path;
use std::process::{Command, Output};

use iterint::report::without_timestamp;

fn iterint(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iterint")).current_dir(dir).args(args).env_remove("ITERINT_THREADS").output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn lyndon_prints_eight_words_for_three_letters() {
    let dir = tempfile::tempdir().unwrap();
    let o = iterint(dir.path(), &["lyndon", "--q", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let err = stderr(&o);
    let words: Vec<&str> = err.lines().filter(|l| l.split(' ').count() == 3 && l.chars().all(|c| c.is_ascii_digit() || c == ' ')).collect();
    assert_eq!(words, ["1 1 2", "1 1 3", "1 2 2", "1 2 3", "1 3 2", "1 3 3", "2 2 3", "2 3 3"]);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("iterint-lyndon.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], "iterint-report/1");
    assert_eq!(report["results"]["count"], 8);
    assert_eq!(report["config"]["params"]["q"], 3);
}

#[test]
fn thorn_lists_exact_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = iterint(dir.path(), &["thorn", "--n-max", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let err = stderr(&o);
    let lines: Vec<&str> = err.lines().filter(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit())).collect();
    assert_eq!(lines.len(), 6);
    for (i, l) in lines.iter().enumerate() {
        let f: Vec<&str> = l.split(' ').collect();
        assert_eq!(f[0], (i + 1).to_string());
        if (i + 1) % 2 == 1 {
            assert_eq!(f[1], "0");
        }
    }
    assert!(lines[1].starts_with("2 1/9 "));
    assert!(lines[3].starts_with("4 80089/31360000 "));
    let o = iterint(dir.path(), &["phase", "thorn", "--n-max", "4", "--stdout"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["subcommand"], "phase thorn");
    assert!(!dir.path().join("iterint-phase-thorn.json").exists());
}

#[test]
fn identities_report_small_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let o = iterint(dir.path(), &["identities", "--q", "2", "--p", "64", "--paths", "1000", "--seed", "7", "--stdout"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["results"]["nu"].as_f64().unwrap() <= 1e-10);
    assert!(v["results"]["shuffle"].as_f64().unwrap() <= 1e-10);
    let gates = v["rows"].as_array().unwrap();
    assert_eq!(gates.len(), 2);
    assert!(gates.iter().all(|g| g["pass"] == true && g["gate"].is_string()));
}

#[test]
fn failed_gate_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = iterint(dir.path(), &["identities", "--p", "8", "--paths", "10", "--tol=-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("FAIL"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = iterint(dir.path(), &["lyndon", "--q", "3", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
    assert!(o.stdout.is_empty());
    assert_eq!(iterint(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(iterint(dir.path(), &["lyndon", "--q", "0"]).status.code(), Some(2));
    assert_eq!(iterint(dir.path(), &["sde", "--problem", "nope"]).status.code(), Some(2));
    assert_eq!(iterint(dir.path(), &["couple", "--p-ref", "100"]).status.code(), Some(2));
    assert_eq!(iterint(dir.path(), &["lyndon", "--q", "2", "--threads", "0"]).status.code(), Some(2));
    assert_eq!(iterint(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn reports_are_reproducible_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["identities", "--q", "3", "--p", "9", "--paths", "40"],
        &["couple", "--grid", "2,4,8,16", "--p-ref", "128", "--paths", "64", "--projections", "16", "--kind", "both"],
        &["sde", "--problem", "bilinear2d", "--scheme", "taylor15", "--h-grid", "2^-1,2^-2,2^-3,2^-4", "--paths", "8", "--levels", "2"],
        &["charfn", "--p", "8", "--samples", "1000", "--directions", "2"],
    ];
    for args in cases {
        let mut seen = Vec::new();
        for threads in ["1", "4", "8", "4"] {
            let mut full = args.to_vec();
            full.extend(["--threads", threads, "--stdout"]);
            let o = iterint(dir.path(), &full);
            assert!(o.status.code() == Some(0) || o.status.code() == Some(1), "{args:?}: {}", stderr(&o));
            let text = String::from_utf8(o.stdout).unwrap();
            let stripped = serde_json::to_string(&without_timestamp(&text).unwrap()).unwrap();
            assert!(!stripped.contains("\"threads\""));
            seen.push(stripped);
        }
        assert!(seen.windows(2).all(|w| w[0] == w[1]), "{args:?}");
    }
}

#[test]
fn environment_sets_the_default_pool() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_iterint"))
        .current_dir(dir.path())
        .args(["lyndon", "--q", "2"])
        .env("ITERINT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_iterint"))
        .current_dir(dir.path())
        .args(["lyndon", "--q", "2"])
        .env("ITERINT_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn csv_reports_and_sample_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = iterint(
        dir.path(),
        &["sample", "--q", "2", "--p", "8", "--paths", "3", "--tableaus", "tabs", "--tableau-format", "csv", "--format", "csv", "--out", "r.csv"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(report.starts_with("metric,grid_value,estimate,stderr,gate,pass\n"));
    let rows = iterint::io::read_integral_csv(std::fs::File::open(dir.path().join("iterint-sample-integrals.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 3 * 14);
    for i in 0..3 {
        let t = iterint::io::read_tableau_csv(std::fs::File::open(dir.path().join(format!("tabs/tableau-{i}.csv"))).unwrap()).unwrap();
        let direct = iterint_core::fourier_tableau::sample_tableau(2, 8, 0, i).unwrap();
        assert_eq!(t, direct);
    }
}

#[test]
fn step_grids_accept_powers_of_two() {
    assert_eq!(iterint::cli::parse_step("2^-3"), Ok(0.125));
    assert_eq!(iterint::cli::parse_step("0.5"), Ok(0.5));
    assert!(iterint::cli::parse_step("-1").is_err());
    assert!(iterint::cli::parse_step("2^x").is_err());
}
