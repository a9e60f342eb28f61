//! Acceptance gate: one PASS/FAIL line per criterion at full scale.

use std::process::ExitCode;

use iterint::checks::triple_discrepancy_scan;
use iterint::cli::execute_args;
use iterint::report::{without_timestamp, Report};
use iterint::Pool;
use iterint_core::fourier_tableau::{partial_sums, sample_tableau, DirectConvolver};
use iterint_core::integrals::{integral_set, quadrature_oracle};
use iterint_core::lyndon::{dimension, enumerate_lyndon3, lyndon_count, IndexLayout};

const THREADS: [&str; 3] = ["1", "4", "8"];

/// Runs a CLI command once per pool size, records whether the reports
/// agree and returns them.
fn run(args: &[&str], reproducibility: &mut Vec<(String, bool)>) -> Vec<Report> {
    let mut reports = Vec::new();
    let mut texts = Vec::new();
    for t in THREADS {
        let mut full = args.to_vec();
        full.extend(["--threads", t]);
        let outcome = execute_args(&full).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        let json = outcome.report.to_json().unwrap();
        texts.push(serde_json::to_string(&without_timestamp(&json).unwrap()).unwrap());
        reports.push(outcome.report);
    }
    reproducibility.push((args.join(" "), texts.windows(2).all(|w| w[0] == w[1])));
    reports
}

fn gates_pass(r: &Report) -> bool {
    r.gates().count() > 0 && !r.failed()
}

fn describe(r: &Report) -> String {
    r.gates()
        .filter(|g| !g.pass || g.grid_value.is_none())
        .map(|g| format!("{}={:.4e}[{}]", g.metric, g.estimate, g.gate.as_deref().unwrap_or("")))
        .collect::<Vec<_>>()
        .join(" ")
}

fn criterion_1() -> (bool, String) {
    let mut ok = true;
    for q in 1..=8usize {
        let words = enumerate_lyndon3(q).unwrap();
        let count = (q * q * q - q) / 3;
        let d = 2 * q * q + 2 * q + count;
        let flat = partial_sums(&sample_tableau(q, 3, 1, q as u64).unwrap()).flatten().len();
        ok &= words.len() == count && lyndon_count(q) == count && dimension(q) == d && IndexLayout::new(q).unwrap().d == d && flat == d;
    }
    (ok, "counts (q^3-q)/3 and flattened lengths for q = 1..8".into())
}

fn criterion_2(repro: &mut Vec<(String, bool)>) -> (bool, String) {
    let mut ok = true;
    let mut worst = (0.0f64, 0.0f64);
    for q in ["2", "3"] {
        for p in ["1", "7", "64", "257"] {
            let r = run(&["identities", "--q", q, "--p", p, "--paths", "1000", "--seed", "7"], repro);
            ok &= gates_pass(&r[0]);
            let res = &r[0].results;
            worst.0 = worst.0.max(res["nu"].as_f64().unwrap());
            worst.1 = worst.1.max(res["shuffle"].as_f64().unwrap());
        }
    }
    (ok, format!("max nu residual {:.2e}, max shuffle residual {:.2e} (gate 1e-10)", worst.0, worst.1))
}

fn criterion_3(repro: &mut Vec<(String, bool)>) -> (bool, String) {
    let mut conv = DirectConvolver;
    let mut worst: f64 = 0.0;
    for i in 0..100u64 {
        let t = sample_tableau(2, 256, 3, i).unwrap();
        let formula = integral_set(&t, &mut conv);
        let quad = quadrature_oracle(&t, 4096).unwrap();
        for (a, b) in formula.i2.iter().zip(&quad.i2) {
            worst = worst.max((a - b).abs());
        }
    }
    let grid = [32, 64, 128, 256];
    let mut runs = Vec::new();
    for t in THREADS {
        let pool = Pool::new(t.parse().unwrap()).unwrap();
        runs.push(triple_discrepancy_scan(&pool, 2, &grid, 2048, 200, 3).unwrap());
    }
    let stable = runs.windows(2).all(|w| serde_json::to_string(&w[0]).unwrap() == serde_json::to_string(&w[1]).unwrap());
    repro.push(("triple discrepancy scan".into(), stable));
    let ms: Vec<f64> = runs[0].iter().map(|e| e.value).collect();
    let monotone = ms.windows(2).all(|w| w[1] < w[0]);
    (
        worst <= 1e-6 && monotone,
        format!("double max |formula - quadrature| {worst:.2e} (gate 1e-6); triple mean-square vs p=2048 [{}]", ms.iter().map(|m| format!("{m:.3e}")).collect::<Vec<_>>().join(", ")),
    )
}

fn criterion_4(repro: &mut Vec<(String, bool)>) -> (bool, String) {
    let r = run(&["moments", "--q", "2", "--grid", "16,32,64,128,256", "--n-mult", "8", "--paths", "100000", "--seed", "0"], repro);
    (gates_pass(&r[0]), describe(&r[0]))
}

fn criterion_5(repro: &mut Vec<(String, bool)>) -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for (q, p) in [("1", "4"), ("2", "8"), ("3", "6")] {
        let r = run(&["phase", "grad-check", "--q", q, "--p", p, "--points", "34", "--seed", "5"], repro);
        ok &= gates_pass(&r[0]);
        detail.push(format!("(q={q},p={p}) {}", describe(&r[0])));
    }
    (ok, detail.join("; "))
}

fn criterion_6(repro: &mut Vec<(String, bool)>) -> (bool, String) {
    let r = run(&["thorn", "--n-max", "41", "--cross-check-max", "40"], repro);
    let rep = &r[0];
    let count = |m: &str| rep.gates().filter(|g| g.metric == m && g.pass).count();
    let ok = gates_pass(rep)
        && count("thorn_odd_zero") == 21
        && count("thorn_nonzero") == 12
        && count("thorn_exact_value") == 2
        && count("thorn_methods_agree") == 20
        && count("thorn_log_decreasing") == 11;
    (
        ok,
        format!(
            "odd zeros {}, nonzero {}, exact values {}, methods agree {}, decreasing steps {}",
            count("thorn_odd_zero"),
            count("thorn_nonzero"),
            count("thorn_exact_value"),
            count("thorn_methods_agree"),
            count("thorn_log_decreasing")
        ),
    )
}

fn criterion_7(repro: &mut Vec<(String, bool)>) -> (bool, String) {
    let r = run(
        &["charfn", "--q", "2", "--p", "64", "--samples", "1000000", "--seed", "0", "--dir-seed", "1", "--directions", "5", "--radii", "2,20"],
        repro,
    );
    let rep = &r[0];
    let ratios: Vec<String> = rep
        .gates()
        .map(|g| format!("{:.1}", g.estimate / g.stderr.unwrap()))
        .collect();
    (gates_pass(rep) && rep.gates().count() == 5, format!("drop / combined SE per direction: {} (gate > 4)", ratios.join(", ")))
}

fn criterion_8(repro: &mut Vec<(String, bool)>) -> (bool, String) {
    let r = run(
        &[
            "couple", "--q", "2", "--grid", "16,32,64,128", "--kind", "both", "--estimator", "sliced", "--projections", "256", "--p-ref",
            "1024", "--paths", "16384", "--seed", "0",
        ],
        repro,
    );
    (gates_pass(&r[0]), describe(&r[0]))
}

fn criterion_9(repro: &mut Vec<(String, bool)>) -> (bool, String) {
    let cases: [(&str, &str, &str); 4] =
        [("gbm", "euler", "10000"), ("gbm", "milstein", "10000"), ("linear1d", "taylor15", "1000"), ("bilinear2d", "taylor15", "200")];
    let mut ok = true;
    let mut detail = Vec::new();
    for (problem, scheme, paths) in cases {
        let r = run(&["sde", "--problem", problem, "--scheme", scheme, "--paths", paths, "--seed", "0"], repro);
        ok &= gates_pass(&r[0]);
        detail.push(format!("{problem}/{scheme}: {}", describe(&r[0])));
    }
    (ok, detail.join("; "))
}

fn main() -> ExitCode {
    let mut repro = Vec::new();
    let mut results: Vec<(u32, &str, (bool, String))> = Vec::new();
    let mut report = |n: u32, name: &'static str, r: (bool, String)| {
        println!("criterion {n:>2} {name}: {} | {}", if r.0 { "PASS" } else { "FAIL" }, r.1);
        results.push((n, name, r));
    };
    report(1, "lyndon counts", criterion_1());
    report(2, "exact identities", criterion_2(&mut repro));
    report(3, "formula vs path oracle", criterion_3(&mut repro));
    report(4, "tail moment decay", criterion_4(&mut repro));
    report(5, "phase function", criterion_5(&mut repro));
    report(6, "skew determinants", criterion_6(&mut repro));
    report(7, "charfn decay probe", criterion_7(&mut repro));
    report(8, "coupling rate", criterion_8(&mut repro));
    report(9, "strong convergence", criterion_9(&mut repro));
    let unstable: Vec<&str> = repro.iter().filter(|r| !r.1).map(|r| r.0.as_str()).collect();
    report(
        10,
        "determinism",
        (
            unstable.is_empty(),
            if unstable.is_empty() {
                format!("{} reports identical at 1, 4 and 8 threads", repro.len())
            } else {
                format!("differing: {}", unstable.join("; "))
            },
        ),
    );
    let failed = results.iter().filter(|r| !(r.2).0).count();
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
