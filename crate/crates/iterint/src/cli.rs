//! The `iterint` command line.
//!
//! Every experiment is a subcommand that builds a [`Report`], prints a
//! human-readable summary to stderr and writes the report to `--out`
//! (default `iterint-<subcommand>.json` or `.csv`). With `--stdout` the
//! report goes to stdout instead and no file is written unless `--out`
//! is also given.
//!
//! Exit codes: `0` on success, `1` when a report contains a failed gate,
//! `2` on usage, validation or IO errors.
//!
//! The worker pool size comes from `--threads`, else the environment
//! variable `ITERINT_THREADS`, else the hardware parallelism. Reports do
//! not record the pool size, since results do not depend on it.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use iterint_core::coupling_lab::CandidateKind;
use iterint_core::fourier_tableau::sample_tableau;
use iterint_core::integrals::{integral_set, scale_to_interval, stratonovich_to_ito};
use iterint_core::lyndon::{enumerate_lyndon3, layout, lyndon_count};
use iterint_core::sde_schemes::{problem_by_name, Reference, ScanConfig, SchemeKind, SdeProblem};

use crate::checks::{charfn_probe, is_prime, phase_check, thorn_table};
use crate::error::{Error, Result};
use crate::io::{write_integral_csv, write_tableau_binary, write_tableau_csv};
use crate::parallel::{resolve_threads, Pool};
use crate::report::{Report, Row, RunConfig};
use crate::scans::{
    coupling_rate_scan, identities_scan, strong_error_scan, tail_moment_scan, CouplingConfig, Estimator, Pairing, TailScanConfig,
};

/// Output format of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Top-level arguments.
#[derive(Debug, Parser)]
#[command(name = "iterint", version, about = "Iterated Stratonovich integrals from Fourier tableaus")]
pub struct Cli {
    /// Worker threads (default: ITERINT_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the report to stdout instead of a file.
    #[arg(long, global = true)]
    pub stdout: bool,
    /// Report path (default: iterint-<subcommand>.<format>).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the Lyndon words of length three.
    Lyndon(LyndonArgs),
    /// Sample tableaus and emit their integral sets as CSV.
    Sample(SampleArgs),
    /// Check the exact finite-p identities on random tableaus.
    Identities(IdentitiesArgs),
    /// Tail moment decay over a grid of truncation levels.
    Moments(MomentsArgs),
    /// Phase-function checks.
    Phase {
        #[command(subcommand)]
        command: PhaseCommand,
    },
    /// Exact skew determinants þ_n.
    Thorn(ThornArgs),
    /// Characteristic-function decay probe.
    Charfn(CharfnArgs),
    /// Coupling-rate scan.
    Couple(CoupleArgs),
    /// Strong-error scan of an SDE scheme.
    Sde(SdeArgs),
}

/// `phase` subcommands.
#[derive(Debug, Subcommand)]
pub enum PhaseCommand {
    /// Finite-difference checks of the phase gradient and Hessian.
    GradCheck(GradCheckArgs),
    /// Exact skew determinants þ_n.
    Thorn(ThornArgs),
    /// Characteristic-function decay probe.
    Charfn(CharfnArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct LyndonArgs {
    #[arg(long)]
    pub q: usize,
}

/// Stochastic-integral convention of emitted sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConventionArg {
    Stratonovich,
    Ito,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    #[arg(long, default_value_t = 64)]
    pub p: usize,
    #[arg(long, default_value_t = 10)]
    pub paths: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Interval length the unit-interval integrals are scaled to.
    #[arg(long, default_value_t = 1.0)]
    pub h: f64,
    #[arg(long, value_enum, default_value_t = ConventionArg::Stratonovich)]
    pub convention: ConventionArg,
    /// Integral-set CSV path (default: iterint-sample-integrals.csv).
    #[arg(long)]
    pub integrals: Option<PathBuf>,
    /// Directory to dump each sampled tableau into.
    #[arg(long)]
    pub tableaus: Option<PathBuf>,
    /// Container used for dumped tableaus.
    #[arg(long, value_enum, default_value_t = TableauFormat::Binary)]
    pub tableau_format: TableauFormat,
}

/// Tableau container.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TableauFormat {
    Binary,
    Csv,
}

#[derive(Debug, Args, Serialize)]
pub struct IdentitiesArgs {
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    #[arg(long, default_value_t = 64)]
    pub p: usize,
    #[arg(long, default_value_t = 1000)]
    pub paths: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct MomentsArgs {
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128,256")]
    pub grid: Vec<usize>,
    /// Tail end as a multiple of p.
    #[arg(long, default_value_t = 8)]
    pub n_mult: usize,
    #[arg(long, default_value_t = 100_000)]
    pub paths: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct GradCheckArgs {
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    #[arg(long, default_value_t = 8)]
    pub p: usize,
    #[arg(long, default_value_t = 20)]
    pub points: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ThornArgs {
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
    /// Largest n also computed by the second exact method.
    #[arg(long, default_value_t = 40)]
    pub cross_check_max: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CharfnArgs {
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    #[arg(long, default_value_t = 64)]
    pub p: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub dir_seed: u64,
    #[arg(long, default_value_t = 5)]
    pub directions: u64,
    #[arg(long, value_delimiter = ',', default_value = "2,20")]
    pub radii: Vec<f64>,
}

/// Candidate family selector; `both` also compares the two slopes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    IndependentTail,
    GaussianMatched,
    Both,
}

/// Distance estimator selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorArg {
    Exact,
    Sliced,
}

#[derive(Debug, Args, Serialize)]
pub struct CoupleArgs {
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
    pub grid: Vec<usize>,
    #[arg(long, value_enum, default_value_t = KindArg::IndependentTail)]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Sliced)]
    pub estimator: EstimatorArg,
    #[arg(long, default_value_t = 256)]
    pub projections: usize,
    #[arg(long, default_value_t = 1024)]
    pub p_ref: usize,
    /// Whether candidates reuse the heads of the reference tableaus.
    #[arg(long, value_enum, default_value_t = PairingArg::SharedHead)]
    pub pairing: PairingArg,
    #[arg(long, default_value_t = 16_384)]
    pub paths: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Reference/candidate pairing selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairingArg {
    SharedHead,
    Independent,
}

/// How the strong-error reference is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceArg {
    /// Closed form when the problem has one, else refined.
    Auto,
    Exact,
    Refined,
}

#[derive(Debug, Args, Serialize)]
pub struct SdeArgs {
    #[arg(long, default_value = "gbm")]
    pub problem: String,
    #[arg(long, default_value = "milstein")]
    pub scheme: String,
    /// Step sizes as decimals or powers of two such as `2^-5`.
    #[arg(long, value_delimiter = ',', value_parser = parse_step,
          default_value = "2^-3,2^-4,2^-5,2^-6,2^-7,2^-8,2^-9")]
    pub h_grid: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub paths: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    /// Initial state (default: all ones).
    #[arg(long, value_delimiter = ',')]
    pub x0: Vec<f64>,
    /// Fourier modes per unit driving interval.
    #[arg(long, default_value_t = iterint_core::sde_schemes::DEFAULT_DRIVER_MODES)]
    pub driver_modes: usize,
    #[arg(long, value_enum, default_value_t = ReferenceArg::Auto)]
    pub reference: ReferenceArg,
    /// Refinement levels of the refined reference.
    #[arg(long, default_value_t = iterint_core::sde_schemes::DEFAULT_REFINEMENT_LEVELS)]
    pub levels: u32,
}

/// Parses `0.125` or `2^-3`.
pub fn parse_step(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let v = if let Some(e) = s.strip_prefix("2^") {
        2f64.powi(e.parse::<i32>().map_err(|_| format!("bad exponent in `{s}`"))?)
    } else {
        s.parse::<f64>().map_err(|_| format!("bad step `{s}`"))?
    };
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("step `{s}` must be positive"))
    }
}

/// A finished command: the report plus lines for stderr.
pub struct Outcome {
    pub report: Report,
    pub lines: Vec<String>,
}

fn config<A: Serialize>(cli: &Cli, subcommand: &str, args: &A) -> Result<RunConfig> {
    Ok(RunConfig {
        subcommand: subcommand.into(),
        out: cli.out.as_ref().map(|p| p.display().to_string()),
        format: match cli.format {
            Format::Json => "json".into(),
            Format::Csv => "csv".into(),
        },
        params: serde_json::to_value(args)?,
    })
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) => match emit(&cli, &outcome) {
            Ok(()) => {
                if outcome.report.failed() {
                    1
                } else {
                    0
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn emit(cli: &Cli, outcome: &Outcome) -> Result<()> {
    let mut err = std::io::stderr().lock();
    for l in &outcome.lines {
        writeln!(err, "{l}")?;
    }
    for g in outcome.report.gates() {
        let at = g.grid_value.map(|v| format!(" @ {v}")).unwrap_or_default();
        writeln!(
            err,
            "{} {}{}: {:.6e} [{}]",
            if g.pass { "PASS" } else { "FAIL" },
            g.metric,
            at,
            g.estimate,
            g.gate.as_deref().unwrap_or("")
        )?;
    }
    let bytes = outcome.report.render()?;
    if cli.stdout {
        std::io::stdout().lock().write_all(&bytes)?;
    }
    if !cli.stdout || cli.out.is_some() {
        let path = match &cli.out {
            Some(p) => p.clone(),
            None => {
                let ext = if cli.format == Format::Csv { "csv" } else { "json" };
                PathBuf::from(format!("iterint-{}.{ext}", outcome.report.config.subcommand.replace(' ', "-")))
            }
        };
        std::fs::write(&path, bytes)?;
        writeln!(err, "report written to {}", path.display())?;
    }
    Ok(())
}

/// Parses arguments (without the program name) and runs the command
/// without writing anything; parse failures become usage errors.
pub fn execute_args(args: &[&str]) -> Result<Outcome> {
    let cli = Cli::try_parse_from(std::iter::once("iterint").chain(args.iter().copied()))
        .map_err(|e| Error::Usage(e.to_string()))?;
    execute(&cli)
}

/// Runs a parsed command line without writing anything.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let pool = Pool::new(resolve_threads(cli.threads)?)?;
    match &cli.command {
        Command::Lyndon(a) => lyndon(cli, a),
        Command::Sample(a) => sample(cli, &pool, a),
        Command::Identities(a) => identities(cli, &pool, a),
        Command::Moments(a) => moments(cli, &pool, a),
        Command::Phase { command } => match command {
            PhaseCommand::GradCheck(a) => grad_check(cli, &pool, a),
            PhaseCommand::Thorn(a) => thorn(cli, &pool, a, "phase thorn"),
            PhaseCommand::Charfn(a) => charfn(cli, &pool, a, "phase charfn"),
        },
        Command::Thorn(a) => thorn(cli, &pool, a, "thorn"),
        Command::Charfn(a) => charfn(cli, &pool, a, "charfn"),
        Command::Couple(a) => couple(cli, &pool, a),
        Command::Sde(a) => sde(cli, &pool, a),
    }
}

fn lyndon(cli: &Cli, a: &LyndonArgs) -> Result<Outcome> {
    let words = enumerate_lyndon3(a.q)?;
    let lay = layout(a.q)?;
    let lines: Vec<String> = words.iter().map(|w| format!("{} {} {}", w.j, w.k, w.l)).collect();
    let q = a.q as i64;
    let count_formula = ((q * q * q - q) / 3) as f64;
    let dim_formula = (2 * q * q + 2 * q) as f64 + count_formula;
    let rows = vec![
        Row::gate("lyndon_count", None, words.len() as f64, None, format!("== (q^3-q)/3 = {count_formula}"), words.len() as f64 == count_formula && lyndon_count(a.q) == words.len()),
        Row::gate("dimension", None, lay.d as f64, None, format!("== 2q^2+2q+(q^3-q)/3 = {dim_formula}"), lay.d as f64 == dim_formula),
    ];
    let results = json!({ "count": words.len(), "dimension": lay.d, "words": lines });
    Ok(Outcome { report: Report::new(config(cli, "lyndon", a)?, rows, results), lines })
}

fn sample(cli: &Cli, pool: &Pool, a: &SampleArgs) -> Result<Outcome> {
    if !(a.h.is_finite() && a.h > 0.0) {
        return Err(Error::Usage("--h must be positive".into()));
    }
    if let Some(dir) = &a.tableaus {
        std::fs::create_dir_all(dir)?;
    }
    let sets = pool.try_map(a.paths, |conv, i| {
        let t = sample_tableau(a.q, a.p, a.seed, i)?;
        if let Some(dir) = &a.tableaus {
            match a.tableau_format {
                TableauFormat::Binary => write_tableau_binary(&dir.join(format!("tableau-{i}.bin")), &t)?,
                TableauFormat::Csv => write_tableau_csv(std::fs::File::create(dir.join(format!("tableau-{i}.csv")))?, &t)?,
            }
        }
        let mut set = scale_to_interval(&integral_set(&t, conv), a.h)?;
        if a.convention == ConventionArg::Ito {
            set = stratonovich_to_ito(&set)?;
        }
        Ok((i, set))
    })?;
    let path = a.integrals.clone().unwrap_or_else(|| PathBuf::from("iterint-sample-integrals.csv"));
    write_integral_csv(std::fs::File::create(&path)?, &sets)?;
    let rows = vec![Row::data("paths", None, a.paths as f64, None)];
    let results = json!({ "integrals": path.display().to_string(), "rows_per_path": a.q + a.q * a.q + a.q * a.q * a.q });
    let lines = vec![format!("wrote {} integral sets to {}", a.paths, path.display())];
    Ok(Outcome { report: Report::new(config(cli, "sample", a)?, rows, results), lines })
}

fn identities(cli: &Cli, pool: &Pool, a: &IdentitiesArgs) -> Result<Outcome> {
    let r = identities_scan(pool, a.q, a.p, a.paths, a.seed)?;
    let rows = vec![
        Row::gate("nu_reversal_residual", Some(a.p as f64), r.nu, None, format!("<= {:e}", a.tol), r.nu <= a.tol),
        Row::gate("shuffle_residual", Some(a.p as f64), r.shuffle, None, format!("<= {:e}", a.tol), r.shuffle <= a.tol),
    ];
    let results = serde_json::to_value(r)?;
    Ok(Outcome { report: Report::new(config(cli, "identities", a)?, rows, results), lines: vec![] })
}

fn moments(cli: &Cli, pool: &Pool, a: &MomentsArgs) -> Result<Outcome> {
    let cfg = TailScanConfig {
        q: a.q,
        orders: vec![2, 4],
        p_grid: a.grid.clone(),
        n_multiplier: a.n_mult,
        paths: a.paths,
        seed: a.seed,
    };
    let scan = tail_moment_scan(pool, &cfg)?;
    let mut rows = Vec::new();
    for (rep, (m, target, tol)) in scan.reports.iter().zip([(2, -1.0, 0.1), (4, -2.0, 0.3)]) {
        for i in 0..rep.grid.len() {
            rows.push(Row::data(&format!("tail_moment_{m}"), Some(rep.grid[i]), rep.values[i], Some(rep.stderr[i])));
        }
        rows.push(Row::gate(
            &format!("tail_moment_{m}_slope"),
            None,
            rep.slope,
            Some(rep.slope_se),
            format!("{target} +/- {tol}"),
            within(rep.slope, target, tol),
        ));
    }
    let mut grid = a.grid.clone();
    grid.sort_unstable();
    if a.q >= 2 {
        for (i, &p) in grid.iter().enumerate() {
            let e = scan.lambda_second_moment[i];
            let analytic = scan.lambda_analytic[i];
            rows.push(Row::gate(
                "lambda_second_moment",
                Some(p as f64),
                e.value,
                Some(e.se),
                format!("|x - {analytic:e}| <= 3 se"),
                (e.value - analytic).abs() <= 3.0 * e.se,
            ));
        }
    }
    let results = serde_json::to_value(&scan)?;
    Ok(Outcome { report: Report::new(config(cli, "moments", a)?, rows, results), lines: vec![] })
}

fn grad_check(cli: &Cli, pool: &Pool, a: &GradCheckArgs) -> Result<Outcome> {
    let r = phase_check(pool, a.q, a.p, a.points, a.seed)?;
    let rows = vec![
        Row::gate("gradient_rel_error", None, r.gradient_rel, None, "<= 1e-5".into(), r.gradient_rel <= 1e-5),
        Row::gate("hessian_abs_error", None, r.hessian_abs, None, "<= 1e-4".into(), r.hessian_abs <= 1e-4),
        Row::gate("pairing_rel_error", None, r.pairing_rel, None, "<= 1e-10".into(), r.pairing_rel <= 1e-10),
    ];
    let results = serde_json::to_value(r)?;
    Ok(Outcome { report: Report::new(config(cli, "phase grad-check", a)?, rows, results), lines: vec![] })
}

/// Gates on a `þ_n` table: odd zeros, nonzero values for even `n` with
/// `n + 1` prime, the two smallest values, agreement of the exact methods
/// and strict decrease of `ln |þ_n|` along the even `n` with `n + 1` prime.
pub fn thorn_rows(table: &[crate::checks::ThornRow]) -> Vec<Row> {
    let mut rows = Vec::new();
    let mut last: Option<f64> = None;
    for t in table {
        let n = Some(t.n as f64);
        let est = t.log_abs.unwrap_or(f64::NEG_INFINITY);
        if t.n % 2 == 1 {
            rows.push(Row::gate("thorn_odd_zero", n, t.approx, None, "== 0".into(), t.log_abs.is_none()));
            continue;
        }
        if let Some(ok) = t.cross_checked {
            rows.push(Row::gate("thorn_methods_agree", n, t.approx, None, "pfaffian == elimination".into(), ok));
        }
        let expected = match t.n {
            2 => Some("1/9"),
            4 => Some("80089/31360000"),
            _ => None,
        };
        if let Some(e) = expected {
            rows.push(Row::gate("thorn_exact_value", n, t.approx, None, format!("== {e}"), t.exact == e));
        }
        if is_prime(t.n + 1) {
            rows.push(Row::gate("thorn_nonzero", n, est, None, "!= 0".into(), t.log_abs.is_some()));
            if let Some(prev) = last {
                rows.push(Row::gate("thorn_log_decreasing", n, est, None, format!("< {prev}"), est < prev));
            }
            last = Some(est);
        }
    }
    rows
}

fn thorn(cli: &Cli, pool: &Pool, a: &ThornArgs, name: &str) -> Result<Outcome> {
    let table = thorn_table(pool, a.n_max, a.cross_check_max)?;
    let lines = table.iter().map(|t| format!("{} {} {:e}", t.n, t.exact, t.approx)).collect();
    let rows = thorn_rows(&table);
    let results = serde_json::to_value(&table)?;
    Ok(Outcome { report: Report::new(config(cli, name, a)?, rows, results), lines })
}

fn charfn(cli: &Cli, pool: &Pool, a: &CharfnArgs, name: &str) -> Result<Outcome> {
    if a.radii.len() < 2 {
        return Err(Error::Usage("give at least two radii".into()));
    }
    let probes = charfn_probe(pool, a.q, a.p, a.samples, a.seed, a.dir_seed, a.directions, &a.radii)?;
    let mut rows = Vec::new();
    for pr in &probes {
        for i in 0..pr.radii.len() {
            rows.push(Row::data(&format!("charfn_modulus_dir{}", pr.direction), Some(pr.radii[i]), pr.modulus[i], Some(pr.se[i])));
        }
        let (i0, i1) = (0, pr.radii.len() - 1);
        let drop = pr.modulus[i0] - pr.modulus[i1];
        let se = (pr.se[i0] * pr.se[i0] + pr.se[i1] * pr.se[i1]).sqrt();
        rows.push(Row::gate(
            &format!("charfn_decay_dir{}", pr.direction),
            Some(pr.radii[i1]),
            drop,
            Some(se),
            format!("|psi(r={})| - |psi(r={})| > 4 se", pr.radii[i0], pr.radii[i1]),
            drop > 4.0 * se,
        ));
    }
    let results = serde_json::to_value(&probes)?;
    Ok(Outcome { report: Report::new(config(cli, name, a)?, rows, results), lines: vec![] })
}

/// Gates requiring strictly decreasing values beyond two combined
/// standard errors.
pub fn decreasing_rows(metric: &str, rep: &iterint_core::coupling_lab::RateReport) -> Vec<Row> {
    (1..rep.grid.len())
        .map(|i| {
            let drop = rep.values[i - 1] - rep.values[i];
            let se = (rep.stderr[i - 1].powi(2) + rep.stderr[i].powi(2)).sqrt();
            Row::gate(metric, Some(rep.grid[i]), drop, Some(se), "previous - current > 2 se".into(), drop > 2.0 * se)
        })
        .collect()
}

fn couple(cli: &Cli, pool: &Pool, a: &CoupleArgs) -> Result<Outcome> {
    let estimator = match a.estimator {
        EstimatorArg::Exact => Estimator::Exact,
        EstimatorArg::Sliced => Estimator::Sliced { projections: a.projections },
    };
    let kinds: Vec<CandidateKind> = match a.kind {
        KindArg::IndependentTail => vec![CandidateKind::IndependentTail],
        KindArg::GaussianMatched => vec![CandidateKind::GaussianMatched],
        KindArg::Both => vec![CandidateKind::IndependentTail, CandidateKind::GaussianMatched],
    };
    let mut rows = Vec::new();
    let mut results = serde_json::Map::new();
    let mut slopes = Vec::new();
    for kind in kinds {
        let pairing = match a.pairing {
            PairingArg::SharedHead => Pairing::SharedHead,
            PairingArg::Independent => Pairing::Independent,
        };
        let cfg = CouplingConfig { q: a.q, p_grid: a.grid.clone(), kind, p_ref: a.p_ref, samples: a.paths, estimator, pairing, seed: a.seed };
        let scan = coupling_rate_scan(pool, &cfg)?;
        let name = match kind {
            CandidateKind::IndependentTail => "independent-tail",
            CandidateKind::GaussianMatched => "gaussian-matched",
        };
        let rep = &scan.report;
        for i in 0..rep.grid.len() {
            rows.push(Row::data(&format!("w2_{name}"), Some(rep.grid[i]), rep.values[i], Some(rep.stderr[i])));
        }
        rows.extend(decreasing_rows(&format!("w2_{name}_decreasing"), rep));
        if kind == CandidateKind::IndependentTail {
            rows.push(Row::gate(&format!("w2_{name}_slope"), None, rep.slope, Some(rep.slope_se), "-0.5 +/- 0.25".into(), within(rep.slope, -0.5, 0.25)));
        } else {
            rows.push(Row::data(&format!("w2_{name}_slope"), None, rep.slope, Some(rep.slope_se)));
        }
        slopes.push(rep.slope);
        results.insert(name.into(), serde_json::to_value(&scan)?);
    }
    if let [ind, gauss] = slopes[..] {
        rows.push(Row::gate(
            "w2_slope_gaussian_vs_independent",
            None,
            gauss - ind,
            None,
            "gaussian slope <= independent slope + 0.1".into(),
            gauss <= ind + 0.1,
        ));
    }
    Ok(Outcome { report: Report::new(config(cli, "couple", a)?, rows, serde_json::Value::Object(results)), lines: vec![] })
}

/// Expected strong order and tolerance of a scheme on a problem.
pub fn expected_order(scheme: SchemeKind, problem: &str) -> (f64, f64) {
    match scheme {
        SchemeKind::Euler => (0.5, 0.15),
        SchemeKind::Milstein => (1.0, 0.15),
        SchemeKind::Taylor15 if problem == "bilinear2d" => (1.5, 0.25),
        SchemeKind::Taylor15 => (1.5, 0.2),
    }
}

fn sde(cli: &Cli, pool: &Pool, a: &SdeArgs) -> Result<Outcome> {
    let problem = problem_by_name(&a.problem)?;
    let scheme = SchemeKind::parse(&a.scheme)?;
    let x0 = if a.x0.is_empty() { vec![1.0; problem.dim()] } else { a.x0.clone() };
    let has_exact = problem.exact_solution(&x0, 0.0, &vec![0.0; problem.noise_dim()]).is_some();
    let reference = match a.reference {
        ReferenceArg::Exact => Reference::Exact,
        ReferenceArg::Refined => Reference::Refined { levels: a.levels },
        ReferenceArg::Auto if has_exact => Reference::Exact,
        ReferenceArg::Auto => Reference::Refined { levels: a.levels },
    };
    let cfg = ScanConfig {
        scheme,
        h_grid: a.h_grid.clone(),
        paths: a.paths,
        seed: a.seed,
        t_end: a.t_end,
        x0,
        driver_modes: a.driver_modes,
        reference,
    };
    let rep = strong_error_scan(pool, &problem, &cfg)?;
    let (target, tol) = expected_order(scheme, &a.problem);
    let mut rows: Vec<Row> = (0..rep.grid.len())
        .map(|i| Row::data("strong_error", Some(rep.grid[i]), rep.values[i], Some(rep.stderr[i])))
        .collect();
    rows.push(Row::gate("strong_order", None, rep.slope, Some(rep.slope_se), format!("{target} +/- {tol}"), within(rep.slope, target, tol)));
    let results = serde_json::to_value(&rep)?;
    Ok(Outcome { report: Report::new(config(cli, "sde", a)?, rows, results), lines: vec![] })
}
