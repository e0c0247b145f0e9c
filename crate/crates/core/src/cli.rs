//! `cubicvar` command line.
//!
//! Every command returns a [`Report`]: a metadata block echoing the resolved
//! configuration, plus either a single record or a table. CSV output is
//! `# key=value` metadata lines, a header row and the values (floats with 17
//! significant digits). JSON output is one object with a `metadata` block and
//! the record fields, or a `rows` array of flat objects.
//!
//! Exit codes: 0 success, 1 failed `verify`, 2 usage or parse error, 3 numeric
//! failure.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_integer::Integer;
use num_rational::Ratio;
use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::exact_cov::s_n_exact;
use crate::flseries::{kappa_squared_truncated, FlEvaluator, LValue};
use crate::mc_sim::{mc_pairs, sample_correlation, McEstimate, XrhoSimulator};
use crate::rho_limit::{correlation_curve, Regime, RhoFunction};
use crate::seq_classify::{classify, parse_seq, AveragedReason, DegenerateLimit, LimitKind};
use crate::verify::run_all;

/// Largest `lcm(a, b) · t` the simulator accepts.
pub const MAX_SIM_GRID: f64 = (1u64 << 22) as f64;

#[derive(Parser, Debug)]
#[command(name = "cubicvar", version, about = "Limit covariance of the signed cubic variation of fBm with H = 1/6")]
pub struct Cli {
    /// Output format; `classify` defaults to json, everything else to csv.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Master seed, decimal or 0x-prefixed hex.
    #[arg(long, global = true, env = "CUBICVAR_SEED", value_parser = parse_seed, default_value = "0xC0FFEE")]
    pub seed: u64,
    /// Absolute error target for series and quadrature.
    #[arg(long, global = true, default_value_t = 1e-7, value_parser = parse_tol, allow_negative_numbers = true)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// κ² and the truncation order used.
    Kappa,
    /// f_L at a point or on the grid j/N, j = 0..=N.
    Fl {
        #[arg(long = "L")]
        l: String,
        #[arg(long, conflicts_with = "grid", required_unless_present = "grid", allow_negative_numbers = true)]
        at: Option<f64>,
        #[arg(long)]
        grid: Option<u64>,
        /// Recognize a decimal `--L` as p/q (denominator <= 10^6).
        #[arg(long)]
        assume_rational: bool,
    },
    /// ρ(t) and corr(t) for a regime.
    Rho {
        #[command(flatten)]
        regime: RegimeArgs,
        #[arg(long, conflicts_with = "curve", required_unless_present = "curve", allow_negative_numbers = true)]
        t: Option<f64>,
        /// T0:T1:STEPS, STEPS points including both ends.
        #[arg(long)]
        curve: Option<String>,
    },
    /// Regime of a sequence pair.
    Classify {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 1024)]
        n_probe: u64,
    },
    /// Exact E[W_a(t) W_b(t)] against the limit.
    ExactCov {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        /// Limit regime; defaults to L = b/a with k = 0.
        #[command(flatten)]
        regime: OptionalRegime,
    },
    /// Monte Carlo correlation of (W_a(t), W_b(t)).
    Simulate {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        #[arg(long)]
        reps: usize,
    },
    /// Euler simulation of the limit process X^ρ.
    Xrho {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long, allow_negative_numbers = true)]
        k: f64,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        reps: usize,
    },
    /// Run the acceptance checks.
    Verify {
        /// Skip the two Monte Carlo checks.
        #[arg(long)]
        fast: bool,
    },
}

#[derive(Args, Debug)]
pub struct RegimeArgs {
    #[arg(long, requires_all = ["q", "k"], conflicts_with = "l", required_unless_present = "l")]
    p: Option<u64>,
    #[arg(long, requires = "p")]
    q: Option<u64>,
    #[arg(long, requires = "p", allow_negative_numbers = true)]
    k: Option<f64>,
    /// Averaged regime (k infinite or L irrational).
    #[arg(long = "L")]
    l: Option<String>,
    #[arg(long)]
    assume_rational: bool,
}

#[derive(Args, Debug)]
pub struct OptionalRegime {
    #[arg(long, requires_all = ["q", "k"], conflicts_with = "l")]
    p: Option<u64>,
    #[arg(long, requires = "p")]
    q: Option<u64>,
    #[arg(long, requires = "p", allow_negative_numbers = true)]
    k: Option<f64>,
    #[arg(long = "L")]
    l: Option<String>,
    #[arg(long)]
    assume_rational: bool,
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("`{s}` is not a u64 seed: {e}"))
}

fn parse_tol(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive tolerance")),
    }
}

/// A failure, tagged with the flag it came from when there is one.
#[derive(Debug)]
pub struct CliError {
    pub flag: Option<&'static str>,
    pub error: Error,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        if self.error.is_numeric() {
            3
        } else {
            2
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.flag {
            Some(flag) => write!(f, "{flag}: {}", self.error),
            None => write!(f, "{}", self.error),
        }
    }
}

impl From<Error> for CliError {
    fn from(error: Error) -> Self {
        CliError { flag: None, error }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn at_flag<T>(flag: &'static str, r: crate::Result<T>) -> CliResult<T> {
    r.map_err(|error| CliError { flag: Some(flag), error })
}

fn usage(flag: &'static str, msg: impl Into<String>) -> CliError {
    CliError {
        flag: Some(flag),
        error: Error::InvalidArgument(msg.into()),
    }
}

pub enum Body {
    Record(Map<String, Value>),
    Table { columns: Vec<&'static str>, rows: Vec<Vec<Value>> },
}

pub struct Report {
    pub metadata: Map<String, Value>,
    pub body: Body,
    /// Exit status on success.
    pub status: i32,
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format!("{:.16e}", n.as_f64().unwrap()),
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut obj = Map::new();
                obj.insert("metadata".into(), Value::Object(self.metadata.clone()));
                match &self.body {
                    Body::Record(m) => obj.extend(m.clone()),
                    Body::Table { columns, rows } => {
                        let rows = rows
                            .iter()
                            .map(|r| {
                                Value::Object(columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect())
                            })
                            .collect();
                        obj.insert("rows".into(), Value::Array(rows));
                    }
                }
                let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("json values serialize");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut out = String::new();
                for (k, v) in &self.metadata {
                    let v = match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    out.push_str(&format!("# {k}={v}\n"));
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                let write = |w: &mut csv::Writer<Vec<u8>>, rec: Vec<String>| w.write_record(rec).expect("in-memory csv write");
                match &self.body {
                    Body::Record(m) => {
                        write(&mut w, m.keys().cloned().collect());
                        write(&mut w, m.values().map(cell).collect());
                    }
                    Body::Table { columns, rows } => {
                        write(&mut w, columns.iter().map(|c| c.to_string()).collect());
                        for r in rows {
                            write(&mut w, r.iter().map(cell).collect());
                        }
                    }
                }
                out.push_str(&String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8"));
                out
            }
        }
    }
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn record(pairs: Vec<(&str, Value)>) -> Map<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn parse_l(raw: &str, assume_rational: bool) -> CliResult<LValue> {
    let l: LValue = at_flag("--L", raw.parse())?;
    if l.is_rational() || !assume_rational {
        return Ok(l);
    }
    at_flag("--L", LValue::recognize(l.value()))
}

fn parse_curve(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(usage("--curve", format!("`{s}` is not T0:T1:STEPS")));
    }
    let t0: f64 = parts[0].trim().parse().map_err(|_| usage("--curve", format!("bad T0 `{}`", parts[0])))?;
    let t1: f64 = parts[1].trim().parse().map_err(|_| usage("--curve", format!("bad T1 `{}`", parts[1])))?;
    let steps: usize = parts[2].trim().parse().map_err(|_| usage("--curve", format!("bad STEPS `{}`", parts[2])))?;
    if !(t0 >= 0.0 && t1 >= t0 && t1.is_finite()) || steps == 0 {
        return Err(usage("--curve", format!("need 0 <= T0 <= T1 and STEPS >= 1 (got `{s}`)")));
    }
    if steps == 1 {
        return Ok(vec![t0]);
    }
    let h = (t1 - t0) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i + 1 == steps { t1 } else { t0 + i as f64 * h })
        .collect())
}

fn build_rho(
    p: Option<u64>,
    q: Option<u64>,
    k: Option<f64>,
    l: Option<&str>,
    assume_rational: bool,
    tol: f64,
) -> CliResult<Option<RhoFunction>> {
    match (p, q, k, l) {
        (Some(p), Some(q), Some(k), None) => Ok(Some(at_flag("--p/--q/--k", RhoFunction::rational(p, q, k, tol))?)),
        (None, None, None, Some(raw)) => {
            let l = parse_l(raw, assume_rational)?;
            Ok(Some(at_flag("--L", RhoFunction::averaged(l, tol))?))
        }
        _ => Ok(None),
    }
}

fn regime_metadata(meta: &mut Map<String, Value>, rho: &RhoFunction) {
    match rho.regime() {
        Regime::RationalFiniteK { p, q, k } => {
            meta.insert("regime".into(), json!("RationalFiniteK"));
            meta.insert("p".into(), json!(p));
            meta.insert("q".into(), json!(q));
            meta.insert("k".into(), num(k));
        }
        Regime::Averaged { l } => {
            meta.insert("regime".into(), json!("Averaged"));
            meta.insert("L".into(), json!(l.to_string()));
            meta.insert("L_rational".into(), json!(l.is_rational()));
        }
        Regime::Independent => {
            meta.insert("regime".into(), json!("Independent"));
        }
    }
    meta.insert("kappa2".into(), num(rho.kappa2()));
    meta.insert("order".into(), json!(rho.evaluator().order()));
}

fn base_metadata(cli: &Cli, command: &str) -> Map<String, Value> {
    record(vec![
        ("command", json!(command)),
        ("version", json!(env!("CARGO_PKG_VERSION"))),
        ("seed", json!(cli.seed)),
        ("tol", num(cli.tol)),
    ])
}

fn ratio_value(k: &Ratio<i128>) -> Value {
    if k.is_integer() {
        json!(*k.numer() as i64)
    } else {
        num(*k.numer() as f64 / *k.denom() as f64)
    }
}

/// Execute a parsed command line.
pub fn execute(cli: &Cli) -> CliResult<Report> {
    let tol = cli.tol;
    let seed = cli.seed;
    let report = match &cli.command {
        Command::Kappa => {
            let k = kappa_squared_truncated(tol)?;
            Report {
                metadata: base_metadata(cli, "kappa"),
                body: Body::Record(record(vec![("kappa2", num(k.value)), ("order", json!(k.order))])),
                status: 0,
            }
        }
        Command::Fl { l, at, grid, assume_rational } => {
            let l = parse_l(l, *assume_rational)?;
            let ev = FlEvaluator::new(l, tol)?;
            let xs: Vec<f64> = match (at, grid) {
                (Some(x), _) => vec![*x],
                (None, Some(0)) => return Err(usage("--grid", "N must be >= 1")),
                (None, Some(n)) => (0..=*n).map(|j| j as f64 / *n as f64).collect(),
                (None, None) => return Err(usage("--at", "one of --at or --grid is required")),
            };
            let mut meta = base_metadata(cli, "fl");
            meta.insert("L".into(), json!(l.to_string()));
            meta.insert("L_rational".into(), json!(l.is_rational()));
            meta.insert("order".into(), json!(ev.order()));
            Report {
                metadata: meta,
                body: Body::Table {
                    columns: vec!["x", "f_L"],
                    rows: xs.iter().map(|&x| vec![num(x), num(ev.eval(x))]).collect(),
                },
                status: 0,
            }
        }
        Command::Rho { regime, t, curve } => {
            let r = regime;
            let rho = build_rho(r.p, r.q, r.k, r.l.as_deref(), r.assume_rational, tol)?
                .ok_or_else(|| usage("--p", "give either --p/--q/--k or --L"))?;
            let ts = match (t, curve) {
                (Some(t), _) if *t >= 0.0 => vec![*t],
                (Some(t), _) => return Err(usage("--t", format!("t = {t} must be >= 0"))),
                (None, Some(c)) => parse_curve(c)?,
                (None, None) => return Err(usage("--t", "one of --t or --curve is required")),
            };
            let mut rows = Vec::with_capacity(ts.len());
            for &t in &ts {
                let value = rho.eval(t);
                let corr = if t == 0.0 { value / rho.kappa2() } else { correlation_curve(&rho, t, tol)? };
                rows.push(vec![num(t), num(value), num(corr)]);
            }
            let mut meta = base_metadata(cli, "rho");
            regime_metadata(&mut meta, &rho);
            if let Some(c) = curve {
                meta.insert("curve".into(), json!(c));
            }
            Report {
                metadata: meta,
                body: Body::Table { columns: vec!["t", "rho", "corr"], rows },
                status: 0,
            }
        }
        Command::Classify { a, b, n_probe } => {
            let ea = at_flag("--a", parse_seq(a))?;
            let eb = at_flag("--b", parse_seq(b))?;
            let class = at_flag("--a/--b", classify(&ea, &eb, *n_probe))?;
            let mut body = record(vec![("kind", json!(class.kind.name())), ("label", json!(class.kind.label()))]);
            match &class.kind {
                LimitKind::RationalFiniteK { p, q, k } => {
                    body.insert("p".into(), json!(p));
                    body.insert("q".into(), json!(q));
                    body.insert("k".into(), ratio_value(k));
                    body.insert("k_exact".into(), json!(k.to_string()));
                }
                LimitKind::Averaged { l, reason } => {
                    if let Some((p, q)) = l.rational_form() {
                        body.insert("p".into(), json!(p));
                        body.insert("q".into(), json!(q));
                    }
                    body.insert("L".into(), num(l.value()));
                    let reason = match reason {
                        AveragedReason::RationalKInfinite => "rational_k_infinite",
                        AveragedReason::Irrational => "irrational",
                    };
                    body.insert("reason".into(), json!(reason));
                }
                LimitKind::Degenerate(d) => {
                    let limit = match d {
                        DegenerateLimit::Zero => "0",
                        DegenerateLimit::Infinity => "inf",
                    };
                    body.insert("limit".into(), json!(limit));
                }
                LimitKind::Undetermined { diagnostics } => {
                    body.insert("diagnostics".into(), json!(diagnostics));
                }
            }
            body.insert("evidence".into(), serde_json::to_value(&class.evidence).expect("evidence serializes"));
            let mut meta = base_metadata(cli, "classify");
            meta.insert("a".into(), json!(ea.to_string()));
            meta.insert("b".into(), json!(eb.to_string()));
            meta.insert("n_probe".into(), json!(n_probe));
            Report {
                metadata: meta,
                body: Body::Record(body),
                status: 0,
            }
        }
        Command::ExactCov { a, b, t, regime } => {
            if *a == 0 || *b == 0 {
                return Err(usage("--a", "a and b must be >= 1"));
            }
            let r = regime;
            let rho = match build_rho(r.p, r.q, r.k, r.l.as_deref(), r.assume_rational, tol)? {
                Some(rho) => rho,
                None => {
                    let g = a.gcd(b);
                    RhoFunction::rational(b / g, a / g, 0.0, tol)?
                }
            };
            let rep = at_flag("--t", s_n_exact(*a, *b, *t, Some(&rho)))?;
            let mut meta = base_metadata(cli, "exact-cov");
            meta.insert("a".into(), json!(a));
            meta.insert("b".into(), json!(b));
            meta.insert("t".into(), num(*t));
            regime_metadata(&mut meta, &rho);
            let body = record(vec![
                ("s", num(rep.s)),
                ("var_a", num(rep.var_a)),
                ("var_b", num(rep.var_b)),
                ("corr", num(rep.corr)),
                ("predicted", rep.predicted.map_or(Value::Null, num)),
                ("gap", rep.gap.map_or(Value::Null, num)),
            ]);
            Report {
                metadata: meta,
                body: Body::Record(body),
                status: 0,
            }
        }
        Command::Simulate { a, b, t, reps } => {
            if *a == 0 || *b == 0 {
                return Err(usage("--a", "a and b must be >= 1"));
            }
            if *reps < 2 {
                return Err(usage("--reps", "need at least 2 replicas"));
            }
            if !(*t > 0.0 && t.is_finite()) {
                return Err(usage("--t", format!("t = {t} must be > 0")));
            }
            let grid = a.lcm(b);
            if grid as f64 * t > MAX_SIM_GRID {
                return Err(usage(
                    "--t",
                    format!("lcm(a, b) * t = {} exceeds the limit 2^22", grid as f64 * t),
                ));
            }
            let (xs, ys) = mc_pairs(*a, *b, *t, *reps, seed)?;
            let corr = sample_correlation(&xs, &ys);
            let sq = |v: &[f64], w: &[f64]| McEstimate::from_samples(&v.iter().zip(w).map(|(x, y)| x * y).collect::<Vec<_>>());
            let (va, vb, cov) = (sq(&xs, &xs), sq(&ys, &ys), sq(&xs, &ys));
            let mut meta = base_metadata(cli, "simulate");
            meta.insert("a".into(), json!(a));
            meta.insert("b".into(), json!(b));
            meta.insert("t".into(), num(*t));
            meta.insert("reps".into(), json!(reps));
            meta.insert("grid".into(), json!(grid));
            meta.insert("rng".into(), json!("chacha20, stream = replica index"));
            let body = record(vec![
                ("corr", num(corr.mean)),
                ("corr_std_error", num(corr.std_error)),
                ("var_a", num(va.mean)),
                ("var_a_std_error", num(va.std_error)),
                ("var_b", num(vb.mean)),
                ("var_b_std_error", num(vb.std_error)),
                ("cov", num(cov.mean)),
                ("cov_std_error", num(cov.std_error)),
            ]);
            Report {
                metadata: meta,
                body: Body::Record(body),
                status: 0,
            }
        }
        Command::Xrho { p, q, k, horizon, steps, reps } => {
            if *reps < 2 {
                return Err(usage("--reps", "need at least 2 replicas"));
            }
            let rho = at_flag("--p/--q/--k", RhoFunction::rational(*p, *q, *k, tol))?;
            let sim = at_flag("--steps", XrhoSimulator::new(&rho, *horizon, *steps))?;
            let s = sim.summarize(*reps, seed);
            let mut meta = base_metadata(cli, "xrho");
            regime_metadata(&mut meta, &rho);
            meta.insert("T".into(), num(*horizon));
            meta.insert("steps".into(), json!(steps));
            meta.insert("reps".into(), json!(reps));
            meta.insert("terminal_var_limit".into(), num(rho.kappa2() * horizon));
            meta.insert("terminal_cov_limit".into(), num(rho.integral(*horizon, tol)?));
            meta.insert("terminal_var1_std_error".into(), num(s.terminal_var1.std_error));
            meta.insert("terminal_var2_std_error".into(), num(s.terminal_var2.std_error));
            meta.insert("terminal_cov_std_error".into(), num(s.terminal_cov.std_error));
            let rows = (0..s.times.len())
                .map(|i| vec![num(s.times[i]), num(s.var1[i]), num(s.var2[i]), num(s.cov[i])])
                .collect();
            Report {
                metadata: meta,
                body: Body::Table { columns: vec!["t", "var1", "var2", "cov"], rows },
                status: 0,
            }
        }
        Command::Verify { fast } => {
            let outcomes = run_all(seed, *fast);
            for o in &outcomes {
                eprintln!("{}", o.line());
            }
            let passed = outcomes.iter().all(|o| o.passed);
            let mut meta = base_metadata(cli, "verify");
            meta.insert("fast".into(), json!(fast));
            meta.insert("passed".into(), json!(passed));
            let rows = outcomes
                .iter()
                .map(|o| {
                    vec![
                        json!(o.id),
                        json!(o.name),
                        json!(o.status()),
                        json!(o.claim),
                        json!(o.computed),
                        num(o.elapsed_s),
                        num(o.budget_s),
                    ]
                })
                .collect();
            Report {
                metadata: meta,
                body: Body::Table {
                    columns: vec!["id", "name", "status", "claim", "computed", "elapsed_s", "budget_s"],
                    rows,
                },
                status: if passed { 0 } else { 1 },
            }
        }
    };
    Ok(report)
}

fn default_format(command: &Command) -> Format {
    match command {
        Command::Classify { .. } => Format::Json,
        _ => Format::Csv,
    }
}

/// Parse `argv`, run, write the report, and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let text = report.render(cli.format.unwrap_or_else(|| default_format(&cli.command)));
    let written = match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("--output {}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| format!("stdout: {e}")),
    };
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        return 2;
    }
    report.status
}
