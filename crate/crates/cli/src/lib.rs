//! Command-line front end for `padic-fracint`.
//!
//! [`run`] parses an argument vector, runs one subcommand and writes a CSV
//! or JSON report. Every report starts with the full run configuration so a
//! result can be reproduced from its own output.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use padic_fracint::{
    b_coefficient, default_ladder, ialpha_eval, lemma_decay_check, mc_ialpha_eval, omega, omega_tilde,
    prefactor, ratio_bound_check, residual_scan, unit_kernel_integral, Eq13Form, Error, InnerTail, Lemma,
    LogBase, NumericContext, OuterTail, RadialFunction, Real, ScanOptions, Table, Theorem, DEFAULT_REL_TOL,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

pub const TABLE_MAGIC: &str = "#padic-radial v1";
pub const DEFAULT_SEED: u64 = 1;
const MAX_LADDER_POINTS: usize = 100_000;

#[derive(Parser, Debug)]
#[command(name = "padic-frac", version, about = "p-adic fractional integration of radial functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
enum Sub {
    Constants,
    Eval,
    Theorem1,
    Theorem2,
    Theorem3,
    Theorem4,
    Lemmas,
    Mc,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form constants: C, U, b(0), Omega and Omega-tilde.
    Constants(Opts),
    /// I^alpha f over a ladder of exponents.
    Eval(Opts),
    /// Residuals of the expansion at the origin.
    Theorem1(Opts),
    /// Ratio |I^alpha f(x)| / |x|^(alpha-1) at infinity.
    Theorem2(Opts),
    /// Residuals of the log-power expansion at infinity, beta < 1.
    Theorem3(Opts),
    /// Residuals of the log-power expansion at infinity, beta = 1.
    Theorem4(Opts),
    /// Normalised decay sequences of the two lemmas.
    Lemmas(Opts),
    /// Monte Carlo estimates against the exact operator.
    Mc(Opts),
}

impl Command {
    fn split(self) -> (Sub, Opts) {
        match self {
            Command::Constants(o) => (Sub::Constants, o),
            Command::Eval(o) => (Sub::Eval, o),
            Command::Theorem1(o) => (Sub::Theorem1, o),
            Command::Theorem2(o) => (Sub::Theorem2, o),
            Command::Theorem3(o) => (Sub::Theorem3, o),
            Command::Theorem4(o) => (Sub::Theorem4, o),
            Command::Lemmas(o) => (Sub::Lemmas, o),
            Command::Mc(o) => (Sub::Mc, o),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LogBaseArg {
    Natural,
    P,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Prime; taken from the table preamble when omitted with --table.
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// a0,a1,... expansion coefficients.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    coeffs: Vec<f64>,
    /// M0,M1,... exponents of the expansion at the origin.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    scales: Vec<f64>,
    /// f = |y|^M.
    #[arg(long, allow_hyphen_values = true, group = "func")]
    monomial: Option<f64>,
    /// f = indicator of |y| <= p^n.
    #[arg(long, allow_hyphen_values = true, group = "func")]
    indicator: Option<i64>,
    /// f = min(1, |y|^-D).
    #[arg(long, allow_hyphen_values = true, group = "func")]
    decay: Option<f64>,
    /// f read from a table file.
    #[arg(long, group = "func")]
    table: Option<PathBuf>,
    /// start:stop:step (inclusive) or a comma list of exponents.
    #[arg(long, allow_hyphen_values = true)]
    ladder: Option<String>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, default_value_t = padic_fracint::DEFAULT_PRECISION_BITS)]
    precision_bits: usize,
    #[arg(long, value_enum, default_value = "natural")]
    log_base: LogBaseArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Use the printed beta = 1 form, without the |x|^(alpha-1) factor on the log series.
    #[arg(long)]
    eq13_printed: bool,
    /// Largest k for the Omega constants.
    #[arg(long, default_value_t = 2)]
    kmax: u32,
    /// eval: write the function as a table file over the ladder range instead.
    #[arg(long)]
    dump_table: bool,
    /// lemmas: decay exponent of the first lemma.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// lemmas: log power of the small-ball kernel.
    #[arg(long)]
    k: Option<u32>,
    /// lemmas: slack exponent of the small-ball bound.
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
}

/// Configuration echoed at the top of every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    subcommand: Sub,
    p: u64,
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
    coeffs: Vec<f64>,
    scales: Vec<f64>,
    function: Option<String>,
    table_file: Option<String>,
    ladder: Vec<i64>,
    n_order: Option<usize>,
    seed: Option<u64>,
    samples: Option<u64>,
    precision_bits: usize,
    log_base: LogBase,
    format: Format,
    eq13_printed: bool,
    kmax: Option<u32>,
    lambda: Option<f64>,
    k: Option<u32>,
    epsilon: Option<f64>,
}

/// Failure of a run, mapped onto the exit status.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Lib(e) if e.is_numeric() => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Runs the command line `argv` (program name first). Returns the exit
/// status: 0 on success, 2 for rejected input, 3 for numeric failure.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let (sub, opts) = cli.command.split();
    // Reports are built in memory so a failure leaves no partial output.
    let mut buf = Vec::new();
    match execute(sub, &opts, &mut buf) {
        Ok(()) => match out.write_all(&buf).and_then(|_| out.flush()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                2
            }
        },
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.code()
        }
    }
}

fn need<T: Copy>(v: Option<T>, flag: &str, sub: Sub) -> Result<T, Failure> {
    v.ok_or_else(|| usage(format!("--{flag} is required for {}", sub_name(sub))))
}

fn sub_name(sub: Sub) -> String {
    sub.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

/// Parses `start:stop:step` (inclusive) or a comma list.
pub fn parse_ladder(text: &str) -> Result<Vec<i64>, String> {
    let bad = || format!("--ladder {text:?}: expected start:stop:step or a comma list of integers");
    let int = |s: &str| s.trim().parse::<i64>().map_err(|_| bad());
    let out: Vec<i64> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [a, b, s] = parts.as_slice() else { return Err(bad()) };
        let (a, b, s) = (int(a)?, int(b)?, int(s)?);
        if s <= 0 {
            return Err(format!("--ladder {text:?}: step must be positive"));
        }
        if b < a {
            return Err(format!("--ladder {text:?}: stop is below start"));
        }
        if (b - a) / s >= MAX_LADDER_POINTS as i64 {
            return Err(format!("--ladder {text:?}: more than {MAX_LADDER_POINTS} points"));
        }
        (0..=(b - a) / s).map(|i| a + i * s).collect()
    } else {
        text.split(',').map(int).collect::<Result<_, _>>()?
    };
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Preamble {
    p: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inner_tail: Option<InnerTail>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    outer_tail: Option<OuterTail>,
}

/// Parses a table file. Returns the prime named in the preamble and the
/// tabulated function.
pub fn parse_table(text: &str) -> padic_fracint::Result<(u64, RadialFunction)> {
    let perr = |line: usize, msg: String| Error::ParseError { line, msg };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    match lines.next() {
        Some((_, l)) if l == TABLE_MAGIC => {}
        _ => return Err(perr(1, format!("expected {TABLE_MAGIC:?}"))),
    }
    let (_, pre) = lines.next().ok_or_else(|| perr(2, "missing JSON preamble".into()))?;
    let pre: Preamble = serde_json::from_str(pre).map_err(|e| perr(2, format!("bad preamble: {e}")))?;
    if let Some(o) = &pre.outer_tail {
        OuterTail::new(o.beta, o.gamma, o.coeffs.clone()).map_err(|e| perr(2, e.to_string()))?;
    }
    let mut lo = None;
    let mut values = Vec::new();
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (e, v) = line.split_once(',').ok_or_else(|| perr(n, "expected `exponent,value`".into()))?;
        let e: i64 = e.trim().parse().map_err(|_| perr(n, format!("bad exponent {:?}", e.trim())))?;
        let v: f64 = v.trim().parse().map_err(|_| perr(n, format!("bad value {:?}", v.trim())))?;
        if !v.is_finite() {
            return Err(perr(n, format!("non-finite value {v}")));
        }
        match lo {
            None => lo = Some(e),
            Some(l) => {
                let expected = l + values.len() as i64;
                if e < expected {
                    return Err(perr(n, format!("exponent {e} is not strictly increasing")));
                }
                if e > expected {
                    return Err(perr(n, format!("gap in exponents: expected {expected}, found {e}")));
                }
            }
        }
        values.push(v);
    }
    let lo = lo.ok_or_else(|| perr(text.lines().count().max(2), "table has no rows".into()))?;
    let inner = pre.inner_tail.ok_or(Error::MissingTail(lo - 1))?;
    let table = Table::new(lo, values, inner, pre.outer_tail)?;
    Ok((pre.p, RadialFunction::Table(table)))
}

/// Reads and parses a table file.
pub fn load_table(path: &Path) -> Result<(u64, RadialFunction), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_table(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Serialises a table in the format read by [`parse_table`].
pub fn dump_table(p: u64, table: &Table) -> String {
    let pre = Preamble { p, inner_tail: Some(table.inner_tail().clone()), outer_tail: table.outer_tail().cloned() };
    let mut s = format!("{TABLE_MAGIC}\n{}\n", serde_json::to_string(&pre).expect("preamble serialises"));
    for (e, v) in table.rows() {
        s.push_str(&format!("{e},{v:e}\n"));
    }
    s
}

fn fmt_real(r: &Real) -> String {
    r.to_sci_string(17)
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Rows of string cells with a fixed header, rendered as CSV or JSON.
struct Report {
    config: RunConfig,
    extra: Map<String, Value>,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Report {
    fn new(config: RunConfig, header: &[&'static str]) -> Self {
        Report { config, extra: Map::new(), header: header.to_vec(), rows: Vec::new() }
    }

    fn write(&self, out: &mut Vec<u8>) -> Result<(), Failure> {
        let config = serde_json::to_value(&self.config).expect("config serialises");
        match self.config.format {
            Format::Csv => {
                writeln!(out, "# {config}")?;
                if !self.extra.is_empty() {
                    writeln!(out, "# {}", Value::Object(self.extra.clone()))?;
                }
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.header)?;
                for r in &self.rows {
                    w.write_record(r)?;
                }
                w.flush()?;
            }
            Format::Json => {
                // Numbers are strings: big-float values can leave the f64 range.
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let obj = self.header.iter().zip(r).map(|(h, c)| {
                            let v = match (*h, c.parse::<i64>()) {
                                ("x_exp" | "k", Ok(i)) => json!(i),
                                _ => json!(c),
                            };
                            (h.to_string(), v)
                        });
                        Value::Object(obj.collect())
                    })
                    .collect();
                let mut doc = Map::new();
                doc.insert("config".into(), config);
                for (k, v) in &self.extra {
                    doc.insert(k.clone(), v.clone());
                }
                doc.insert("rows".into(), Value::Array(rows));
                serde_json::to_writer_pretty(&mut *out, &Value::Object(doc)).map_err(std::io::Error::from)?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

struct Setup {
    ctx: NumericContext,
    config: RunConfig,
    func: Option<RadialFunction>,
}

fn explicit_function(opts: &Opts) -> Result<Option<(RadialFunction, String, Option<u64>)>, Failure> {
    Ok(if let Some(m) = opts.monomial {
        Some((RadialFunction::monomial(m), format!("monomial {m}"), None))
    } else if let Some(n) = opts.indicator {
        Some((RadialFunction::indicator(n), format!("indicator {n}"), None))
    } else if let Some(d) = opts.decay {
        Some((RadialFunction::capped_power(d)?, format!("capped power {d}"), None))
    } else if let Some(path) = &opts.table {
        let (p, f) = load_table(path).map_err(usage)?;
        Some((f, "table".into(), Some(p)))
    } else {
        None
    })
}

fn setup(sub: Sub, opts: &Opts) -> Result<Setup, Failure> {
    let explicit = explicit_function(opts)?;
    let table_p = explicit.as_ref().and_then(|e| e.2);
    let p = match (opts.p, table_p) {
        (Some(p), Some(tp)) if p != tp => return Err(Error::PrimeMismatch(tp, p).into()),
        (Some(p), _) | (None, Some(p)) => p,
        (None, None) => return Err(usage(format!("--p is required for {}", sub_name(sub)))),
    };
    let log_base = match opts.log_base {
        LogBaseArg::Natural => LogBase::Natural,
        LogBaseArg::P => LogBase::BaseP,
    };
    let ctx = NumericContext::new(p, opts.precision_bits, log_base, DEFAULT_REL_TOL)?;
    let ladder = match &opts.ladder {
        Some(s) => parse_ladder(s).map_err(usage)?,
        None => match sub {
            Sub::Theorem1 => default_ladder(Theorem::T1),
            Sub::Eval | Sub::Mc => vec![-4, 0, 4],
            Sub::Constants => vec![],
            _ => default_ladder(Theorem::T3),
        },
    };
    let implied_tail = explicit.is_none() && matches!(sub, Sub::Theorem3 | Sub::Theorem4) && opts.gamma.is_some();
    let (func, name) = match explicit {
        Some((f, name, _)) => (Some(f), Some(name)),
        None => match implied_function(sub, opts, &ctx)? {
            Some((f, name)) => (Some(f), Some(name)),
            None => (None, None),
        },
    };
    let is = |subs: &[Sub]| subs.contains(&sub);
    let config = RunConfig {
        subcommand: sub,
        p,
        alpha: opts.alpha,
        beta: opts.beta.or((implied_tail && sub == Sub::Theorem4).then_some(1.0)),
        gamma: opts.gamma,
        coeffs: if implied_tail && opts.coeffs.is_empty() { vec![1.0] } else { opts.coeffs.clone() },
        scales: opts.scales.clone(),
        function: name,
        table_file: opts.table.as_ref().map(|p| p.display().to_string()),
        ladder,
        n_order: is(&[Sub::Theorem1, Sub::Theorem3, Sub::Theorem4]).then(|| opts.order.unwrap_or(2)),
        seed: is(&[Sub::Mc]).then(|| opts.seed.unwrap_or(DEFAULT_SEED)),
        samples: is(&[Sub::Mc]).then(|| opts.samples.unwrap_or(100_000)),
        precision_bits: opts.precision_bits,
        log_base,
        format: opts.format,
        eq13_printed: opts.eq13_printed,
        kmax: is(&[Sub::Constants]).then_some(opts.kmax),
        lambda: is(&[Sub::Lemmas]).then(|| opts.lambda.unwrap_or(0.5)),
        k: is(&[Sub::Lemmas]).then(|| opts.k.unwrap_or(0)),
        epsilon: is(&[Sub::Lemmas]).then(|| opts.epsilon.unwrap_or(0.05)),
    };
    Ok(Setup { ctx, config, func })
}

/// The function a subcommand builds from its expansion flags when no
/// function flag is given.
fn implied_function(sub: Sub, opts: &Opts, ctx: &NumericContext) -> Result<Option<(RadialFunction, String)>, Failure> {
    match sub {
        Sub::Theorem1 if !opts.coeffs.is_empty() => {
            if opts.coeffs.len() != opts.scales.len() {
                return Err(usage("--coeffs and --scales need the same length"));
            }
            let parts = opts.coeffs.iter().zip(&opts.scales).map(|(&a, &m)| (a, RadialFunction::monomial(m))).collect();
            Ok(Some((RadialFunction::LinearCombo(parts), "sum of coeffs * |y|^scales".into())))
        }
        Sub::Theorem3 | Sub::Theorem4 if opts.gamma.is_some() => {
            let beta = if sub == Sub::Theorem4 { opts.beta.unwrap_or(1.0) } else { need(opts.beta, "beta", sub)? };
            let gamma = need(opts.gamma, "gamma", sub)?;
            let coeffs = if opts.coeffs.is_empty() { vec![1.0] } else { opts.coeffs.clone() };
            let tail = OuterTail::new(beta, gamma, coeffs)?;
            // Zero on the unit ball, the declared log-power law from |x| = p on.
            let first = tail.eval(1, ctx)?;
            let t = Table::from_reals(1, vec![first], InnerTail::Zero, Some(tail))?;
            Ok(Some((RadialFunction::Table(t), "log-power tail from beta, gamma, coeffs".into())))
        }
        Sub::Lemmas => Ok(Some((RadialFunction::capped_power(1.0)?, "capped power 1".into()))),
        _ => Ok(None),
    }
}

fn execute(sub: Sub, opts: &Opts, out: &mut Vec<u8>) -> Result<(), Failure> {
    let Setup { ctx, config, func } = setup(sub, opts)?;
    let ladder = config.ladder.clone();
    let func_or_err = || func.clone().ok_or_else(|| usage(format!("{} needs a function flag", sub_name(sub))));
    let report = match sub {
        Sub::Constants => {
            let alpha = need(opts.alpha, "alpha", sub)?;
            let beta = opts.beta.unwrap_or(0.0);
            let mut r = Report::new(config, &["name", "k", "value"]);
            let mut push = |name: &str, k: Option<u32>, v: Real| {
                r.rows.push(vec![name.into(), k.map(|k| k.to_string()).unwrap_or_default(), fmt_real(&v)])
            };
            push("C", None, prefactor(&ctx, alpha)?);
            push("U", None, unit_kernel_integral(&ctx, alpha)?);
            push("b", Some(0), b_coefficient(0.0, alpha, &ctx)?);
            for k in 0..=opts.kmax {
                push("Omega", Some(k), omega(k, alpha, beta, &ctx)?);
            }
            for k in 0..=opts.kmax {
                push("Omega_tilde", Some(k), omega_tilde(k, alpha, &ctx)?);
            }
            r
        }
        Sub::Eval => {
            let alpha = need(opts.alpha, "alpha", sub)?;
            let f = func_or_err()?;
            if opts.dump_table {
                let (lo, hi) = (*ladder.iter().min().unwrap(), *ladder.iter().max().unwrap());
                let t = f.to_table(lo, hi, &ctx)?;
                out.extend_from_slice(dump_table(ctx.prime(), &t).as_bytes());
                return Ok(());
            }
            let mut r = Report::new(config, &["x_exp", "value", "truncation_bound"]);
            for &x in &ladder {
                let v = ialpha_eval(&f, x.into(), alpha, &ctx)?;
                r.rows.push(vec![x.to_string(), fmt_real(&v.value), fmt_real(&v.truncation_bound)]);
            }
            r
        }
        Sub::Theorem1 | Sub::Theorem3 | Sub::Theorem4 => {
            let alpha = need(opts.alpha, "alpha", sub)?;
            let f = func_or_err()?;
            let theorem = match sub {
                Sub::Theorem1 => Theorem::T1,
                Sub::Theorem3 => Theorem::T3,
                _ => Theorem::T4,
            };
            let mut scan = ScanOptions {
                eq13_form: if opts.eq13_printed { Eq13Form::Printed } else { Eq13Form::ProofConsistent },
                ..Default::default()
            };
            let has_func_flag = opts.monomial.is_some() || opts.indicator.is_some() || opts.decay.is_some() || opts.table.is_some();
            if theorem == Theorem::T1 && has_func_flag && !opts.coeffs.is_empty() {
                scan.origin_expansion = Some((opts.coeffs.clone(), opts.scales.clone()));
            }
            let order = config.n_order.unwrap_or(2);
            let rep = residual_scan(theorem, &f, order, &ladder, alpha, &scan, &ctx)?;
            let mut r = Report::new(config, &["x_exp", "computed", "predicted", "abs_err", "normalized_err"]);
            for row in &rep.rows {
                r.rows.push(vec![
                    row.x_exp.to_string(),
                    fmt_real(&row.computed),
                    fmt_real(&row.predicted),
                    fmt_real(&row.abs_err),
                    fmt_real(&row.normalized_err),
                ]);
            }
            r
        }
        Sub::Theorem2 => {
            let alpha = need(opts.alpha, "alpha", sub)?;
            let f = func_or_err()?;
            let rb = ratio_bound_check(&f, &ladder, alpha, &ctx)?;
            let mut r = Report::new(config, &["x_exp", "ratio"]);
            r.extra.insert("c_hat".into(), json!(fmt_real(&rb.c_hat)));
            r.extra.insert("d_hat".into(), json!(fmt_real(&rb.d_hat)));
            for (x, v) in &rb.rows {
                r.rows.push(vec![x.to_string(), fmt_real(v)]);
            }
            r
        }
        Sub::Lemmas => {
            let f = func_or_err()?;
            let lambda = config.lambda.unwrap_or(0.5);
            let k = config.k.unwrap_or(0);
            let epsilon = config.epsilon.unwrap_or(0.05);
            let l1 = lemma_decay_check(&Lemma::L1 { f, lambda }, &ladder, &ctx)?;
            let l2 = match opts.alpha {
                Some(alpha) => {
                    let beta = opts.beta.unwrap_or(0.0);
                    lemma_decay_check(&Lemma::L2 { k, beta, epsilon, alpha }, &ladder, &ctx)?
                }
                None => Vec::new(),
            };
            let mut r = Report::new(config, &["lemma", "x_exp", "value"]);
            for (name, rows) in [("L1", &l1), ("L2", &l2)] {
                for (x, v) in rows {
                    r.rows.push(vec![name.into(), x.to_string(), fmt_real(v)]);
                }
            }
            r
        }
        Sub::Mc => {
            let alpha = need(opts.alpha, "alpha", sub)?;
            let f = func_or_err()?;
            let seed = config.seed.unwrap_or(DEFAULT_SEED);
            let samples = config.samples.unwrap_or(100_000);
            let mut r = Report::new(config, &["x_exp", "estimate", "stderr", "exact", "z_score"]);
            for (i, &x) in ladder.iter().enumerate() {
                let exact = ialpha_eval(&f, x.into(), alpha, &ctx)?.value.to_f64();
                // Each ladder point draws from its own stream.
                let mc = mc_ialpha_eval(&f, x, alpha, samples, seed.wrapping_add(i as u64), &ctx)?;
                r.rows.push(vec![
                    x.to_string(),
                    fmt_f64(mc.estimate),
                    fmt_f64(mc.stderr),
                    fmt_f64(exact),
                    format!("{:.4}", mc.z_score(exact)),
                ]);
            }
            r
        }
    };
    report.write(out)
}

// The book chapter on the command line runs as doctests of this crate.
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladders() {
        assert_eq!(parse_ladder("-4:4:4").unwrap(), [-4, 0, 4]);
        assert_eq!(parse_ladder("1:6:2").unwrap(), [1, 3, 5]);
        assert_eq!(parse_ladder("7").unwrap(), [7]);
        assert_eq!(parse_ladder("3,-1, 2").unwrap(), [3, -1, 2]);
        for bad in ["", "1:2", "1:2:0", "5:1:1", "a:b:c", "1,,2", "0:1000000000:1"] {
            assert!(parse_ladder(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn preamble_field_names() {
        let t = Table::new(0, vec![1.0], InnerTail::Power { a: 1.0, exponent: 1.0 }, None).unwrap();
        let text = dump_table(2, &t);
        assert_eq!(text, "#padic-radial v1\n{\"p\":2,\"inner_tail\":{\"kind\":\"power\",\"a\":1.0,\"M\":1.0}}\n0,1e0\n");
    }
}
