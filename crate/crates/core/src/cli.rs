//! Command-line front end.
//!
//! Subcommands `table`, `rms`, `identity`, `mc` and `eval`. Exact rationals
//! (`3/4`, `0.75`, `2`) are accepted for α, β, σ; floats only for tolerances.
//!
//! Exit codes: 0 success, 1 usage or domain error (nothing written),
//! 2 partial success (absent cells, failing checks, skipped points).

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{PrincipalCharacter, Rational};
use crate::correlation::{build_table, corr, cov, CorrelationTable, CovKind, CovarianceSpec};
use crate::error::Error;
use crate::gap::{rms_curve, GapMseResult};
use crate::identities::{
    character_difference, squarefree_variance_symmetry, parity_partition_check, polylog_order_shift_check, even_nondivisor_check,
    odd_nondivisor_check, IdentityReport,
};
use crate::mc::{verify_prime_l_covariance, verify_log_l_covariance, ComparisonReport, LinePair, Sampler, SamplingPlan};
use crate::special::{log_abs_l_line, polylog, prime_zeta, zeta_complex, ComplexPoint, TruncationPolicy};

pub const SCHEMA_VERSION: u32 = 1;
pub const TABLE_HEADER: [&str; 6] = ["kind", "sigma", "alpha", "beta", "resonant", "rho"];
pub const RMS_HEADER: [&str; 7] = [
    "sigma",
    "rms_simple",
    "rms_expanded",
    "abs_diff",
    "mse_simple",
    "mse_expanded",
    "reason",
];

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "lcorr", version, about = "Covariance and correlation of log |L(s, χ₀)| along lines")]
pub struct Cli {
    #[command(flatten)]
    pub policy: PolicyArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct PolicyArgs {
    /// Absolute truncation tolerance of every series.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub prime_limit: Option<u64>,
    #[arg(long, global = true)]
    pub term_limit: Option<u64>,
}

impl PolicyArgs {
    pub fn policy(&self) -> crate::Result<TruncationPolicy> {
        let mut p = TruncationPolicy::default();
        if let Some(t) = self.tol {
            p.abs_tol = t;
        }
        if let Some(l) = self.prime_limit {
            p.prime_limit = l;
        }
        if let Some(l) = self.term_limit {
            p.term_limit = l;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file (written atomically); stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Correlation table over α × β.
    Table(TableArgs),
    /// RMS of the gap between Re P and log |L| over a σ grid.
    Rms(RmsArgs),
    /// Identity suites with a JSON report.
    Identity(IdentityArgs),
    /// Monte-Carlo comparison against the closed-form covariance.
    Mc(McArgs),
    /// Point evaluation of a special function (JSON on stdout).
    Eval {
        #[command(subcommand)]
        function: EvalCommand,
    },
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: CovKind,
    #[arg(long)]
    pub sigma: Rational,
    /// Same set for α and β: `a..b` (integers, inclusive), `a..b:step` or a comma list.
    #[arg(long, value_parser = parse_set, conflicts_with_all = ["alphas", "betas"])]
    pub range: Option<RationalSet>,
    /// Set syntax as for `--range`.
    #[arg(long, value_parser = parse_set, requires = "betas")]
    pub alphas: Option<RationalSet>,
    #[arg(long, value_parser = parse_set, requires = "alphas")]
    pub betas: Option<RationalSet>,
    #[arg(long, default_value_t = 1)]
    pub modulus: i64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct RmsArgs {
    /// `a..b`, `a..b:step` or a comma list; default `0.26..3:0.02`.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<RationalSet>,
    #[arg(long, default_value_t = 1)]
    pub modulus: i64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Nondivisor,
    Parity,
    VarianceSymmetry,
    CharacterDifference,
    OrderShift,
    All,
}

#[derive(Args, Debug)]
pub struct IdentityArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v: Vec<Rational>,
    #[arg(long, value_delimiter = ',')]
    pub x: Vec<Rational>,
    #[arg(long, value_delimiter = ',')]
    pub sigma: Vec<Rational>,
    #[arg(long, value_delimiter = ',')]
    pub modulus: Vec<i64>,
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<u64>,
    /// Comparison tolerance; defaults per identity.
    #[arg(long)]
    pub check_tol: Option<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum McKind {
    Vert,
    Diag,
    #[value(name = "reP")]
    ReP,
}

#[derive(Args, Debug)]
pub struct McArgs {
    #[arg(long, value_enum)]
    pub kind: McKind,
    #[arg(long, default_value = "2")]
    pub alpha: Rational,
    #[arg(long, default_value = "1")]
    pub beta: Rational,
    #[arg(long, default_value = "1")]
    pub sigma: Rational,
    /// Real part of the second line (`reP` only); defaults to `--sigma`.
    #[arg(long)]
    pub sigma2: Option<Rational>,
    /// Line geometry for `reP`.
    #[arg(long, value_parser = parse_kind, default_value = "vert")]
    pub geometry: CovKind,
    #[arg(long, default_value_t = 1)]
    pub modulus: i64,
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e5)]
    pub span: f64,
    #[arg(long, default_value_t = 1e3)]
    pub start: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = false)]
    pub stratified: bool,
    #[arg(long, default_value_t = 10_000)]
    pub prime_cutoff: u64,
    /// Largest accepted z-score.
    #[arg(long, default_value_t = 3.0)]
    pub z_max: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum EvalCommand {
    /// Prime zeta / prime-L function `P_χ₀(σ)`.
    Primezeta {
        #[arg(long)]
        sigma: Rational,
        #[arg(long, default_value_t = 1)]
        modulus: i64,
    },
    /// `Li_v(z)`.
    Polylog {
        #[arg(long, allow_hyphen_values = true)]
        v: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
    },
    /// `ζ(σ + it)`.
    Zeta {
        #[arg(long)]
        sigma: Rational,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t: f64,
    },
    /// `log |L(σ + it, χ₀)|`.
    #[command(name = "logL")]
    LogL {
        #[arg(long)]
        sigma: Rational,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 1)]
        modulus: i64,
    },
    /// Closed-form covariance and correlation of one cell.
    Cov {
        #[arg(long, value_parser = parse_kind)]
        kind: CovKind,
        #[arg(long)]
        alpha: Rational,
        #[arg(long)]
        beta: Rational,
        #[arg(long)]
        sigma: Rational,
        #[arg(long, default_value_t = 1)]
        modulus: i64,
    },
}

/// Ordered list of exact rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalSet(pub Vec<Rational>);

fn parse_kind(s: &str) -> std::result::Result<CovKind, String> {
    s.parse::<CovKind>().map_err(|e| e.to_string())
}

fn parse_list(s: &str) -> std::result::Result<Vec<Rational>, String> {
    s.split(',')
        .map(|p| p.parse::<Rational>().map_err(|e| e.to_string()))
        .collect()
}

/// `a..b` (integers, step 1), `a..b:step` (rational grid) or a comma list.
pub fn parse_set(s: &str) -> std::result::Result<RationalSet, String> {
    if s.contains("..") && s.contains(':') {
        return parse_grid(s);
    }
    if let Some((a, b)) = s.split_once("..") {
        let a: i64 = a.trim().parse().map_err(|_| format!("range start '{a}' must be an integer"))?;
        let b: i64 = b.trim().parse().map_err(|_| format!("range end '{b}' must be an integer"))?;
        if a > b {
            return Err(format!("empty range {a}..{b}"));
        }
        return Ok(RationalSet((a..=b).map(Rational::integer).collect()));
    }
    parse_list(s).map(RationalSet)
}

/// `a..b[:step]` (default step 1/50, inclusive of `b`) or a comma list.
pub fn parse_grid(s: &str) -> std::result::Result<RationalSet, String> {
    let Some((a, rest)) = s.split_once("..") else {
        return parse_list(s).map(RationalSet);
    };
    let (b, step) = match rest.split_once(':') {
        Some((b, st)) => (b, st.parse::<Rational>().map_err(|e| e.to_string())?),
        None => (rest, Rational::new(1, 50).unwrap()),
    };
    let a: Rational = a.parse().map_err(|e: Error| e.to_string())?;
    let b: Rational = b.parse().map_err(|e: Error| e.to_string())?;
    if !step.is_positive() {
        return Err("grid step must be positive".into());
    }
    if a > b {
        return Err(format!("empty grid {a}..{b}"));
    }
    let mut out = Vec::new();
    let mut x = a;
    while x <= b {
        out.push(x);
        x = x.add(step);
        if out.len() > 1_000_000 {
            return Err("grid has more than 10^6 points".into());
        }
    }
    Ok(RationalSet(out))
}

/// Write `bytes` to `path` through a temp file in the same directory, or to stdout.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(&dir)
                .with_context(|| format!("creating temporary file in {}", dir.display()))?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(p).with_context(|| format!("renaming into {}", p.display()))?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

/// Finite floats only; NaN and ±∞ become `None`.
fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Serialize)]
struct Envelope<'a, M: Serialize, D: Serialize> {
    schema: u32,
    command: &'a str,
    meta: M,
    #[serde(flatten)]
    data: D,
}

// ---------------------------------------------------------------- table

#[derive(Serialize)]
struct TableMeta {
    kind: CovKind,
    sigma: String,
    modulus: u64,
    alphas: Vec<Rational>,
    betas: Vec<Rational>,
    absent: usize,
    abs_tol: f64,
}

#[derive(Serialize)]
struct JsonCell {
    alpha: Rational,
    beta: Rational,
    resonant: bool,
    rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

#[derive(Serialize)]
struct Cells {
    cells: Vec<JsonCell>,
}

/// CSV with header `kind,sigma,alpha,beta,resonant,rho`; absent cells have an empty `rho`.
pub fn table_to_csv(table: &CorrelationTable, sigma: Rational) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TABLE_HEADER)?;
    for c in table.cells() {
        w.write_record([
            table.kind.to_string(),
            sigma.to_string(),
            c.alpha.to_string(),
            c.beta.to_string(),
            c.resonant.to_string(),
            opt(c.rho.and_then(finite)),
        ])?;
    }
    Ok(w.into_inner()?)
}

/// Parse a table CSV back into a [`CorrelationTable`]. The modulus is not part
/// of the CSV; absent cells get a generic reason.
pub fn table_from_csv<R: std::io::Read>(reader: R, modulus: u64) -> anyhow::Result<CorrelationTable> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != TABLE_HEADER {
        bail!("unexpected header {header:?}");
    }
    let mut kind = None;
    let mut sigma = None;
    let mut rows: Vec<(Rational, Rational, bool, Option<f64>)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let k: CovKind = rec[0].parse()?;
        let s: Rational = rec[1].parse()?;
        if kind.is_some_and(|x| x != k) || sigma.is_some_and(|x| x != s) {
            bail!("mixed kind or sigma within one table");
        }
        kind = Some(k);
        sigma = Some(s);
        let rho = if rec[5].is_empty() { None } else { Some(rec[5].parse::<f64>()?) };
        rows.push((rec[2].parse()?, rec[3].parse()?, rec[4].parse()?, rho));
    }
    let (Some(kind), Some(sigma)) = (kind, sigma) else {
        bail!("table has no rows");
    };
    let mut alphas: Vec<Rational> = Vec::new();
    let mut betas: Vec<Rational> = Vec::new();
    for (a, b, _, _) in &rows {
        if !alphas.contains(a) {
            alphas.push(*a);
        }
        if !betas.contains(b) {
            betas.push(*b);
        }
    }
    if rows.len() != alphas.len() * betas.len() {
        bail!("table is not a full alpha x beta grid");
    }
    let mut values = vec![vec![None; betas.len()]; alphas.len()];
    let mut reasons = vec![vec![None; betas.len()]; alphas.len()];
    let mut mask = vec![vec![false; betas.len()]; alphas.len()];
    for (a, b, res, rho) in rows {
        let i = alphas.iter().position(|x| *x == a).unwrap();
        let j = betas.iter().position(|x| *x == b).unwrap();
        values[i][j] = rho;
        mask[i][j] = res;
        if rho.is_none() {
            reasons[i][j] = Some("absent".to_string());
        }
    }
    Ok(CorrelationTable {
        kind,
        sigma: sigma.to_f64(),
        modulus,
        alphas,
        betas,
        values,
        reasons,
        divis_mask: mask,
    })
}

fn cmd_table(args: &TableArgs, policy: &TruncationPolicy) -> anyhow::Result<i32> {
    let (alphas, betas) = match (&args.range, &args.alphas, &args.betas) {
        (Some(r), _, _) => (r.0.clone(), r.0.clone()),
        (None, Some(a), Some(b)) => (a.0.clone(), b.0.clone()),
        _ => bail!("give either --range or both --alphas and --betas"),
    };
    if !args.sigma.is_positive() {
        bail!(Error::Domain(format!("sigma must be positive, got {}", args.sigma)));
    }
    let chi = PrincipalCharacter::new(args.modulus)?;
    let table = build_table(args.kind, &alphas, &betas, args.sigma.to_f64(), &chi, policy)?;
    let bytes = match args.out.format {
        Format::Csv => table_to_csv(&table, args.sigma)?,
        Format::Json => {
            let cells = table
                .cells()
                .into_iter()
                .map(|c| {
                    let rho = c.rho.and_then(finite);
                    let reason = match (rho, c.reason) {
                        (None, None) => Some("non-finite value".to_string()),
                        (_, r) => r,
                    };
                    JsonCell {
                        alpha: c.alpha,
                        beta: c.beta,
                        resonant: c.resonant,
                        rho,
                        reason,
                    }
                })
                .collect();
            to_json(&Envelope {
                schema: SCHEMA_VERSION,
                command: "table",
                meta: TableMeta {
                    kind: table.kind,
                    sigma: args.sigma.to_string(),
                    modulus: table.modulus,
                    alphas: table.alphas.clone(),
                    betas: table.betas.clone(),
                    absent: table.absent_count(),
                    abs_tol: policy.abs_tol,
                },
                data: Cells { cells },
            })?
        }
    };
    write_output(args.out.output.as_deref(), &bytes)?;
    Ok(if table.absent_count() > 0 { EXIT_PARTIAL } else { EXIT_OK })
}

// ---------------------------------------------------------------- rms

#[derive(Serialize)]
struct RmsRow {
    sigma: f64,
    rms_simple: Option<f64>,
    rms_expanded: Option<f64>,
    abs_diff: Option<f64>,
    mse_simple: Option<f64>,
    mse_expanded: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

impl RmsRow {
    fn new(sigma: f64, r: &crate::Result<GapMseResult>) -> Self {
        match r {
            Ok(g) => RmsRow {
                sigma,
                rms_simple: finite(g.rms),
                rms_expanded: finite(g.rms_expanded),
                abs_diff: finite(g.abs_diff()),
                mse_simple: finite(g.mse_simple),
                mse_expanded: finite(g.mse_expanded),
                reason: None,
            },
            Err(e) => RmsRow {
                sigma,
                rms_simple: None,
                rms_expanded: None,
                abs_diff: None,
                mse_simple: None,
                mse_expanded: None,
                reason: Some(e.to_string()),
            },
        }
    }
}

#[derive(Serialize)]
struct RmsMeta {
    modulus: u64,
    points: usize,
    absent: usize,
    abs_tol: f64,
}

#[derive(Serialize)]
struct Rows {
    rows: Vec<RmsRow>,
}

pub fn default_rms_grid() -> RationalSet {
    parse_grid("0.26..3.0").expect("default grid")
}

/// Shortest round-trip text; exponent form for small magnitudes.
fn num(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn cmd_rms(args: &RmsArgs, policy: &TruncationPolicy) -> anyhow::Result<i32> {
    let grid = args.grid.clone().unwrap_or_else(default_rms_grid);
    let chi = PrincipalCharacter::new(args.modulus)?;
    let sigmas: Vec<f64> = grid.0.iter().map(|r| r.to_f64()).collect();
    let results = rms_curve(&sigmas, &chi, policy);
    let rows: Vec<RmsRow> = sigmas.iter().zip(&results).map(|(s, r)| RmsRow::new(*s, r)).collect();
    let absent = rows.iter().filter(|r| r.reason.is_some()).count();
    let bytes = match args.out.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(RMS_HEADER)?;
            for r in &rows {
                w.write_record([
                    num(r.sigma),
                    opt(r.rms_simple),
                    opt(r.rms_expanded),
                    opt(r.abs_diff),
                    opt(r.mse_simple),
                    opt(r.mse_expanded),
                    r.reason.clone().unwrap_or_default(),
                ])?;
            }
            w.into_inner()?
        }
        Format::Json => to_json(&Envelope {
            schema: SCHEMA_VERSION,
            command: "rms",
            meta: RmsMeta {
                modulus: chi.modulus(),
                points: rows.len(),
                absent,
                abs_tol: policy.abs_tol,
            },
            data: Rows { rows },
        })?,
    };
    write_output(args.out.output.as_deref(), &bytes)?;
    Ok(if absent > 0 { EXIT_PARTIAL } else { EXIT_OK })
}

// ---------------------------------------------------------------- identity

const NONDIVISOR_V: [f64; 7] = [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0, 3.0];
const NONDIVISOR_X: [f64; 5] = [1.15, 1.2, 1.5, 2.0, 10.0];
const CHARACTER_DIFFERENCE_DEFAULT: [(u64, f64, i64, u64); 3] = [(2, 1.0, 1, 2), (3, 1.0, 2, 3), (1, 0.6, 1, 5)];
const ORDER_SHIFT_DEFAULT: [(f64, f64, u64); 3] = [(1.0, 2.0, 1), (0.0, 2.0, 2), (2.0, 10.0, 3)];

#[derive(Serialize)]
struct IdentityError {
    suite: &'static str,
    parameters: String,
    error: String,
}

#[derive(Serialize)]
struct IdentityMeta {
    suite: String,
    total: usize,
    passed: usize,
    failed: usize,
    errors: usize,
    abs_tol: f64,
}

#[derive(Serialize)]
struct IdentityData {
    reports: Vec<IdentityReport>,
    errors: Vec<IdentityError>,
}

fn floats(v: &[Rational], default: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        default.to_vec()
    } else {
        v.iter().map(|r| r.to_f64()).collect()
    }
}

fn or_default<T: Copy>(v: &[T], default: &[T]) -> Vec<T> {
    if v.is_empty() {
        default.to_vec()
    } else {
        v.to_vec()
    }
}

struct Collector {
    reports: Vec<IdentityReport>,
    errors: Vec<IdentityError>,
}

impl Collector {
    /// Domain errors abort the command; anything else is recorded.
    fn push(&mut self, suite: &'static str, params: impl Display, r: crate::Result<Vec<IdentityReport>>) -> anyhow::Result<()> {
        match r {
            Ok(v) => self.reports.extend(v),
            Err(e @ (Error::Domain(_) | Error::InvalidModulus(_))) => {
                return Err(anyhow!(e).context(format!("{suite} at {params}")))
            }
            Err(e) => self.errors.push(IdentityError {
                suite,
                parameters: params.to_string(),
                error: e.to_string(),
            }),
        }
        Ok(())
    }
}

fn cmd_identity(args: &IdentityArgs, policy: &TruncationPolicy) -> anyhow::Result<i32> {
    let mut out = Collector {
        reports: Vec::new(),
        errors: Vec::new(),
    };
    let run = |s: Suite| args.suite == s || args.suite == Suite::All;
    let vs = floats(&args.v, &NONDIVISOR_V);
    let xs = floats(&args.x, &NONDIVISOR_X);

    if run(Suite::Nondivisor) {
        let tol = args.check_tol.unwrap_or(1e-7);
        for &v in &vs {
            for &x in &xs {
                let r = even_nondivisor_check(v, x, tol, policy)
                    .and_then(|a| odd_nondivisor_check(v, x, tol, policy).map(|b| vec![a, b]));
                out.push("nondivisor", format!("v={v}, x={x}"), r)?;
            }
        }
    }
    if run(Suite::Parity) {
        let tol = args.check_tol.unwrap_or(1e-10);
        for &v in &vs {
            for &x in &xs {
                out.push("parity", format!("v={v}, x={x}"), parity_partition_check(v, x, tol, policy).map(|r| vec![r]))?;
            }
        }
    }
    if run(Suite::VarianceSymmetry) {
        let tol = args.check_tol.unwrap_or(1e-8);
        for &s in &floats(&args.sigma, &[0.3, 0.5, 1.0, 2.0]) {
            for &m in &or_default(&args.modulus, &[1, 2, 6]) {
                let r = PrincipalCharacter::new(m).and_then(|chi| squarefree_variance_symmetry(s, &chi, tol, policy));
                out.push("variance-symmetry", format!("sigma={s}, modulus={m}"), r.map(|r| vec![r]))?;
            }
        }
    }
    if run(Suite::CharacterDifference) {
        let tol = args.check_tol.unwrap_or(1e-10);
        let explicit = !(args.n.is_empty() && args.p.is_empty() && args.sigma.is_empty() && args.modulus.is_empty());
        let triples: Vec<(u64, f64, i64, u64)> = if explicit {
            let mut t = Vec::new();
            for &n in &or_default(&args.n, &[1]) {
                for &s in &floats(&args.sigma, &[1.0]) {
                    for &m in &or_default(&args.modulus, &[1]) {
                        for &p in &or_default(&args.p, &[2]) {
                            t.push((n, s, m, p));
                        }
                    }
                }
            }
            t
        } else {
            CHARACTER_DIFFERENCE_DEFAULT.to_vec()
        };
        for (n, s, m, p) in triples {
            let r = character_difference(n, s, m, p, tol, policy).map(|r| vec![r]);
            out.push("character-difference", format!("n={n}, sigma={s}, modulus={m}, p={p}"), r)?;
        }
    }
    if run(Suite::OrderShift) {
        let (int_tol, deriv_tol) = args.check_tol.map_or((1e-8, 1e-6), |t| (t, t));
        let explicit = !(args.v.is_empty() && args.x.is_empty() && args.alpha.is_empty());
        let cases: Vec<(f64, f64, u64)> = if explicit {
            let mut c = Vec::new();
            for &v in &floats(&args.v, &[1.0]) {
                for &x in &floats(&args.x, &[2.0]) {
                    for &a in &or_default(&args.alpha, &[1]) {
                        c.push((v, x, a));
                    }
                }
            }
            c
        } else {
            ORDER_SHIFT_DEFAULT.to_vec()
        };
        for (v, x, a) in cases {
            let r = polylog_order_shift_check(v, x, a, int_tol, deriv_tol, policy).map(|r| vec![r.integral, r.derivative]);
            out.push("order-shift", format!("v={v}, x={x}, alpha={a}"), r)?;
        }
    }

    let passed = out.reports.iter().filter(|r| r.pass).count();
    let failed = out.reports.len() - passed;
    let meta = IdentityMeta {
        suite: args.suite.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default(),
        total: out.reports.len(),
        passed,
        failed,
        errors: out.errors.len(),
        abs_tol: policy.abs_tol,
    };
    let ok = failed == 0 && out.errors.is_empty();
    for r in out.reports.iter().filter(|r| !r.pass) {
        eprintln!("FAIL {} {:?}: |lhs - rhs| = {:e} > {:e}", r.name, r.parameters, r.abs_diff, r.tol);
    }
    for e in &out.errors {
        eprintln!("ERROR {} ({}): {}", e.suite, e.parameters, e.error);
    }
    let bytes = to_json(&Envelope {
        schema: SCHEMA_VERSION,
        command: "identity",
        meta,
        data: IdentityData {
            reports: out.reports,
            errors: out.errors,
        },
    })?;
    write_output(args.output.as_deref(), &bytes)?;
    Ok(if ok { EXIT_OK } else { EXIT_PARTIAL })
}

// ---------------------------------------------------------------- mc

#[derive(Serialize)]
struct McMeta {
    timestamp: u64,
    seed: u64,
    z_max: f64,
    pass: bool,
    abs_tol: f64,
}

#[derive(Serialize)]
struct McData {
    report: ComparisonReport,
}

fn unix_time() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn cmd_mc(args: &McArgs, policy: &TruncationPolicy) -> anyhow::Result<i32> {
    let chi = PrincipalCharacter::new(args.modulus)?;
    let plan = SamplingPlan {
        t_start: args.start,
        t_span: args.span,
        n_samples: args.samples,
        seed: args.seed,
        sampler: if args.stratified { Sampler::Stratified } else { Sampler::IidUniform },
        prime_cutoff: args.prime_cutoff,
    };
    plan.validate()?;
    let sigma = args.sigma.to_f64();
    let report = match args.kind {
        McKind::Vert | McKind::Diag => {
            if args.sigma2.is_some() {
                bail!("--sigma2 applies to --kind reP only");
            }
            let kind = if args.kind == McKind::Vert { CovKind::Vert } else { CovKind::Diag };
            let spec = CovarianceSpec::new(kind, args.alpha, args.beta, sigma, chi)?;
            verify_log_l_covariance(&spec, &plan, policy)?
        }
        McKind::ReP => {
            let spec = CovarianceSpec::new(args.geometry, args.alpha, args.beta, sigma, chi)?;
            let s2 = args.sigma2.unwrap_or(args.sigma).to_f64();
            let pair = LinePair::from_spec(&spec).with_sigma2(s2);
            verify_prime_l_covariance(&pair, &plan, policy)?
        }
    };
    let pass = report.within(args.z_max);
    let bytes = to_json(&Envelope {
        schema: SCHEMA_VERSION,
        command: "mc",
        meta: McMeta {
            timestamp: unix_time(),
            seed: args.seed,
            z_max: args.z_max,
            pass,
            abs_tol: policy.abs_tol,
        },
        data: McData { report },
    })?;
    write_output(args.output.as_deref(), &bytes)?;
    Ok(if pass { EXIT_OK } else { EXIT_PARTIAL })
}

// ---------------------------------------------------------------- eval

#[derive(Serialize)]
struct EvalOut {
    schema: u32,
    command: &'static str,
    function: &'static str,
    args: serde_json::Value,
    value: serde_json::Value,
    error: Option<f64>,
}

fn cmd_eval(f: &EvalCommand, policy: &TruncationPolicy) -> anyhow::Result<i32> {
    use serde_json::json;
    let (function, args, value, error) = match f {
        EvalCommand::Primezeta { sigma, modulus } => {
            let chi = PrincipalCharacter::new(*modulus)?;
            let e = prime_zeta(sigma.to_f64(), &chi, policy)?;
            ("primezeta", json!({"sigma": sigma, "modulus": modulus}), json!(finite(e.value)), e.error)
        }
        EvalCommand::Polylog { v, z } => {
            let e = polylog(*v, *z, policy)?;
            ("polylog", json!({"v": v, "z": z}), json!(finite(e.value)), e.error)
        }
        EvalCommand::Zeta { sigma, t } => {
            let e = zeta_complex(Complex64::new(sigma.to_f64(), *t), policy)?;
            (
                "zeta",
                json!({"sigma": sigma, "t": t}),
                json!({"re": finite(e.value.re), "im": finite(e.value.im)}),
                e.error,
            )
        }
        EvalCommand::LogL { sigma, t, modulus } => {
            let chi = PrincipalCharacter::new(*modulus)?;
            let v = log_abs_l_line(ComplexPoint::new(sigma.to_f64(), *t)?, &chi, policy)?;
            (
                "logL",
                json!({"sigma": sigma, "t": t, "modulus": modulus, "near_zero": v.near_zero}),
                json!(finite(v.value)),
                v.error,
            )
        }
        EvalCommand::Cov {
            kind,
            alpha,
            beta,
            sigma,
            modulus,
        } => {
            let chi = PrincipalCharacter::new(*modulus)?;
            let spec = CovarianceSpec::new(*kind, *alpha, *beta, sigma.to_f64(), chi)?;
            let c = cov(&spec, policy)?;
            let rho = corr(&spec, policy)?;
            (
                "cov",
                json!({"kind": kind, "alpha": alpha, "beta": beta, "sigma": sigma, "modulus": modulus,
                       "resonant": c.resonant, "representation": c.representation}),
                json!({"cov": finite(c.value), "rho": finite(rho)}),
                c.error,
            )
        }
    };
    let bytes = to_json(&EvalOut {
        schema: SCHEMA_VERSION,
        command: "eval",
        function,
        args,
        value,
        error: finite(error),
    })?;
    write_output(None, &bytes)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------- entry

/// Install the global rayon pool from `LCORR_THREADS` (ignored if unset or invalid).
fn configure_threads() {
    if let Some(n) = std::env::var("LCORR_THREADS").ok().and_then(|s| usize::from_str(s.trim()).ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

pub fn execute(cli: &Cli) -> anyhow::Result<i32> {
    let policy = cli.policy.policy()?;
    match &cli.command {
        Command::Table(a) => cmd_table(a, &policy),
        Command::Rms(a) => cmd_rms(a, &policy),
        Command::Identity(a) => cmd_identity(a, &policy),
        Command::Mc(a) => cmd_mc(a, &policy),
        Command::Eval { function } => cmd_eval(function, &policy),
    }
}

/// Parse, run, report errors on stderr; returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    configure_threads();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

pub fn run() -> i32 {
    run_from(std::env::args_os())
}
