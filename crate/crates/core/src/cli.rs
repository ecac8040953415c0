//! Command-line front end. Every run echoes its resolved configuration ahead of
//! the data rows so that an output file is enough to reproduce it.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Duration;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::ap::{
    count_region_with, rational_point_sum, right_triangles, scan, CountReport, Delta, Region, ScanSpec, Theorem, YRule,
};
use crate::error::Error;
use crate::lfun::{dirichlet_l, hecke_l, zeta, zeta2_factor, DirichletChar, SeriesValue, Truncation};
use crate::quad::lambda_n;
use crate::spectral::{
    pell_cutoff, verify_double, verify_single, DoubleOptions, IdentityParams, IdentityReport, SingleOptions,
};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "APSQUARES_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "apsquares",
    version,
    about = "Count primitive APs of squares and check the spectral identities behind them"
)]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads for counting (default: available cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    /// Report elapsed_ms as 0 so outputs are reproducible byte for byte.
    #[arg(long, global = true)]
    pub no_timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Ratio,
    Max,
    Rect,
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LFunction {
    Zeta,
    Zeta2,
    Chi8,
    Chi4,
    Principal8,
    Hecke,
}

#[derive(Debug, Clone, Args)]
pub struct TrivialArg {
    /// Count the degenerate progression {1, 1, 1} (pass `false` to drop it).
    #[arg(
        long,
        default_value_t = true,
        num_args = 0..=1,
        default_missing_value = "true",
        action = ArgAction::Set
    )]
    pub include_trivial: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count the APs in one region.
    Count {
        #[arg(long, value_enum)]
        region: RegionKind,
        /// Height bound X, e.g. 1000000 or 1e12.
        #[arg(long, value_parser = parse_size)]
        x: u64,
        /// Ratio bound on (a/b)^2, as p/q or a decimal.
        #[arg(long, default_value = "1")]
        delta: Delta,
        /// Bound on a^2 for the rectangle: an integer or X^p/q.
        #[arg(long, default_value = "X^3/4")]
        y: YRule,
        #[command(flatten)]
        trivial: TrivialArg,
    },
    /// Count along a grid of X and compare with the main terms.
    Scan {
        /// One of ratl-points, bounded-max, natural-xy, first-two.
        #[arg(long)]
        theorem: Theorem,
        /// Comma-separated values of X, e.g. 1e8,1e10,1e12.
        #[arg(long, value_parser = parse_size, value_delimiter = ',', required = true)]
        grid: Vec<u64>,
        /// Ratio bounds for ratl-points, comma-separated.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        delta: Vec<Delta>,
        /// Rectangle height for natural-xy: X^p/q or a fixed integer.
        #[arg(long, default_value = "X^3/4")]
        y_rule: YRule,
        #[command(flatten)]
        trivial: TrivialArg,
    },
    /// Check the single-series spectral identity.
    VerifySingle {
        /// Shifts h, comma-separated.
        #[arg(long, value_parser = parse_size, value_delimiter = ',', required = true)]
        h: Vec<u64>,
        /// Values of s >= 1, comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        #[arg(long, default_value_t = crate::spectral::DEFAULT_M_MAX)]
        m_max: u32,
        /// Pell orbit cutoff on b (default: where terms drop below 1e-22).
        #[arg(long, value_parser = parse_size)]
        b_max: Option<u64>,
    },
    /// Check the double-series spectral identity.
    VerifyDouble {
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        w: Vec<f64>,
        #[arg(long, default_value_t = 1e-5)]
        tolerance: f64,
        /// Largest shift h summed on the left.
        #[arg(long, value_parser = parse_size, default_value = "1e6")]
        h_max: u64,
        #[arg(long, default_value_t = crate::spectral::DEFAULT_M_MAX)]
        m_max: u32,
        /// Euler products run over primes up to this bound.
        #[arg(long, value_parser = parse_size, default_value = "1e6")]
        prime_bound: u64,
    },
    /// Hecke eigenvalues lambda_m(n) of the dihedral forms.
    Eigen {
        #[arg(long, value_parser = parse_size, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1")]
        m: Vec<i64>,
    },
    /// Zeta, Dirichlet and Hecke L-values.
    #[command(allow_negative_numbers = true)]
    Lfun {
        #[arg(long, value_enum)]
        function: LFunction,
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
        /// Power of eta for the Hecke L-function (even).
        #[arg(long, default_value_t = 0)]
        m2: i64,
        #[arg(long, value_parser = parse_size, default_value = "1e6")]
        prime_bound: u64,
    },
    /// Sum of primitive rational point counts A(b) over b <= sqrt X.
    Points {
        #[arg(long, value_parser = parse_size, value_delimiter = ',', required = true)]
        x: Vec<u64>,
    },
    /// Primitive right triangles with angles near pi/4.
    Triangles {
        #[arg(long, value_parser = parse_size, value_delimiter = ',', required = true)]
        x: Vec<u64>,
        /// Largest allowed |angle - pi/4|, in (0, pi/4].
        #[arg(long)]
        omega: f64,
    },
}

/// Parse a nonnegative integer, allowing `MeN` with an integral mantissa.
pub fn parse_size(s: &str) -> Result<u64, String> {
    let t = s.trim().replace('_', "");
    let bad = || format!("{s:?} is not a nonnegative integer (forms: 1000, 1e12, 25e6)");
    let (mant, exp) = match t.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.strip_prefix('+').unwrap_or(e)),
        None => (t.as_str(), "0"),
    };
    let digits = |x: &str| !x.is_empty() && x.bytes().all(|c| c.is_ascii_digit());
    if !digits(mant) || !digits(exp) {
        return Err(bad());
    }
    let m: u64 = mant.parse().map_err(|_| bad())?;
    let e: u32 = exp.parse().map_err(|_| bad())?;
    10u64
        .checked_pow(e)
        .and_then(|p| m.checked_mul(p))
        .ok_or_else(|| format!("{s:?} does not fit in 64 bits"))
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

enum Outcome {
    Pass,
    Fail,
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn resolve_threads(cli: &Cli) -> Result<usize, CliError> {
    let n = match cli.threads {
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    if n == 0 {
        return Err(Error::Domain("thread count must be positive".into()).into());
    }
    Ok(n)
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let threads = resolve_threads(cli)?;
    // Already built when run() is called twice in one process; keep the old pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    let mut config = Map::new();
    config.insert("format".into(), json!(cli.format));
    config.insert("threads".into(), json!(threads));
    config.insert("no_timing".into(), json!(cli.no_timing));
    let timing = |mut r: CountReport| {
        if cli.no_timing {
            r.elapsed = Duration::ZERO;
        }
        r
    };

    match &cli.command {
        Command::Count {
            region,
            x,
            delta,
            y,
            trivial,
        } => {
            let (theorem, reg) = match region {
                RegionKind::Ratio => (Theorem::RatlPoints, Region::RatioBound { x: *x, delta: *delta }),
                RegionKind::Max => (Theorem::BoundedMax, Region::MaxBound { x: *x }),
                RegionKind::Rect => (Theorem::NaturalXy, Region::Rect { x: *x, y: y.apply(*x)? }),
                RegionKind::Product => (Theorem::FirstTwo, Region::ProductBound { x: *x }),
            };
            config.insert("command".into(), json!("count"));
            config.insert("region".into(), serde_json::to_value(reg)?);
            config.insert("include_trivial".into(), json!(trivial.include_trivial));
            let start = std::time::Instant::now();
            let count = count_region_with(reg, trivial.include_trivial, threads)?;
            let row = CountReport::new(theorem, reg, count, trivial.include_trivial, start.elapsed())?;
            emit(cli, config, &[timing(row)])?;
            Ok(Outcome::Pass)
        }
        Command::Scan {
            theorem,
            grid,
            delta,
            y_rule,
            trivial,
        } => {
            config.insert("command".into(), json!("scan"));
            config.insert("theorem".into(), json!(theorem));
            config.insert("grid".into(), json!(grid));
            match theorem {
                Theorem::RatlPoints => {
                    config.insert("delta".into(), json!(delta));
                }
                Theorem::NaturalXy => {
                    config.insert("y_rule".into(), json!(y_rule.to_string()));
                }
                _ => {}
            }
            config.insert("include_trivial".into(), json!(trivial.include_trivial));
            let deltas: &[Delta] = if *theorem == Theorem::RatlPoints {
                delta
            } else {
                &delta[..1]
            };
            let mut rows = Vec::new();
            for d in deltas {
                let spec = ScanSpec {
                    theorem: *theorem,
                    delta: *d,
                    y_rule: *y_rule,
                    include_trivial: trivial.include_trivial,
                };
                rows.extend(scan(&spec, grid, threads)?.into_iter().map(timing));
            }
            emit(cli, config, &rows)?;
            Ok(Outcome::Pass)
        }
        Command::VerifySingle {
            h,
            s,
            tolerance,
            m_max,
            b_max,
        } => {
            config.insert("command".into(), json!("verify-single"));
            config.insert("tolerance".into(), json!(tolerance));
            config.insert("m_max".into(), json!(m_max));
            let cutoffs: Vec<String> = s
                .iter()
                .map(|&s| b_max.map_or(pell_cutoff(s), u128::from).to_string())
                .collect();
            config.insert("b_max".into(), json!(cutoffs));
            let opts = SingleOptions {
                tolerance: *tolerance,
                m_max: *m_max,
                b_max: b_max.map(u128::from),
            };
            let mut rows = Vec::new();
            for &hh in h {
                for &ss in s {
                    rows.push(VerifyRow::from(verify_single(hh, ss, &opts)?));
                }
            }
            verdict(cli, config, rows)
        }
        Command::VerifyDouble {
            s,
            w,
            tolerance,
            h_max,
            m_max,
            prime_bound,
        } => {
            config.insert("command".into(), json!("verify-double"));
            config.insert("tolerance".into(), json!(tolerance));
            config.insert("h_max".into(), json!(h_max));
            config.insert("m_max".into(), json!(m_max));
            config.insert("prime_bound".into(), json!(prime_bound));
            let opts = DoubleOptions {
                tolerance: *tolerance,
                h_max: *h_max,
                m_max: *m_max,
                prime_bound: *prime_bound,
            };
            let mut rows = Vec::new();
            for &ss in s {
                for &ww in w {
                    rows.push(VerifyRow::from(verify_double(ss, ww, &opts)?));
                }
            }
            verdict(cli, config, rows)
        }
        Command::Eigen { n, m } => {
            config.insert("command".into(), json!("eigen"));
            let mut rows = Vec::new();
            for &nn in n {
                for &mm in m {
                    rows.push(EigenRow {
                        n: nn,
                        m: mm,
                        lambda: lambda_n(nn, mm)?,
                    });
                }
            }
            emit(cli, config, &rows)?;
            Ok(Outcome::Pass)
        }
        Command::Lfun {
            function,
            s,
            m2,
            prime_bound,
        } => {
            config.insert("command".into(), json!("lfun"));
            config.insert("function".into(), json!(function));
            if *function == LFunction::Hecke {
                config.insert("m2".into(), json!(m2));
                config.insert("prime_bound".into(), json!(prime_bound));
            }
            let rows = s
                .iter()
                .map(|&ss| {
                    let v = match function {
                        LFunction::Zeta => SeriesValue {
                            value: zeta(ss)?,
                            truncation: Truncation::Exact,
                            tail_estimate: 0.0,
                        },
                        LFunction::Zeta2 => SeriesValue {
                            value: zeta2_factor(ss)?,
                            truncation: Truncation::Exact,
                            tail_estimate: 0.0,
                        },
                        LFunction::Chi8 => dirichlet_l(ss, DirichletChar::Chi8)?,
                        LFunction::Chi4 => dirichlet_l(ss, DirichletChar::Chi4)?,
                        LFunction::Principal8 => dirichlet_l(ss, DirichletChar::Principal8)?,
                        LFunction::Hecke => hecke_l(ss, *m2, *prime_bound)?,
                    };
                    Ok(LfunRow {
                        function: *function,
                        s: ss,
                        value: v.value,
                        tail_estimate: v.tail_estimate,
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            emit(cli, config, &rows)?;
            Ok(Outcome::Pass)
        }
        Command::Points { x } => {
            config.insert("command".into(), json!("points"));
            let rows = x
                .iter()
                .map(|&xx| {
                    let sum = rational_point_sum(xx)?;
                    let main = 4.0 / std::f64::consts::PI * (xx as f64).sqrt();
                    let abs_error = (sum as f64 - main).abs();
                    Ok(PointRow {
                        x: xx,
                        sum,
                        main_term: main,
                        abs_error,
                        rel_error: if main > 0.0 { abs_error / main } else { f64::NAN },
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            emit(cli, config, &rows)?;
            Ok(Outcome::Pass)
        }
        Command::Triangles { x, omega } => {
            config.insert("command".into(), json!("triangles"));
            config.insert("omega".into(), json!(omega));
            let rows = x
                .iter()
                .map(|&xx| right_triangles(xx, *omega))
                .collect::<Result<Vec<_>, Error>>()?;
            emit(cli, config, &rows)?;
            Ok(Outcome::Pass)
        }
    }
}

#[derive(Debug, Serialize)]
struct VerifyRow {
    identity: &'static str,
    h: Option<u64>,
    s: f64,
    w: Option<f64>,
    lhs: f64,
    rhs: f64,
    abs_diff: f64,
    rel_diff: f64,
    lhs_tail: f64,
    rhs_tail: f64,
    tolerance: f64,
    result: &'static str,
}

impl From<IdentityReport> for VerifyRow {
    fn from(r: IdentityReport) -> Self {
        let (identity, h, s, w) = match r.params {
            IdentityParams::Single { h, s } => ("single", Some(h), s, None),
            IdentityParams::Double { s, w } => ("double", None, s, Some(w)),
        };
        VerifyRow {
            identity,
            h,
            s,
            w,
            lhs: r.lhs,
            rhs: r.rhs,
            abs_diff: r.abs_diff,
            rel_diff: r.rel_diff,
            lhs_tail: r.lhs_tail,
            rhs_tail: r.rhs_tail,
            tolerance: r.tolerance,
            result: if r.pass { "PASS" } else { "FAIL" },
        }
    }
}

fn verdict(cli: &Cli, config: Map<String, Value>, rows: Vec<VerifyRow>) -> Result<Outcome, CliError> {
    emit(cli, config, &rows)?;
    let failed = rows.iter().filter(|r| r.result == "FAIL").count();
    if cli.format == Format::Table && cli.output.is_none() {
        println!(
            "{} ({}/{} passed)",
            if failed == 0 { "PASS" } else { "FAIL" },
            rows.len() - failed,
            rows.len()
        );
    }
    Ok(if failed == 0 { Outcome::Pass } else { Outcome::Fail })
}

#[derive(Debug, Serialize)]
struct EigenRow {
    n: u64,
    m: i64,
    lambda: f64,
}

#[derive(Debug, Serialize)]
struct LfunRow {
    function: LFunction,
    s: f64,
    value: f64,
    tail_estimate: f64,
}

#[derive(Debug, Serialize)]
struct PointRow {
    #[serde(rename = "X")]
    x: u64,
    sum: u64,
    main_term: f64,
    abs_error: f64,
    rel_error: f64,
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn emit<T: Serialize>(cli: &Cli, config: Map<String, Value>, rows: &[T]) -> Result<(), CliError> {
    let mut out: Box<dyn Write> = match &cli.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let objects: Vec<Map<String, Value>> = rows
        .iter()
        .map(|r| match serde_json::to_value(r) {
            Ok(Value::Object(m)) => Ok(m),
            Ok(_) => unreachable!("rows serialize as objects"),
            Err(e) => Err(e),
        })
        .collect::<Result<_, _>>()?;
    let columns: Vec<String> = objects.first().map(|m| m.keys().cloned().collect()).unwrap_or_default();

    match cli.format {
        Format::Json => {
            let doc = json!({ "config": config, "rows": objects });
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)?;
        }
        Format::Csv => {
            for (k, v) in &config {
                writeln!(out, "# {k}: {}", cell(v))?;
            }
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&columns)?;
            for m in &objects {
                w.write_record(m.values().map(cell))?;
            }
            w.flush()?;
        }
        Format::Table => {
            for (k, v) in &config {
                writeln!(out, "# {k}: {}", cell(v))?;
            }
            let cells: Vec<Vec<String>> = objects.iter().map(|m| m.values().map(cell).collect()).collect();
            let widths: Vec<usize> = columns
                .iter()
                .enumerate()
                .map(|(i, c)| cells.iter().map(|r| r[i].len()).chain([c.len()]).max().unwrap_or(0))
                .collect();
            let line = |r: &[String]| {
                r.iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            writeln!(out, "{}", line(&columns))?;
            for r in &cells {
                writeln!(out, "{}", line(r))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
