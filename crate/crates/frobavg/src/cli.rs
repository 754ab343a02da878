//! Command-line orchestration: one subcommand per operation, CSV or JSON
//! rows on stdout (or --out), diagnostics on stderr.
//!
//! Exit codes: 0 success, 1 usage error, 2 precondition violation,
//! 3 failed internal identity, 4 resource-cap breach. Data rows carry no
//! timestamps; wall time goes to a trailing metadata line suppressible
//! with --no-meta.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::analytic::{
    lang_trotter_constant, pi_half, sato_tate_measure,
    ExperimentConfig,
};
use crate::charsum::{char_sum_interval, exceptional_primes, max_char_sum, ScanConfig};
use crate::classnum::{class_number, hp_sum, kronecker_h, reduced_forms};
use crate::curvecount::{
    ap, enumerate_traces, iso_classes, pi_r, theta, CurveModel, CutoffMode, SatoTateWindow,
    DEFAULT_ENUM_CAP,
};
use crate::error::{Error, Result};
use crate::familylab::{
    cm_family_contribution, cm_scan, decompose_count, lt_average, st_average, FamilyWindow,
};
use crate::ffield::{sieve_primes, CharacterTable};
use crate::report::ExperimentReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CutoffArg {
    AllGood,
    BrOnly,
}

#[derive(Parser, Debug)]
#[command(
    name = "frobavg",
    about = "Frobenius trace statistics over Weierstrass curve families",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Output format for data rows.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Write data to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Significant digits for floats in CSV output.
    #[arg(long, global = true, default_value_t = 12)]
    precision: usize,
    /// Suppress the trailing wall-time metadata line.
    #[arg(long, global = true)]
    no_meta: bool,
    /// Worker threads for sweeps (default: rayon's choice).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Cap on p for full (a, b) grid enumeration.
    #[arg(long, global = true, default_value_t = DEFAULT_ENUM_CAP)]
    enum_cap: u64,
    /// Cap on AB * pi(x) work units for family sweeps.
    #[arg(long, global = true, default_value_t = 100_000_000)]
    max_work: u64,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Trace of Frobenius of E(a, b) at p.
    Ap {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, allow_hyphen_values = true)]
        b: i64,
    },
    /// pi_E^r(x): primes up to x with trace r.
    PiR {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, allow_hyphen_values = true)]
        b: i64,
        #[arg(long, allow_hyphen_values = true)]
        r: i64,
        #[arg(long)]
        x: f64,
        #[arg(long, value_enum, default_value_t = CutoffArg::AllGood)]
        cutoff_mode: CutoffArg,
    },
    /// Theta_E(alpha, beta; x): log-weighted window count.
    Theta {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, allow_hyphen_values = true)]
        b: i64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long)]
        x: f64,
    },
    /// Family-averaged pi^r against C_r pi_{1/2}(x).
    LtAverage {
        #[arg(long = "A")]
        a_bound: u64,
        #[arg(long = "B")]
        b_bound: u64,
        #[arg(long, allow_hyphen_values = true)]
        r: i64,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        exclude_zero_ab: bool,
        #[arg(long)]
        exclude_cm: bool,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long = "big-c", default_value_t = 4.0)]
        big_c: f64,
        #[arg(long, default_value_t = 100_000)]
        euler_cutoff: u64,
    },
    /// Family-averaged Theta against x F(alpha, beta).
    StAverage {
        #[arg(long = "A")]
        a_bound: u64,
        #[arg(long = "B")]
        b_bound: u64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        exclude_cm: bool,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long = "big-c", default_value_t = 4.0)]
        big_c: f64,
    },
    /// List CM curves in a window.
    CmScan {
        #[arg(long = "A")]
        a_bound: u64,
        #[arg(long = "B")]
        b_bound: u64,
    },
    /// Axis-family average of pi^0 against its two scales.
    CmContribution {
        #[arg(long = "A")]
        a_bound: u64,
        #[arg(long = "B")]
        b_bound: u64,
        #[arg(long)]
        x: f64,
    },
    /// Exact Deuring identity histogram[r] = (p-1)/2 H(r^2-4p) over a prime range.
    DeuringCheck {
        #[arg(long)]
        pmax: u64,
    },
    /// Isomorphism-class representatives with trace r.
    IsoClasses {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        r: i64,
    },
    /// Primitive reduced forms and h(d).
    ClassNumber {
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
    },
    /// Hurwitz-weighted Kronecker class number H(r^2 - 4p).
    Hurwitz {
        #[arg(long, allow_hyphen_values = true)]
        r: i64,
        #[arg(long)]
        p: u64,
    },
    /// H_p: windowed sum of Kronecker class numbers.
    HpSum {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
    },
    /// The averaged Lang-Trotter constant C_r.
    Constants {
        #[arg(long, allow_hyphen_values = true)]
        r: i64,
        #[arg(long, default_value_t = 1_000_000)]
        cutoff: u64,
    },
    /// pi_{1/2}(x).
    PiHalf {
        #[arg(long)]
        x: f64,
    },
    /// Semicircle mass F(alpha, beta).
    StMeasure {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
    },
    /// Short-interval character sum for one character.
    Charsum {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        j: u64,
        #[arg(long)]
        m: u64,
    },
    /// Exceptional-prime scan of max character sums.
    CharsumScan {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        eta: f64,
    },
    /// Verify M(p)+E1(p)+E2(p) against the brute-force family count.
    DecomposeCheck {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        r: i64,
        #[arg(long = "A")]
        a_bound: u64,
        #[arg(long = "B")]
        b_bound: u64,
    },
}

/// A rendered table: fixed columns plus typed row values.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Fixed-decimal formatting with a given number of significant digits.
fn fmt_sig(v: f64, sig: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, v)
}

fn csv_cell(v: &Value, sig: usize) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(f) if !n.is_i64() && !n.is_u64() => fmt_sig(f, sig),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn render_csv(table: &Table, sig: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", table.columns.join(","));
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|v| csv_cell(v, sig)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

fn render_json(table: &Table) -> String {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = serde_json::Map::new();
            for (col, val) in table.columns.iter().zip(row) {
                obj.insert(col.to_string(), val.clone());
            }
            Value::Object(obj)
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&json!({ "rows": rows })).unwrap_or_default();
    s.push('\n');
    s
}

fn f(v: f64) -> Value {
    json!(v)
}

fn report_table(report: &ExperimentReport) -> Table {
    let mut t = Table::new(vec![
        "kind",
        "A",
        "B",
        "r",
        "alpha",
        "beta",
        "x",
        "family_size",
        "singular_skipped",
        "zero_ab_skipped",
        "cm_skipped",
        "empirical",
        "predicted",
        "ratio",
        "verdicts",
        "warning",
    ]);
    t.push(vec![
        json!(report.kind),
        json!(report.a_bound),
        json!(report.b_bound),
        report.r.map(|r| json!(r)).unwrap_or(Value::Null),
        report.alpha.map(f).unwrap_or(Value::Null),
        report.beta.map(f).unwrap_or(Value::Null),
        f(report.x),
        json!(report.family_size),
        json!(report.singular_skipped),
        json!(report.zero_ab_skipped),
        json!(report.cm_skipped),
        f(report.empirical),
        f(report.predicted),
        f(report.ratio),
        json!(report.verdict_summary()),
        report
            .warning
            .clone()
            .map(|w| json!(w))
            .unwrap_or(Value::Null),
    ]);
    t
}

fn check_work_cap(a_bound: u64, b_bound: u64, x: f64, cap: u64) -> Result<()> {
    let pi_x = if x >= 2.0 {
        (x / x.ln().max(1.0)) as u64 + 2
    } else {
        0
    };
    let units = a_bound.saturating_mul(b_bound).saturating_mul(pi_x);
    if units > cap {
        return Err(Error::resource(format!(
            "sweep needs about {units} work units (AB*pi(x)), cap is {cap}"
        )));
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<Table> {
    match &cli.cmd {
        Cmd::Ap { p, a, b } => {
            let trace = ap(*p, *a, *b)?;
            let mut t = Table::new(vec!["p", "a", "b", "ap"]);
            t.push(vec![json!(p), json!(a), json!(b), json!(trace)]);
            Ok(t)
        }
        Cmd::PiR {
            a,
            b,
            r,
            x,
            cutoff_mode,
        } => {
            let mode = match cutoff_mode {
                CutoffArg::AllGood => CutoffMode::AllGood,
                CutoffArg::BrOnly => CutoffMode::BrOnly,
            };
            let count = pi_r(&CurveModel::new(*a, *b), *r, *x, mode)?;
            let mut t = Table::new(vec!["a", "b", "r", "x", "cutoff_mode", "count"]);
            t.push(vec![
                json!(a),
                json!(b),
                json!(r),
                f(*x),
                json!(format!("{cutoff_mode:?}")),
                json!(count),
            ]);
            Ok(t)
        }
        Cmd::Theta { a, b, alpha, beta, x } => {
            let window = SatoTateWindow::new(*alpha, *beta)?;
            let value = theta(&CurveModel::new(*a, *b), &window, *x)?;
            let mut t = Table::new(vec!["a", "b", "alpha", "beta", "x", "theta"]);
            t.push(vec![json!(a), json!(b), f(*alpha), f(*beta), f(*x), f(value)]);
            Ok(t)
        }
        Cmd::LtAverage {
            a_bound,
            b_bound,
            r,
            x,
            exclude_zero_ab,
            exclude_cm,
            epsilon,
            big_c,
            euler_cutoff,
        } => {
            check_work_cap(*a_bound, *b_bound, *x, cli.max_work)?;
            let mut window = FamilyWindow::new(*a_bound, *b_bound)?;
            window.exclude_zero_ab = *exclude_zero_ab;
            window.exclude_all_cm = *exclude_cm;
            let cfg = ExperimentConfig {
                epsilon: *epsilon,
                big_c: *big_c,
                cutoff: *euler_cutoff,
                ..ExperimentConfig::default()
            };
            Ok(report_table(&lt_average(&window, *r, *x, &cfg)?))
        }
        Cmd::StAverage {
            a_bound,
            b_bound,
            alpha,
            beta,
            x,
            exclude_cm,
            epsilon,
            big_c,
        } => {
            check_work_cap(*a_bound, *b_bound, *x, cli.max_work)?;
            let mut window = FamilyWindow::new(*a_bound, *b_bound)?;
            window.exclude_all_cm = *exclude_cm;
            let st = SatoTateWindow::new(*alpha, *beta)?;
            let cfg = ExperimentConfig {
                epsilon: *epsilon,
                big_c: *big_c,
                ..ExperimentConfig::default()
            };
            Ok(report_table(&st_average(&window, &st, *x, &cfg)?))
        }
        Cmd::CmScan { a_bound, b_bound } => {
            let window = FamilyWindow::new(*a_bound, *b_bound)?;
            let curves = cm_scan(&window);
            let mut t = Table::new(vec!["a", "b", "j"]);
            for c in curves {
                t.push(vec![
                    json!(c.a),
                    json!(c.b),
                    c.j.map(|j| json!(j)).unwrap_or(Value::Null),
                ]);
            }
            Ok(t)
        }
        Cmd::CmContribution {
            a_bound,
            b_bound,
            x,
        } => {
            check_work_cap((*a_bound).max(*b_bound), 1, *x, cli.max_work)?;
            let c = cm_family_contribution(*a_bound, *b_bound, *x)?;
            let mut t = Table::new(vec![
                "A",
                "B",
                "x",
                "value",
                "pi_scale",
                "lt_scale",
                "exceeds_lt_scale",
            ]);
            t.push(vec![
                json!(c.a_bound),
                json!(c.b_bound),
                f(c.x),
                f(c.value),
                f(c.pi_scale),
                f(c.lt_scale),
                json!(c.value > c.lt_scale),
            ]);
            Ok(t)
        }
        Cmd::DeuringCheck { pmax } => {
            let mut t = Table::new(vec!["p", "r", "count", "expected", "exact"]);
            let mut all_exact = true;
            for p in sieve_primes(*pmax)?.iter().filter(|&p| p > 3) {
                let en = enumerate_traces(p, cli.enum_cap)?;
                let half = num_rational::Rational64::new((p as i64 - 1) / 2, 1);
                let max_r = (2.0 * (p as f64).sqrt()).floor() as i64;
                for r in -max_r..=max_r {
                    if r == 0 || r * r >= 4 * p as i64 || r % p as i64 == 0 {
                        continue;
                    }
                    let expected = half * kronecker_h(r, p)?;
                    let count = en.count(r);
                    let exact = expected == num_rational::Rational64::new(count as i64, 1);
                    all_exact &= exact;
                    t.push(vec![
                        json!(p),
                        json!(r),
                        json!(count),
                        json!(expected.to_string()),
                        json!(exact),
                    ]);
                }
            }
            t.push(vec![
                json!("all"),
                Value::Null,
                Value::Null,
                Value::Null,
                json!(all_exact),
            ]);
            if !all_exact {
                return Err(Error::identity(
                    "Deuring identity failed at some (p, r)".to_string(),
                ));
            }
            Ok(t)
        }
        Cmd::IsoClasses { p, r } => {
            let set = iso_classes(*p, *r, cli.enum_cap)?;
            let mut t = Table::new(vec!["p", "r", "u", "v", "restricted"]);
            for (u, v) in &set.representatives {
                t.push(vec![
                    json!(p),
                    json!(r),
                    json!(u),
                    json!(v),
                    json!(*u != 0 && *v != 0),
                ]);
            }
            Ok(t)
        }
        Cmd::ClassNumber { d } => {
            let forms = reduced_forms(*d)?;
            let h = class_number(*d)?;
            let mut t = Table::new(vec!["d", "A", "B", "C", "h"]);
            for form in &forms {
                t.push(vec![
                    json!(d),
                    json!(form.a),
                    json!(form.b),
                    json!(form.c),
                    json!(h),
                ]);
            }
            Ok(t)
        }
        Cmd::Hurwitz { r, p } => {
            let h = kronecker_h(*r, *p)?;
            let mut t = Table::new(vec!["r", "p", "D", "H", "H_times_6"]);
            t.push(vec![
                json!(r),
                json!(p),
                json!(r * r - 4 * *p as i64),
                json!(h.to_string()),
                json!((h * num_rational::Rational64::new(6, 1)).to_integer()),
            ]);
            Ok(t)
        }
        Cmd::HpSum { p, alpha, beta } => {
            let window = SatoTateWindow::new(*alpha, *beta)?;
            let h = hp_sum(*p, &window)?;
            let mut t = Table::new(vec!["p", "alpha", "beta", "Hp"]);
            t.push(vec![json!(p), f(*alpha), f(*beta), json!(h.to_string())]);
            Ok(t)
        }
        Cmd::Constants { r, cutoff } => {
            let c = lang_trotter_constant(*r, *cutoff)?;
            let mut t = Table::new(vec!["r", "cutoff", "value", "tail_bound", "closed_form"]);
            t.push(vec![
                json!(r),
                json!(cutoff),
                f(c.value),
                f(c.tail_bound),
                c.closed_form.map(f).unwrap_or(Value::Null),
            ]);
            Ok(t)
        }
        Cmd::PiHalf { x } => {
            let v = pi_half(*x)?;
            let mut t = Table::new(vec!["x", "pi_half"]);
            t.push(vec![f(*x), f(v)]);
            Ok(t)
        }
        Cmd::StMeasure { alpha, beta } => {
            let v = sato_tate_measure(*alpha, *beta)?;
            let mut t = Table::new(vec!["alpha", "beta", "F"]);
            t.push(vec![f(*alpha), f(*beta), f(v)]);
            Ok(t)
        }
        Cmd::Charsum { p, j, m } => {
            let table = CharacterTable::build(*p)?;
            let s = char_sum_interval(&table, *j, *m)?;
            let max = if *m >= 2 {
                Some(max_char_sum(&table, *m)?)
            } else {
                None
            };
            let mut t = Table::new(vec!["p", "j", "M", "re", "im", "abs", "max_nonprincipal"]);
            t.push(vec![
                json!(p),
                json!(j),
                json!(m),
                f(s.re),
                f(s.im),
                f(s.norm()),
                max.map(f).unwrap_or(Value::Null),
            ]);
            Ok(t)
        }
        Cmd::CharsumScan { x, m, eta } => {
            let config = ScanConfig::new(*x, *m, *eta)?;
            let report = exceptional_primes(&config)?;
            let mut t = Table::new(vec![
                "x",
                "M",
                "eta",
                "threshold",
                "scanned",
                "exceptional_count",
                "exceptional_fraction",
                "reference_x_pow",
                "count_over_reference",
                "exceptional_primes",
            ]);
            let list = report
                .exceptional
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(";");
            t.push(vec![
                f(*x),
                json!(m),
                f(*eta),
                f(report.threshold),
                json!(report.scanned),
                json!(report.exceptional.len()),
                f(report.exceptional_fraction()),
                f(report.reference),
                f(report.count_over_reference()),
                json!(list),
            ]);
            Ok(t)
        }
        Cmd::DecomposeCheck {
            p,
            r,
            a_bound,
            b_bound,
        } => {
            let d = decompose_count(*p, *r, *a_bound, *b_bound, cli.enum_cap)?;
            let mut t = Table::new(vec![
                "p",
                "r",
                "A",
                "B",
                "M_re",
                "M_im",
                "E1_re",
                "E1_im",
                "E2_re",
                "E2_im",
                "total_re",
                "total_im",
                "brute_count",
                "mismatch",
            ]);
            let total = d.total();
            t.push(vec![
                json!(p),
                json!(r),
                json!(a_bound),
                json!(b_bound),
                f(d.m_term.0),
                f(d.m_term.1),
                f(d.e1_term.0),
                f(d.e1_term.1),
                f(d.e2_term.0),
                f(d.e2_term.1),
                f(total.re),
                f(total.im),
                json!(d.brute_count),
                f(d.mismatch()),
            ]);
            if d.mismatch() > 1e-6 * (*p as f64 + (*a_bound * *b_bound) as f64) {
                return Err(Error::identity(format!(
                    "decomposition mismatch {} at p={p} r={r}",
                    d.mismatch()
                )));
            }
            Ok(t)
        }
    }
}

/// Run the CLI against explicit argv and streams; returns the exit code.
pub fn run<W: Write, D: Write>(args: &[String], out: &mut W, diag: &mut D) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = write!(diag, "{e}");
            return code;
        }
    };
    let started = Instant::now();
    let result = match cli.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(w).build();
            match pool {
                Ok(pool) => pool.install(|| execute(&cli)),
                Err(e) => {
                    let _ = writeln!(diag, "failed to build worker pool: {e}");
                    return 1;
                }
            }
        }
        None => execute(&cli),
    };
    match result {
        Ok(table) => {
            let mut rendered = match cli.format {
                OutputFormat::Csv => render_csv(&table, cli.precision),
                OutputFormat::Json => render_json(&table),
            };
            if !cli.no_meta {
                let _ = writeln!(rendered, "# wall_ms={}", started.elapsed().as_millis());
            }
            let write_result = match &cli.out {
                Some(path) => std::fs::write(path, rendered.as_bytes()).map_err(Error::from),
                None => out.write_all(rendered.as_bytes()).map_err(Error::from),
            };
            if let Err(e) = write_result {
                let _ = writeln!(diag, "{e}");
                return 1;
            }
            0
        }
        Err(e) => {
            let _ = writeln!(diag, "error: {e}");
            e.exit_code()
        }
    }
}
