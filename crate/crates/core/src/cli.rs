//! The `smj` command-line harness.
//!
//! Every subcommand emits one flat record per grid tuple, either as CSV with a
//! header row or as a JSON array of objects. Floats carry 17 significant
//! digits. Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 numerical or domain error.

use crate::analysis::{convergence_study, powers_of_two, Quantity};
use crate::calibration::{calibrate, OperatorParams};
use crate::error::{Error, Result};
use crate::expansions::{
    a3_validate, a4_validate, a5_validate, SeriesValidationReport, A4_MAX_ORDER,
};
use crate::moments::moment_records;
use crate::operator::{apply, FunctionSpec, TruncationPolicy};
use crate::verify;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "smj",
    version,
    about = "Exponential-preserving Szasz-Mirakyan-Jain operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Comma-separated list of n.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u64>,
    /// Comma-separated list of beta in [0, 1).
    #[arg(
        long,
        allow_negative_numbers = true,
        value_delimiter = ',',
        required = true
    )]
    beta: Vec<f64>,
    /// Comma-separated list of lambda >= 0.
    #[arg(
        long,
        allow_negative_numbers = true,
        value_delimiter = ',',
        required = true
    )]
    lambda: Vec<f64>,
}

#[derive(Debug, Args)]
struct PolicyArgs {
    /// Tail mass bound for series truncation.
    #[arg(long)]
    tail_eps: Option<f64>,
    /// Maximum number of series terms.
    #[arg(long)]
    max_terms: Option<usize>,
}

impl PolicyArgs {
    fn policy(&self) -> Result<TruncationPolicy> {
        let mut p = TruncationPolicy::default();
        if let Some(e) = self.tail_eps {
            p.tail_eps = e;
        }
        if let Some(m) = self.max_terms {
            p.max_terms = m;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Series {
    A3,
    A4,
    A5,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Calibration root z and scale c_n.
    Calibrate {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Evaluate R_n(f; x) by series summation.
    Eval {
        /// Function specs (exp:a | mono:m | poly:c0,c1,... | pow:x0,m | exppow:a,x0,m | rat1),
        /// separated by ';' or given by repeating the flag.
        #[arg(long, value_delimiter = ';', required = true)]
        f: Vec<String>,
        #[command(flatten)]
        grid: GridArgs,
        /// Comma-separated list of x >= 0.
        #[arg(
            long,
            allow_negative_numbers = true,
            value_delimiter = ',',
            required = true
        )]
        x: Vec<f64>,
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Closed-form raw and central moments against series summation.
    Moments {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(
            long,
            allow_negative_numbers = true,
            value_delimiter = ',',
            required = true
        )]
        x: Vec<f64>,
        /// Highest moment order (at most 5).
        #[arg(long, default_value_t = 5)]
        max_order: usize,
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Scaled quantities over n with their limits.
    Converge {
        /// nphi1 | nphi2 | n2phi3 | n2phi4 | n2exp4 | nexp:mu, comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        quantity: Vec<String>,
        /// Comma-separated doubling sequence of n (default 2^6 .. 2^14).
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
        #[arg(
            long,
            allow_negative_numbers = true,
            value_delimiter = ',',
            required = true
        )]
        beta: Vec<f64>,
        #[arg(
            long,
            allow_negative_numbers = true,
            value_delimiter = ',',
            required = true
        )]
        lambda: Vec<f64>,
        #[arg(
            long,
            allow_negative_numbers = true,
            value_delimiter = ',',
            required = true
        )]
        x: Vec<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Printed appendix coefficients against measured ones.
    Expand {
        #[arg(long, value_enum)]
        which: Series,
        /// Highest order (a3: up to 8, a4: up to 5; a5 always reports 0..3).
        #[arg(long, default_value_t = 5)]
        order: usize,
        #[arg(
            long,
            allow_negative_numbers = true,
            value_delimiter = ',',
            default_value = "0,0.25,0.5,0.9"
        )]
        beta: Vec<f64>,
        /// First argument of the a5 ratio.
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.02)]
        x: f64,
        /// Second argument of the a5 ratio.
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.01)]
        t: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the acceptance suite; exits 1 if any criterion fails.
    Verify {
        /// Comma-separated criterion ids (default: all).
        #[arg(long, value_delimiter = ',')]
        criterion: Vec<u8>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

/// A single output cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Field {
    fn csv(&self) -> String {
        match self {
            Field::Float(v) => format_float(*v),
            Field::Int(v) => v.to_string(),
            Field::Bool(v) => v.to_string(),
            Field::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Field::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> String {
        match self {
            Field::Float(v) if v.is_finite() => format_float(*v),
            Field::Float(_) => "null".into(),
            Field::Int(v) => v.to_string(),
            Field::Bool(v) => v.to_string(),
            Field::Text(s) => serde_json::to_string(s).expect("strings serialize"),
        }
    }
}

/// 17 significant digits.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Header and rows of one output table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Field>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Field>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Field::csv).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let objs: Vec<String> = self
            .rows
            .iter()
            .map(|row| {
                let kv: Vec<String> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, f)| format!("\"{c}\":{}", f.json()))
                    .collect();
                format!("{{{}}}", kv.join(","))
            })
            .collect();
        format!("[{}]\n", objs.join(",\n"))
    }
}

fn params_grid(grid: &GridArgs) -> Result<Vec<OperatorParams>> {
    let mut out = Vec::new();
    for &n in &grid.n {
        for &beta in &grid.beta {
            for &lambda in &grid.lambda {
                out.push(OperatorParams::new(n, beta, lambda)?);
            }
        }
    }
    Ok(out)
}

fn param_fields(p: &OperatorParams) -> Vec<Field> {
    vec![
        Field::Int(p.n),
        Field::Float(p.beta),
        Field::Float(p.lambda),
    ]
}

fn calibrate_table(grid: &GridArgs) -> Result<Table> {
    let mut t = Table::new(&["n", "beta", "lambda", "z", "z_minus_1", "c_n"]);
    for p in params_grid(grid)? {
        let c = calibrate(&p)?;
        let mut row = param_fields(&p);
        row.extend([
            Field::Float(c.z),
            Field::Float(c.z_offset),
            Field::Float(c.c_n),
        ]);
        t.push(row);
    }
    Ok(t)
}

fn eval_table(fs: &[String], grid: &GridArgs, xs: &[f64], policy: &PolicyArgs) -> Result<Table> {
    let policy = policy.policy()?;
    let specs: Vec<FunctionSpec> = fs.iter().map(|s| s.trim().parse()).collect::<Result<_>>()?;
    let mut t = Table::new(&[
        "n", "beta", "lambda", "x", "function", "value", "f_x", "error",
    ]);
    for p in params_grid(grid)? {
        for &x in xs {
            for f in &specs {
                let v = apply(&p, x, f, &policy)?;
                let fx = f.eval(x);
                let mut row = param_fields(&p);
                row.extend([
                    Field::Float(x),
                    Field::Text(f.to_string()),
                    Field::Float(v),
                    Field::Float(fx),
                    Field::Float(v - fx),
                ]);
                t.push(row);
            }
        }
    }
    Ok(t)
}

fn moments_table(
    grid: &GridArgs,
    xs: &[f64],
    max_order: usize,
    policy: &PolicyArgs,
) -> Result<Table> {
    let policy = policy.policy()?;
    let mut t = Table::new(&[
        "n",
        "beta",
        "lambda",
        "x",
        "kind",
        "order",
        "closed_form",
        "oracle",
        "abs_err",
        "rel_err",
    ]);
    for p in params_grid(grid)? {
        for &x in xs {
            for r in moment_records(&p, x, max_order, &policy)? {
                let mut row = param_fields(&p);
                row.extend([
                    Field::Float(x),
                    Field::Text(r.kind.to_string()),
                    Field::Int(r.order as u64),
                    Field::Float(r.closed_form),
                    Field::Float(r.oracle),
                    Field::Float(r.abs_err),
                    Field::Float(r.rel_err),
                ]);
                t.push(row);
            }
        }
    }
    Ok(t)
}

fn converge_table(
    quantities: &[String],
    ns: &[u64],
    betas: &[f64],
    lambdas: &[f64],
    xs: &[f64],
) -> Result<Table> {
    let ns = if ns.is_empty() {
        powers_of_two(6, 14)
    } else {
        ns.to_vec()
    };
    let qs: Vec<Quantity> = quantities
        .iter()
        .map(|s| s.trim().parse())
        .collect::<Result<_>>()?;
    let mut t = Table::new(&[
        "n",
        "beta",
        "lambda",
        "x",
        "quantity",
        "raw",
        "scaled",
        "target",
        "rel_gap",
        "extrapolated",
        "order",
    ]);
    for &beta in betas {
        for &lambda in lambdas {
            for &x in xs {
                for &q in &qs {
                    let study = convergence_study(q, beta, lambda, x, &ns)?;
                    for r in &study.records {
                        t.push(vec![
                            Field::Int(r.n),
                            Field::Float(beta),
                            Field::Float(lambda),
                            Field::Float(x),
                            Field::Text(r.quantity.clone()),
                            Field::Float(r.raw),
                            Field::Float(r.scaled),
                            Field::Float(r.target),
                            Field::Float(r.rel_gap),
                            Field::Float(study.extrapolated),
                            Field::Float(study.order),
                        ]);
                    }
                }
            }
        }
    }
    Ok(t)
}

fn expand_table(which: Series, order: usize, betas: &[f64], x: f64, tt: f64) -> Result<Table> {
    let mut t = Table::new(&[
        "target",
        "beta",
        "order",
        "printed_coefficient",
        "measured_coefficient",
        "abs_diff",
        "verdict",
    ]);
    for &beta in betas {
        let reports: Vec<SeriesValidationReport> = match which {
            Series::A3 => a3_validate(beta, order)?,
            Series::A4 => a4_validate(beta, order.min(A4_MAX_ORDER))?,
            Series::A5 => a5_validate(x, tt, beta)?,
        };
        for r in reports {
            t.push(vec![
                Field::Text(r.target.to_string()),
                Field::Float(beta),
                Field::Int(r.order as u64),
                Field::Float(r.printed_coefficient),
                Field::Float(r.measured_coefficient),
                Field::Float(r.abs_diff),
                Field::Text(r.verdict.to_string()),
            ]);
        }
    }
    Ok(t)
}

fn verify_table(ids: &[u8]) -> Result<(Table, bool)> {
    let ids: Vec<u8> = if ids.is_empty() {
        verify::CHECKS.iter().map(|c| c.0).collect()
    } else {
        ids.to_vec()
    };
    let mut t = Table::new(&["id", "name", "passed", "detail"]);
    let mut all = true;
    for id in ids {
        let r = verify::run_check(id).ok_or_else(|| Error::Parse {
            token: id.to_string(),
            reason: "no such criterion".into(),
        })?;
        all &= r.passed;
        t.push(vec![
            Field::Int(r.id as u64),
            Field::Text(r.name.into()),
            Field::Bool(r.passed),
            Field::Text(r.detail),
        ]);
    }
    Ok((t, all))
}

fn emit(table: &Table, out: &OutputArgs) -> std::io::Result<()> {
    let text = match out.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    match &out.output {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

/// Parses arguments, runs the subcommand and returns the exit status.
pub fn run<I, T>(args: I) -> i32
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
    let (result, out) = match &cli.command {
        Command::Calibrate { grid, out } => (calibrate_table(grid).map(|t| (t, true)), out),
        Command::Eval {
            f,
            grid,
            x,
            policy,
            out,
        } => (eval_table(f, grid, x, policy).map(|t| (t, true)), out),
        Command::Moments {
            grid,
            x,
            max_order,
            policy,
            out,
        } => (
            moments_table(grid, x, *max_order, policy).map(|t| (t, true)),
            out,
        ),
        Command::Converge {
            quantity,
            n,
            beta,
            lambda,
            x,
            out,
        } => (
            converge_table(quantity, n, beta, lambda, x).map(|t| (t, true)),
            out,
        ),
        Command::Expand {
            which,
            order,
            beta,
            x,
            t,
            out,
        } => (
            expand_table(*which, *order, beta, *x, *t).map(|t| (t, true)),
            out,
        ),
        Command::Verify { criterion, out } => (verify_table(criterion), out),
    };
    match result {
        Ok((table, ok)) => {
            if let Err(e) = emit(&table, out) {
                eprintln!("smj: cannot write output: {e}");
                return EXIT_NUMERIC;
            }
            if ok {
                EXIT_OK
            } else {
                EXIT_VERIFY_FAILED
            }
        }
        Err(e @ Error::Parse { .. }) => {
            eprintln!("smj: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("smj: {e}");
            EXIT_NUMERIC
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(format_float(0.7), "6.9999999999999996e-1");
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn csv_quotes_text_with_commas() {
        assert_eq!(Field::Text("a,b".into()).csv(), "\"a,b\"");
        assert_eq!(Field::Text("say \"x\"".into()).csv(), "\"say \"\"x\"\"\"");
        assert_eq!(Field::Text("plain".into()).csv(), "plain");
    }

    #[test]
    fn json_rows_are_flat_objects() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Field::Int(1), Field::Text("q\"".into())]);
        t.push(vec![Field::Float(f64::INFINITY), Field::Bool(true)]);
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v[0]["a"], 1);
        assert_eq!(v[0]["b"], "q\"");
        assert!(v[1]["a"].is_null());
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(["smj"]), EXIT_USAGE);
        assert_eq!(run(["smj", "frobnicate"]), EXIT_USAGE);
        assert_eq!(
            run([
                "smj",
                "calibrate",
                "--n",
                "7",
                "--beta",
                "x",
                "--lambda",
                "0"
            ]),
            EXIT_USAGE
        );
    }

    #[test]
    fn domain_errors() {
        let dir = std::env::temp_dir().join("smj-cli-domain.csv");
        let path = dir.to_str().unwrap();
        assert_eq!(
            run([
                "smj",
                "calibrate",
                "--n",
                "7",
                "--beta",
                "1.5",
                "--lambda",
                "0",
                "--output",
                path
            ]),
            EXIT_NUMERIC
        );
    }
}
