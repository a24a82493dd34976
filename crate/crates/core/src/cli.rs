//! Command-line front end. `main.rs` only parses arguments and maps the
//! outcome to an exit status.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::catalog::{self, MODELS};
use crate::error::{Error, Result};
use crate::flatness::{flatness_numeric, flatness_series, residual_summary, DEFAULT_SEED};
use crate::integrability::{check, derive_constraints, eom_descriptor, Position, Residuals, Verdict};
use crate::lax::{build_lax, DEFAULT_SERIES_ORDER};
use crate::model::{Model, ModelFile};
use crate::par::Exec;
use crate::rational::{format_rational, parse_rational, Rational};
use crate::scanner::{lattice, range_values, scan_general_z2, scan_pcm, ScanResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_INTEGRABLE: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    #[value(name = "general_z2")]
    GeneralZ2,
    Pcm,
}

#[derive(Debug, Parser)]
#[command(name = "sigmalax", version, about = "Integrability checks and Lax connections for sigma models with chiral operator pairs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalOpts,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Model JSON file.
    #[arg(long, global = true, conflicts_with = "builtin")]
    pub model: Option<PathBuf>,
    /// Catalog model, e.g. `z4_superspace` or `general_z2(1,1,0)`.
    #[arg(long, global = true)]
    pub builtin: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Series order for `lax` fallbacks and `flatness`.
    #[arg(long, global = true, default_value_t = DEFAULT_SERIES_ORDER)]
    pub order: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Pass threshold for the floating-point flatness check.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tolerance: f64,
    /// Number of λ values for floating-point checks.
    #[arg(long, global = true, default_value_t = 5)]
    pub samples: usize,
    /// Run on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide integrability and report residuals, kernel scalars and constraints.
    Check,
    /// Build the Lax connection.
    Lax,
    /// Verify flatness order by order and numerically.
    Flatness {
        /// Random trials for the floating-point check.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Skip the floating-point check.
        #[arg(long)]
        exact_only: bool,
    },
    /// Scan a parameter family over an integer grid.
    Scan {
        #[arg(long, value_enum)]
        family: Family,
        /// `lo:hi`, applied to every parameter.
        #[arg(long, default_value = "-3:3", allow_hyphen_values = true)]
        range: String,
        #[arg(long, default_value = "1")]
        step: String,
    },
    /// Browse the built-in models.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    List,
    /// Export a model as a model JSON file.
    Show { name: String },
}

/// Rendered report and exit status.
#[derive(Debug)]
pub struct Outcome {
    pub output: String,
    pub exit_code: i32,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Outcome { output, exit_code: EXIT_OK, warnings: Vec::new() }
    }
}

fn exec(g: &GlobalOpts) -> Exec {
    if g.sequential {
        Exec::Sequential
    } else {
        Exec::Auto
    }
}

fn validate(g: &GlobalOpts) -> Result<()> {
    if g.tolerance.is_nan() || g.tolerance <= 0.0 {
        return Err(Error::Validation("--tolerance must be positive".into()));
    }
    if g.order < 2 {
        return Err(Error::Validation("--order must be at least 2".into()));
    }
    if g.samples == 0 {
        return Err(Error::Validation("--samples must be positive".into()));
    }
    Ok(())
}

fn load_model(g: &GlobalOpts) -> Result<Model> {
    match (&g.model, &g.builtin) {
        (Some(path), None) => ModelFile::load(path)?.build(),
        (None, Some(name)) => Ok(catalog::builtin(name)?.into()),
        _ => Err(Error::Validation("exactly one of --model or --builtin is required".into())),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn position(p: &Position) -> String {
    match p {
        Position::Grades { j, k } => format!("(j={j},k={k})"),
        Position::Basis { a, b } => format!("(a={a},b={b})"),
    }
}

fn join(v: &[Rational]) -> String {
    v.iter().map(format_rational).collect::<Vec<_>>().join(" ")
}

fn table(rows: &[Vec<Rational>]) -> String {
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(format_rational).collect()).collect();
    let w = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    cells.iter().map(|r| format!("    [{}]\n", r.iter().map(|c| format!("{c:>w$}")).collect::<Vec<_>>().join(" "))).collect()
}

/// Evenly spaced λ values in `[-1, 1]`, zero excluded.
pub fn lambda_samples(n: usize) -> Vec<f64> {
    (1..=n).map(|i| -1.0 + 2.0 * i as f64 / (n + 1) as f64).filter(|l| l.abs() > 1e-12).collect()
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    validate(g)?;
    match &cli.command {
        Command::Check => run_check(g),
        Command::Lax => run_lax(g),
        Command::Flatness { trials, exact_only } => run_flatness(g, *trials, *exact_only),
        Command::Scan { family, range, step } => run_scan(g, *family, range, step),
        Command::Catalog { action } => run_catalog(g, action),
    }
}

fn run_check(g: &GlobalOpts) -> Result<Outcome> {
    let m = load_model(g)?;
    let report = check(&m.algebra, &m.pair, exec(g))?;
    let constraints = derive_constraints(&m.algebra, &m.pair, &m.projectors);
    let eom = eom_descriptor(&m.algebra, &m.pair);
    let matches = m.expected.map(|e| e == report.verdict);
    let exit_code = if report.verdict == Verdict::NotIntegrable || matches == Some(false) {
        EXIT_NOT_INTEGRABLE
    } else {
        EXIT_OK
    };
    let output = match g.format {
        Format::Json => to_json(&json!({
            "model": m.name,
            "verdict": report.verdict,
            "expected": m.expected,
            "report": report,
            "constraints": constraints.iter().filter(|c| c.nonzero).collect::<Vec<_>>(),
            "equations": eom,
        })),
        Format::Csv => {
            let mut s = String::from("position,branch,at_zero,with_pi\n");
            match &report.residuals {
                Residuals::Graded(t) => {
                    for (j, row) in t.residual.iter().enumerate() {
                        for (k, v) in row.iter().enumerate() {
                            let _ = writeln!(s, "\"(j={j},k={k})\",both,{},{}", format_rational(v), format_rational(&t.residual_with_pi[j][k]));
                        }
                    }
                }
                Residuals::General { pairs } => {
                    for p in pairs {
                        let b = serde_json::to_value(p.branch).expect("branch");
                        let _ = writeln!(s, "\"{}\",{},{},{}", position(&p.position), b.as_str().unwrap_or(""), join(&p.at_zero), join(&p.with_pi));
                    }
                }
            }
            s
        }
        Format::Pretty => {
            let mut s = format!("model {}\nverdict: {}\n", m.name, report.verdict);
            if let Some(e) = m.expected {
                let _ = writeln!(s, "expected: {e}");
            }
            match &report.residuals {
                Residuals::Graded(t) => {
                    s.push_str("factor table (+), rows j, columns k:\n");
                    s.push_str(&table(&t.factor_plus));
                    s.push_str("factor table (-):\n");
                    s.push_str(&table(&t.factor_minus));
                    s.push_str("residual at Pi = 0:\n");
                    s.push_str(&table(&t.residual));
                    if !t.vacuous.is_empty() {
                        let v: Vec<String> = t.vacuous.iter().map(position).collect();
                        let _ = writeln!(s, "vacuous grade pairs: {}", v.join(" "));
                    }
                }
                Residuals::General { pairs } => {
                    let _ = writeln!(s, "nonzero basis-pair residuals at Pi = 0: {}", pairs.len());
                }
            }
            if let Some(pi) = &report.chosen_pi {
                for p in pi {
                    let grade = p.grade.map(|g| format!("^{g}")).unwrap_or_else(|| format!("_{}", p.projector));
                    let _ = writeln!(s, "Pi{grade} = {}", format_rational(&p.value));
                }
            }
            for c in constraints.iter().filter(|c| c.nonzero) {
                let _ = writeln!(s, "constraint: {} = 0", c.label);
            }
            if let Some(eqs) = &eom.graded {
                s.push_str("equations of motion:\n");
                for e in eqs {
                    let _ = writeln!(s, "  {e}");
                }
            }
            if report.singular_noncommuting {
                s.push_str("note: sigma+ and sigma- do not commute and their difference is singular\n");
            }
            s
        }
    };
    Ok(Outcome { output, exit_code, warnings: Vec::new() })
}

fn run_lax(g: &GlobalOpts) -> Result<Outcome> {
    let m = load_model(g)?;
    let conn = build_lax(&m.algebra, &m.pair, g.order);
    let output = match g.format {
        Format::Json => to_json(&json!({ "model": m.name, "connection": conn.to_json() })),
        Format::Pretty => format!("{}\n", conn.pretty(&m.algebra)),
        Format::Csv => {
            let mut s = String::from("chirality,power,row,col,value\n");
            for (label, part) in [("+", &conn.plus), ("-", &conn.minus)] {
                for (p, mat) in part {
                    for (i, row) in mat.to_rows().iter().enumerate() {
                        for (j, v) in row.iter().enumerate() {
                            if *v != Rational::from_integer(0.into()) {
                                let _ = writeln!(s, "{label},{p},{i},{j},{}", format_rational(v));
                            }
                        }
                    }
                }
            }
            s
        }
    };
    Ok(Outcome { output, exit_code: EXIT_OK, warnings: conn.warnings.clone() })
}

fn run_flatness(g: &GlobalOpts, trials: usize, exact_only: bool) -> Result<Outcome> {
    let m = load_model(g)?;
    let series = flatness_series(&m.algebra, &m.pair, &m.projectors, g.order, exec(g))?;
    let numeric = (!exact_only).then(|| {
        flatness_numeric(&m.algebra, &m.pair, &m.projectors, &lambda_samples(g.samples), trials, g.seed, exec(g))
    });
    let numeric_ok = numeric.as_ref().is_none_or(|n| n.max_residual < g.tolerance);
    let exit_code = if series.is_flat() && numeric_ok { EXIT_OK } else { EXIT_NOT_INTEGRABLE };
    let output = match g.format {
        Format::Json => to_json(&json!({
            "model": m.name,
            "flat": series.is_flat(),
            "series": series,
            "numeric": numeric,
            "tolerance": g.tolerance,
        })),
        Format::Csv => {
            let mut s = String::from("order,position,value\n");
            for r in &series.residuals {
                let _ = writeln!(s, "{},\"{}\",{}", r.order, position(&r.position), join(&r.value));
            }
            s
        }
        Format::Pretty => {
            let mut s = format!("model {}\n", m.name);
            let _ = writeln!(
                s,
                "series through order {}{}: {}",
                series.orders_checked,
                if series.modulo_constraints { " (modulo constraints)" } else { "" },
                match series.first_nonzero_order {
                    None => "flat".to_string(),
                    Some(n) => format!("first nonzero coefficient at order {n}"),
                }
            );
            for (order, count) in residual_summary(&series) {
                let _ = writeln!(s, "  order {order}: {count} nonzero basis pairs");
            }
            if let Some(n) = &numeric {
                let _ = writeln!(s, "numeric: max residual {:.3e} over {} trials (tolerance {:.1e})", n.max_residual, n.trials, g.tolerance);
            }
            s
        }
    };
    Ok(Outcome { output, exit_code, warnings: Vec::new() })
}

fn parse_range(range: &str, step: &str) -> Result<Vec<Rational>> {
    let (lo, hi) = range.split_once(':').ok_or_else(|| Error::Parse(format!("range {range:?} is not lo:hi")))?;
    let (lo, hi, step) = (parse_rational(lo.trim())?, parse_rational(hi.trim())?, parse_rational(step.trim())?);
    if step <= Rational::from_integer(0.into()) || lo > hi {
        return Err(Error::Validation(format!("empty scan range {range} with step {step}")));
    }
    Ok(range_values(&lo, &hi, &step))
}

fn run_scan(g: &GlobalOpts, family: Family, range: &str, step: &str) -> Result<Outcome> {
    let values = parse_range(range, step)?;
    let result: ScanResult = match family {
        Family::GeneralZ2 => scan_general_z2(&lattice(&values, 3), exec(g))?,
        Family::Pcm => scan_pcm(&lattice(&values, 2), exec(g))?,
    };
    let output = match g.format {
        Format::Json => to_json(&result),
        Format::Csv => result.to_csv(),
        Format::Pretty => result.pretty(),
    };
    Ok(Outcome::ok(output))
}

fn run_catalog(g: &GlobalOpts, action: &CatalogAction) -> Result<Outcome> {
    match action {
        CatalogAction::List => Ok(Outcome::ok(match g.format {
            Format::Json => to_json(&MODELS.iter().map(|(n, d)| json!({"name": n, "description": d})).collect::<Vec<Value>>()),
            Format::Csv => MODELS.iter().fold(String::from("name,description\n"), |mut s, (n, d)| {
                let _ = writeln!(s, "\"{n}\",\"{d}\"");
                s
            }),
            Format::Pretty => MODELS.iter().map(|(n, d)| format!("{n:<30} {d}\n")).collect(),
        })),
        CatalogAction::Show { name } => {
            let spec = catalog::builtin(name)?;
            let file = ModelFile::from_spec(&spec);
            let output = match g.format {
                Format::Pretty => {
                    let mut s = format!("{}: {}\nexpected verdict: {}\n", spec.name, spec.notes, spec.expected_verdict);
                    match spec.expected_lax() {
                        Ok(c) => {
                            let _ = writeln!(s, "{}", c.pretty(&spec.algebra));
                        }
                        Err(e) => {
                            let _ = writeln!(s, "{e}");
                        }
                    }
                    s
                }
                _ => format!("{}\n", file.to_json_pretty()),
            };
            Ok(Outcome::ok(output))
        }
    }
}
