//! Command-line front end: apply operators to CSV-sampled grid functions,
//! run the identity and summation-by-parts suites, and solve quadratic
//! fractional variational problems.
//!
//! Exit codes: 0 on success (all checks passing), 1 when a verification
//! fails, 2 on I/O, parse, or domain errors.

use std::fs;
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::rational::BigRational;

use dfcalc::byparts::{sbp, SbpTheorem};
use dfcalc::error::{Error, Result};
use dfcalc::grid::{read_csv, write_csv, Grid, GridFunction};
use dfcalc::identities::{
    default_alpha_ratios, default_functions, default_windows, run_suite, IdentityId,
    SuiteFunction,
};
use dfcalc::kernels::FracOrder;
use dfcalc::operators::{parse_operator_name, OperatorSpec, Side};
use dfcalc::scalar::{parse_big_rational, Scalar};
use dfcalc::tolerances::FLOAT_IDENTITY_TOL;
use dfcalc::variational::{
    el_residual, functional_value, solve_quadratic, Boundary, Lagrangian, Variant,
    VariationalProblem,
};

#[derive(Parser)]
#[command(
    name = "dfcalc",
    about = "Discrete fractional calculus: operators, identity verification, \
             summation by parts, and variational solving on integer-step grids",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    /// Exact rational arithmetic (orders and data must be rational).
    Exact,
    /// IEEE double arithmetic (any real order).
    Float,
}

#[derive(Subcommand)]
enum Command {
    /// Apply one fractional operator to a `t,value` CSV and write the
    /// result (the output grid is shifted per the operator's domain law).
    Apply(ApplyArgs),
    /// Run the identity suite and emit a JSON report.
    Verify(VerifyArgs),
    /// Evaluate the four summation-by-parts theorems on two CSV functions.
    Sbp(SbpArgs),
    /// Solve a quadratic fractional variational problem from a JSON
    /// description.
    ElSolve(ElSolveArgs),
}

#[derive(Args)]
struct ApplyArgs {
    /// Operator name: {delta|nabla}-{left|right}-{sum|rl|caputo}.
    #[arg(long)]
    op: String,
    /// Order alpha as `p/q` or a decimal.
    #[arg(long)]
    alpha: String,
    #[arg(long, value_enum, default_value = "exact")]
    backend: BackendArg,
    /// Left anchor (defaults to the input's lowest point).
    #[arg(long)]
    a: Option<String>,
    /// Right anchor (defaults to the input's highest point).
    #[arg(long)]
    b: Option<String>,
    /// Input CSV (`t,value` with a header).
    #[arg(long)]
    input: PathBuf,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the operator's dense matrix (row-major CSV) here.
    #[arg(long)]
    matrix: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "exact")]
    backend: BackendArg,
    /// Orders to sweep; defaults to 1/3, 1/2, 2/3, 5/4, 3/2.
    #[arg(long)]
    alpha: Vec<String>,
    /// Window base point.
    #[arg(long, default_value = "0")]
    a: String,
    /// Window top point(s); defaults to windows of 5..=16 points from `a`.
    #[arg(long)]
    b: Vec<String>,
    /// Identity ids to check; defaults to the full catalog.
    #[arg(long)]
    identity: Vec<String>,
    /// Order parameter for the p-indexed identities.
    #[arg(long, default_value_t = 2)]
    p: u32,
    /// Scaled float tolerance override.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Seed of the pseudo-random rational test function.
    #[arg(long, default_value_t = 0x5eed_2026)]
    seed: u64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SbpArgs {
    /// Orders in (0, 1); defaults to 1/4, 1/3, 1/2, 2/3, 3/4.
    #[arg(long)]
    alpha: Vec<String>,
    /// CSV for the first factor f.
    #[arg(long)]
    f: PathBuf,
    /// CSV for the second factor g.
    #[arg(long)]
    g: PathBuf,
    /// Theorems to run; defaults to all four.
    #[arg(long)]
    theorem: Vec<String>,
    #[arg(long, value_enum, default_value = "exact")]
    backend: BackendArg,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ElSolveArgs {
    /// Problem description JSON.
    #[arg(long)]
    problem: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    backend: BackendArg,
    /// Solution CSV path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Residual report JSON path.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Apply(args) => run_apply(args),
        Command::Verify(args) => run_verify(args),
        Command::Sbp(args) => run_sbp(args),
        Command::ElSolve(args) => run_el_solve(args),
    };
    match outcome {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("dfcalc: error: {e}");
            ExitCode::from(2)
        }
    }
}

fn order_from_text<S: Scalar>(text: &str) -> Result<FracOrder<S>> {
    FracOrder::from_exact(parse_big_rational(text)?)
}

fn open_csv<S: Scalar>(path: &PathBuf) -> Result<GridFunction<S>> {
    let file =
        fs::File::open(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    read_csv(BufReader::new(file))
}

fn emit(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            fs::write(p, content).map_err(|e| Error::Parse(format!("writing {}: {e}", p.display())))
        }
        None => {
            print!("{content}");
            std::io::stdout()
                .flush()
                .map_err(|e| Error::Parse(format!("stdout: {e}")))
        }
    }
}

fn run_apply(args: ApplyArgs) -> Result<bool> {
    match args.backend {
        BackendArg::Exact => apply_impl::<BigRational>(&args),
        BackendArg::Float => apply_impl::<f64>(&args),
    }
}

fn apply_impl<S: Scalar>(args: &ApplyArgs) -> Result<bool> {
    let (direction, side, flavor) = parse_operator_name(&args.op)?;
    let f = open_csv::<S>(&args.input)?;
    let anchor = match side {
        Side::Left => match &args.a {
            Some(text) => parse_big_rational(text)?,
            None => f.grid().base().clone(),
        },
        Side::Right => match &args.b {
            Some(text) => parse_big_rational(text)?,
            None => f.grid().top(),
        },
    };
    let spec = OperatorSpec::new(
        direction,
        side,
        flavor,
        order_from_text::<S>(&args.alpha)?,
        anchor,
    );
    let out = spec.apply(&f)?;
    let mut buf = Vec::new();
    write_csv(&out, &mut buf).map_err(|e| Error::Parse(format!("serializing output: {e}")))?;
    emit(&args.output, &String::from_utf8(buf).expect("CSV is ASCII"))?;
    if let Some(matrix_path) = &args.matrix {
        let m = spec.matrix(f.grid())?;
        fs::write(matrix_path, m.to_csv())
            .map_err(|e| Error::Parse(format!("writing {}: {e}", matrix_path.display())))?;
    }
    Ok(true)
}

fn run_verify(args: VerifyArgs) -> Result<bool> {
    match args.backend {
        BackendArg::Exact => verify_impl::<BigRational>(&args),
        BackendArg::Float => verify_impl::<f64>(&args),
    }
}

fn verify_impl<S: Scalar>(args: &VerifyArgs) -> Result<bool> {
    let tol = args.tolerance.unwrap_or(FLOAT_IDENTITY_TOL);
    let alphas: Vec<FracOrder<S>> = if args.alpha.is_empty() {
        default_alpha_ratios()
            .into_iter()
            .map(|(n, d)| FracOrder::from_ratio(n, d))
            .collect::<Result<_>>()?
    } else {
        args.alpha
            .iter()
            .map(|t| order_from_text::<S>(t))
            .collect::<Result<_>>()?
    };
    let base = parse_big_rational(&args.a)?;
    let grids: Vec<Grid> = if args.b.is_empty() {
        default_windows()
            .into_iter()
            .map(|g| Grid::new(&base + g.base(), g.count()))
            .collect()
    } else {
        args.b
            .iter()
            .map(|text| {
                let top = parse_big_rational(text)?;
                let span = &top - &base;
                if !span.is_integer() || span < BigRational::from_integer(1.into()) {
                    return Err(Error::Parse(format!(
                        "window [{base}, {top}] is not a positive integer span"
                    )));
                }
                let count = num::traits::ToPrimitive::to_usize(&span.to_integer())
                    .ok_or_else(|| Error::Parse("window too large".into()))?
                    + 1;
                Ok(Grid::new(base.clone(), count))
            })
            .collect::<Result<_>>()?
    };
    let identities: Vec<IdentityId> = if args.identity.is_empty() {
        IdentityId::ALL.to_vec()
    } else {
        args.identity
            .iter()
            .map(|s| IdentityId::parse(s))
            .collect::<Result<_>>()?
    };
    let mut functions = default_functions();
    for f in &mut functions {
        if let SuiteFunction::RandomRational(seed) = f {
            *seed = args.seed;
        }
    }

    let reports = run_suite(&functions, &alphas, &grids, args.p, tol, &identities)?;
    let pass = reports.iter().all(|r| r.pass);
    let json = serde_json::json!({
        "backend": S::BACKEND.as_str(),
        "tolerance": if S::BACKEND == dfcalc::Backend::Float { Some(tol) } else { None },
        "pass": pass,
        "checks": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
    });
    emit(&args.output, &format!("{:#}\n", json))?;
    Ok(pass)
}

fn run_sbp(args: SbpArgs) -> Result<bool> {
    match args.backend {
        BackendArg::Exact => sbp_impl::<BigRational>(&args),
        BackendArg::Float => sbp_impl::<f64>(&args),
    }
}

fn sbp_impl<S: Scalar>(args: &SbpArgs) -> Result<bool> {
    let tol = args.tolerance.unwrap_or(FLOAT_IDENTITY_TOL);
    let alphas: Vec<FracOrder<S>> = if args.alpha.is_empty() {
        [(1i64, 4i64), (1, 3), (1, 2), (2, 3), (3, 4)]
            .into_iter()
            .map(|(n, d)| FracOrder::from_ratio(n, d))
            .collect::<Result<_>>()?
    } else {
        args.alpha
            .iter()
            .map(|t| order_from_text::<S>(t))
            .collect::<Result<_>>()?
    };
    let theorems: Vec<SbpTheorem> = if args.theorem.is_empty() {
        SbpTheorem::ALL.to_vec()
    } else {
        args.theorem
            .iter()
            .map(|s| SbpTheorem::parse(s))
            .collect::<Result<_>>()?
    };
    let f = open_csv::<S>(&args.f)?;
    let g = open_csv::<S>(&args.g)?;
    let mut rows = Vec::new();
    let mut pass = true;
    for theorem in &theorems {
        for alpha in &alphas {
            let report = sbp(*theorem, &f, &g, alpha)?;
            let dev = report.deviation();
            let ok = match S::BACKEND {
                dfcalc::Backend::Exact => num::traits::Zero::is_zero(&dev),
                dfcalc::Backend::Float => {
                    let scale = report.lhs.to_f64().abs().max(1.0);
                    dev.to_f64() / scale <= tol
                }
            };
            pass &= ok;
            let mut row = report.to_json();
            row["alpha"] = alpha.alpha().json_value();
            row["pass"] = ok.into();
            rows.push(row);
        }
    }
    let json = serde_json::json!({
        "backend": S::BACKEND.as_str(),
        "pass": pass,
        "reports": rows,
    });
    emit(&args.output, &format!("{:#}\n", json))?;
    Ok(pass)
}

fn run_el_solve(args: ElSolveArgs) -> Result<bool> {
    match args.backend {
        BackendArg::Exact => el_solve_impl::<BigRational>(&args),
        BackendArg::Float => el_solve_impl::<f64>(&args),
    }
}

#[derive(serde::Deserialize)]
struct ProblemJson {
    variant: String,
    alpha: serde_json::Value,
    a: serde_json::Value,
    b: serde_json::Value,
    lagrangian: LagrangianJson,
    boundary: BoundaryJson,
}

#[derive(serde::Deserialize)]
struct LagrangianJson {
    form: String,
    #[serde(default)]
    g: Vec<serde_json::Value>,
    #[serde(default)]
    name: Option<String>,
}

#[derive(serde::Deserialize)]
struct BoundaryJson {
    kind: String,
    #[serde(default)]
    value: Option<serde_json::Value>,
    #[serde(default)]
    c: Option<serde_json::Value>,
    #[serde(default)]
    d: Option<serde_json::Value>,
}

fn json_to_rational(v: &serde_json::Value) -> Result<BigRational> {
    match v {
        serde_json::Value::String(s) => parse_big_rational(s),
        serde_json::Value::Number(n) => {
            let f = n
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("non-finite number {n}")))?;
            BigRational::from_float(f).ok_or_else(|| Error::Parse(format!("non-finite {f}")))
        }
        other => Err(Error::Parse(format!(
            "expected a number or string, got {other}"
        ))),
    }
}

fn json_to_scalar<S: Scalar>(v: &serde_json::Value) -> Result<S> {
    Ok(S::from_exact(&json_to_rational(v)?))
}

fn el_solve_impl<S: Scalar>(args: &ElSolveArgs) -> Result<bool> {
    let text = fs::read_to_string(&args.problem)
        .map_err(|e| Error::Parse(format!("{}: {e}", args.problem.display())))?;
    let spec: ProblemJson =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("problem JSON: {e}")))?;
    let variant = Variant::parse(&spec.variant)?;
    let alpha = FracOrder::<S>::from_exact(json_to_rational(&spec.alpha)?)?;
    let a = json_to_rational(&spec.a)?;
    let b = json_to_rational(&spec.b)?;
    let span = &b - &a;
    if !span.is_integer() || span < BigRational::from_integer(1.into()) {
        return Err(Error::Parse(format!(
            "window [{a}, {b}] is not a positive integer span"
        )));
    }
    let count = num::traits::ToPrimitive::to_usize(&span.to_integer())
        .ok_or_else(|| Error::Parse("window too large".into()))?
        + 1;
    let window = Grid::new(a.clone(), count);
    let lag_grid = Grid::new(&a + BigRational::from_integer(1.into()), count - 2);

    let g = match spec.lagrangian.form.as_str() {
        "quadratic" => {
            if spec.lagrangian.g.len() != lag_grid.count() {
                return Err(Error::Parse(format!(
                    "quadratic data has {} values; the window needs {}",
                    spec.lagrangian.g.len(),
                    lag_grid.count()
                )));
            }
            let values = spec
                .lagrangian
                .g
                .iter()
                .map(json_to_scalar::<S>)
                .collect::<Result<Vec<_>>>()?;
            GridFunction::new(lag_grid, values)?
        }
        "builtin" => match spec.lagrangian.name.as_deref() {
            Some("half-v-squared") => GridFunction::constant(lag_grid, S::zero()),
            other => {
                return Err(Error::Parse(format!(
                    "unknown builtin Lagrangian {other:?} (try \"half-v-squared\")"
                )))
            }
        },
        other => return Err(Error::Parse(format!("unknown Lagrangian form {other:?}"))),
    };
    let boundary = match spec.boundary.kind.as_str() {
        "free" => Boundary::Free,
        "rl-fixed" => Boundary::RlFixed(json_to_scalar::<S>(
            spec.boundary
                .value
                .as_ref()
                .ok_or_else(|| Error::Parse("rl-fixed boundary needs `value`".into()))?,
        )?),
        "fixed" => Boundary::Fixed {
            c: json_to_scalar::<S>(
                spec.boundary
                    .c
                    .as_ref()
                    .ok_or_else(|| Error::Parse("fixed boundary needs `c`".into()))?,
            )?,
            d: json_to_scalar::<S>(
                spec.boundary
                    .d
                    .as_ref()
                    .ok_or_else(|| Error::Parse("fixed boundary needs `d`".into()))?,
            )?,
        },
        "natural" => Boundary::Natural,
        other => return Err(Error::Parse(format!("unknown boundary kind {other:?}"))),
    };

    let problem =
        VariationalProblem::new(Lagrangian::quadratic(variant, g), window, alpha, boundary)?;
    let solution = solve_quadratic(&problem)?;
    let residual = el_residual(&problem, &solution)?;
    let j = functional_value(&problem, &solution)?;

    let mut buf = Vec::new();
    write_csv(&solution, &mut buf).map_err(|e| Error::Parse(format!("serializing: {e}")))?;
    emit(&args.output, &String::from_utf8(buf).expect("CSV is ASCII"))?;

    if let Some(report_path) = &args.report {
        let residual_max = residual
            .values()
            .iter()
            .fold(0.0f64, |m, v| m.max(v.to_f64().abs()));
        let report = serde_json::json!({
            "variant": variant.as_str(),
            "alpha": problem.alpha().alpha().json_value(),
            "backend": S::BACKEND.as_str(),
            "j_value": j.json_value(),
            "residual_max": residual_max,
            "residuals": residual.values().iter().map(|v| v.json_value()).collect::<Vec<_>>(),
        });
        fs::write(report_path, format!("{:#}\n", report))
            .map_err(|e| Error::Parse(format!("writing {}: {e}", report_path.display())))?;
    }
    Ok(true)
}
