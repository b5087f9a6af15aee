//! `prmi`: compute Petz–Rényi mutual informations of bipartite states from
//! JSON files, sweep them over α into CSV, and evaluate exponents and the
//! finite-n hypothesis test.

mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use prmi_core::exponents::{direct_exponent, rate_curve};
use prmi_core::hypothesis::achievability_sweep;
use prmi_core::oracle::brute_force_dd;
use prmi_core::prmi::{prmi_down_down, prmi_up_down, prmi_up_up, Which};
use prmi_core::{BipartiteState, FixedPointConfig, RenyiOrder};
use rayon::prelude::*;
use serde_json::Value;

use crate::input::{parse_input, InputError};
use crate::output::{fmt12, num, Report};

const ALPHA_MAX: f64 = 2.5;

#[derive(Parser, Debug)]
#[command(name = "prmi", version, about = "Petz–Rényi mutual information toolkit")]
struct Cli {
    /// Stopping tolerance of the alternating solver (trace distance).
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 10_000)]
    max_iter: usize,
    /// Solver restarts; default 1 for α ∈ (1/2, 1] and 8 otherwise.
    #[arg(long, global = true)]
    restarts: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print a flat JSON object instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Exit with status 5 when the solver did not converge.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WhichArg {
    Uu,
    Ud,
    Dd,
}

impl From<WhichArg> for Which {
    fn from(w: WhichArg) -> Self {
        match w {
            WhichArg::Uu => Which::UpUp,
            WhichArg::Ud => Which::UpDown,
            WhichArg::Dd => Which::DownDown,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One mutual information at one order.
    Compute {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "dd")]
        which: WhichArg,
    },
    /// All three mutual informations on a uniform α grid, written as CSV.
    Sweep {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        alpha_min: f64,
        #[arg(long, default_value_t = ALPHA_MAX)]
        alpha_max: f64,
        /// Number of grid intervals.
        #[arg(long, default_value_t = 25)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Direct exponent at a rate, optionally with the parametric rate curve.
    Exponent {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        curve: bool,
    },
    /// Finite-n achievability test for n = 1..=n_max.
    Simulate {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        rate: f64,
        #[arg(long, default_value_t = 3)]
        n_max: usize,
    },
    /// Brute-force upper bound on the doubly minimized quantity.
    Oracle {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = prmi_core::oracle::DEFAULT_RESOLUTION)]
        resolution: usize,
    },
}

#[derive(Debug)]
enum CliError {
    Input(InputError),
    Core(prmi_core::Error),
    Usage(String),
    Io(String),
    NotConverged(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(e) => e.exit_code() as u8,
            CliError::NotConverged(_) => 5,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(e) => write!(f, "{e}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "{m}"),
            CliError::NotConverged(m) => write!(f, "solver did not converge: {m}"),
        }
    }
}

impl From<prmi_core::Error> for CliError {
    fn from(e: prmi_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        CliError::Input(e)
    }
}

fn config(cli: &Cli) -> Result<FixedPointConfig, CliError> {
    let cfg = FixedPointConfig {
        tol: cli.tol,
        max_iter: cli.max_iter,
        restarts: cli.restarts,
        seed: cli.seed,
        ..FixedPointConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

/// One evaluated point: value (`inf` when infinite) and solver status.
struct Point {
    value: f64,
    certified: bool,
    converged: bool,
    route: &'static str,
    residual: f64,
    iterations: usize,
}

fn exact_point(value: f64) -> Point {
    Point {
        value,
        certified: true,
        converged: true,
        route: "direct",
        residual: f64::NAN,
        iterations: 0,
    }
}

fn evaluate(state: &BipartiteState, which: Which, alpha: f64, cfg: &FixedPointConfig) -> Result<Point, prmi_core::Error> {
    let order = RenyiOrder::new(alpha)?;
    Ok(match which {
        Which::UpUp => exact_point(prmi_up_up(state, order)?.to_f64()),
        Which::UpDown => exact_point(prmi_up_down(state, order)?.0.to_f64()),
        Which::DownDown => {
            let sol = prmi_down_down(state, order, cfg)?;
            Point {
                value: sol.value,
                certified: sol.certified,
                converged: sol.converged,
                route: route_name(sol.route),
                residual: sol.residual,
                iterations: sol.iterations,
            }
        }
    })
}

fn route_name(r: prmi_core::prmi::SolverRoute) -> &'static str {
    use prmi_core::prmi::SolverRoute::*;
    match r {
        Iterative => "iterative",
        RelativeEntropy => "relative-entropy",
        Product => "product",
        ClosedForm => "closed-form",
        Oracle => "oracle",
    }
}

fn which_name(w: Which) -> &'static str {
    match w {
        Which::UpUp => "uu",
        Which::UpDown => "ud",
        Which::DownDown => "dd",
    }
}

/// `alpha_min + k (alpha_max − alpha_min)/steps`, rounded to the printed
/// precision so that the CSV column parses back to the same value.
fn alpha_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if !(0.0..=ALPHA_MAX).contains(&min) || !(0.0..=ALPHA_MAX).contains(&max) || min > max {
        return Err(CliError::Usage(format!(
            "α grid must satisfy 0 ≤ alpha-min ≤ alpha-max ≤ {ALPHA_MAX}"
        )));
    }
    if steps == 0 {
        return Ok(vec![fmt12(min).parse().expect("formatted float parses")]);
    }
    Ok((0..=steps)
        .map(|k| {
            let a = min + (max - min) * k as f64 / steps as f64;
            fmt12(a).parse().expect("formatted float parses")
        })
        .collect())
}

struct SweepRow {
    alpha: f64,
    rmi: [f64; 3],
    certified: bool,
    converged: bool,
}

fn sweep_point(state: &BipartiteState, alpha: f64, cfg: &FixedPointConfig) -> Result<SweepRow, prmi_core::Error> {
    let uu = evaluate(state, Which::UpUp, alpha, cfg)?;
    let ud = evaluate(state, Which::UpDown, alpha, cfg)?;
    let (dd, certified, converged) = match evaluate(state, Which::DownDown, alpha, cfg) {
        Ok(p) => (p.value, p.certified, p.converged),
        Err(prmi_core::Error::UnsupportedRegime(_)) | Err(prmi_core::Error::NumericalDegradation(_)) => {
            (f64::NAN, false, true)
        }
        Err(e) => return Err(e),
    };
    Ok(SweepRow {
        alpha,
        rmi: [uu.value, ud.value, dd],
        certified,
        converged,
    })
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let cfg = config(cli)?;
    match &cli.command {
        Command::Compute { state, alpha, which } => {
            let s = parse_input(state)?;
            let which: Which = (*which).into();
            let p = evaluate(&s, which, *alpha, &cfg)?;
            if cli.strict && !p.converged {
                return Err(CliError::NotConverged(format!("α = {alpha}")));
            }
            let mut r = Report::new();
            r.push("which", Value::from(which_name(which)));
            r.push("alpha", num(*alpha));
            r.push_text("value", num(p.value), fmt12(p.value));
            r.push("certified", Value::from(p.certified));
            r.push("converged", Value::from(p.converged));
            r.push("route", Value::from(p.route));
            r.push("residual", num(p.residual));
            r.push("iterations", Value::from(p.iterations));
            Ok(r)
        }
        Command::Sweep {
            state,
            alpha_min,
            alpha_max,
            steps,
            out,
        } => {
            let s = parse_input(state)?;
            let grid = alpha_grid(*alpha_min, *alpha_max, *steps)?;
            let rows = grid
                .par_iter()
                .map(|&a| sweep_point(&s, a, &cfg))
                .collect::<Result<Vec<_>, _>>()?;
            let mut csv = String::from("alpha,rmi0,rmi1,rmi2,certified\n");
            for row in &rows {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt12(row.alpha),
                    fmt12(row.rmi[0]),
                    fmt12(row.rmi[1]),
                    fmt12(row.rmi[2]),
                    u8::from(row.certified)
                ));
            }
            std::fs::write(out, csv).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
            if cli.strict {
                if let Some(bad) = rows.iter().find(|r| !r.converged) {
                    return Err(CliError::NotConverged(format!("α = {}", bad.alpha)));
                }
            }
            let mut r = Report::new();
            r.push("out", Value::from(out.display().to_string()));
            r.push("points", Value::from(rows.len()));
            r.push("certified", Value::from(rows.iter().filter(|x| x.certified).count()));
            Ok(r)
        }
        Command::Exponent { state, rate, curve } => {
            let s = parse_input(state)?;
            let rep = direct_exponent(&s, *rate, &cfg)?;
            let mut r = Report::new();
            r.push("rate_r", num(rep.rate_r));
            r.push("s_star", num(rep.s_star));
            r.push("exponent", num(rep.exponent));
            r.push("r_half", num(rep.r_half));
            r.push("mutual_info", num(rep.mutual_info));
            r.push("in_scope", Value::from(rep.in_scope));
            if *curve {
                let grid: Vec<f64> = (1..=10).map(|k| 0.5 + 0.05 * k as f64).collect();
                let pts = rate_curve(&s, &grid, &cfg)?;
                let arr = pts
                    .iter()
                    .map(|p| serde_json::json!({"s": num(p.s), "rate": num(p.rate), "exponent": num(p.exponent)}))
                    .collect();
                r.push("curve", Value::Array(arr));
            }
            Ok(r)
        }
        Command::Simulate { state, rate, n_max } => {
            let s = parse_input(state)?;
            let rep = achievability_sweep(&s, *rate, *n_max, &cfg)?;
            let mut r = Report::new();
            r.push("rate_r", num(rep.rate_r));
            r.push("target", num(rep.target));
            let rows = rep
                .rows
                .iter()
                .map(|x| {
                    serde_json::json!({
                        "n": x.n,
                        "s": num(x.s_best),
                        "exponent": num(x.exponent),
                        "type_one": num(x.errors.type_one),
                        "type_two_bound": num(x.errors.type_two_bound),
                        "alpha_qn_bound": num(x.errors.alpha_qn_bound),
                    })
                })
                .collect();
            r.push("rows", Value::Array(rows));
            Ok(r)
        }
        Command::Oracle {
            state,
            alpha,
            resolution,
        } => {
            let s = parse_input(state)?;
            let res = brute_force_dd(&s, *alpha, *resolution)?;
            let mut r = Report::new();
            r.push("alpha", num(*alpha));
            r.push_text("value", num(res.value), fmt12(res.value));
            r.push("evaluations", Value::from(res.evaluations));
            r.push("resolution", Value::from(*resolution));
            Ok(r)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(report) => {
            print!("{}", if cli.json { report.to_json() } else { report.to_text() });
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
