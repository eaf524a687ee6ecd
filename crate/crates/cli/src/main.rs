//! `codiff`: run, certify and compare codifferential descent methods.
//!
//! Machine output goes to stdout (or `--out`), progress to stderr.
//! Exit codes: 0 success, 1 certificate rejected or check failed,
//! 2 unbounded below, 3 iteration limit, 4 input error.

mod example;
mod problem;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use codiff::convex::ConvexFn;
use codiff::generate::GenSpec;
use codiff::mgcd::{check_global_opt, default_tol, mcd_run, mgcd_run, GlobalRun, McdConfig, MgcdConfig, RunStatus};
use codiff::mhd::{mhd_run, MhdConfig, MhdStatus, MhdTrace};
use codiff::oracle::{pa_global_min, LpOutcome};
use codiff::DcForm;
use problem::{parse_gen, parse_point, Point, Problem, SourceOptions};

const EXIT_REJECTED: u8 = 1;
const EXIT_UNBOUNDED: u8 = 2;
const EXIT_ITER_LIMIT: u8 = 3;
const EXIT_INPUT: u8 = 4;

/// Relative gap allowed between a certified minimum and the LP oracle.
const VERIFY_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "codiff", version, about = "Codifferential descent for nonsmooth and piecewise-affine minimisation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Hypodifferential descent; needs a convex form (one minus piece)
    Mhd,
    /// Classical codifferential descent with exact line search
    Mcd,
    /// Global codifferential descent
    Mgcd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CertFormat {
    Text,
    Json,
}

#[derive(Debug, clap::Args)]
struct SolverOptions {
    /// Certificate tolerance for MGCD/MCD [default: 1e-9 max(1, |f(x0)|)]; stopping norm for MHD [default: 1e-8]
    #[arg(long)]
    tol: Option<f64>,

    /// Iteration cap [default: 1000 for MGCD/MCD, 10000 for MHD]
    #[arg(long)]
    max_iter: Option<usize>,

    /// MCD only: examine pieces whose hyperdifferential offset is at most MU
    #[arg(long, default_value_t = f64::INFINITY)]
    mu: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimise one problem and emit the trace
    Solve {
        #[arg(long, value_enum, default_value_t = Method::Mgcd)]
        method: Method,
        #[command(flatten)]
        source: SourceOptions,
        #[command(flatten)]
        solver: SolverOptions,
        /// Write the trace here instead of stdout
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Evaluate the global optimality certificate at a point
    Certify {
        #[command(flatten)]
        source: SourceOptions,
        /// Point to certify [default: the starting point]
        #[arg(long, value_name = "X1,X2,..", value_parser = parse_point, allow_hyphen_values = true)]
        point: Option<Point>,
        /// Threshold below which a_j counts as negative [default: 1e-9 max(1, |f(point)|)]
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value_t = CertFormat::Text)]
        format: CertFormat,
    },
    /// Run several methods on one problem and print a CSV summary
    Compare {
        #[command(flatten)]
        source: SourceOptions,
        #[command(flatten)]
        solver: SolverOptions,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "mgcd,mcd,mhd")]
        methods: Vec<Method>,
    },
    /// Replay the two-basin example and check every intermediate value
    ReproduceExample,
    /// Write a random bounded-below instance as JSON
    Generate {
        #[arg(value_name = "D,L,S,SEED", value_parser = parse_gen)]
        spec: GenSpec,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Input(String),
    Solver(String),
}

impl From<codiff::Error> for Failure {
    fn from(e: codiff::Error) -> Self {
        use codiff::Error::*;
        match e {
            NonFinite | EmptySet | DimensionMismatch { .. } | UnknownDimension | SizeOverflow { .. }
            | IndexOutOfRange { .. } | InvalidParameter(_) => Failure::Input(e.to_string()),
            _ => Failure::Solver(e.to_string()),
        }
    }
}

type Outcome = Result<u8, Failure>;

enum Trace {
    Global(GlobalRun),
    Mhd(MhdTrace),
}

impl Trace {
    fn iterations(&self) -> usize {
        match self {
            Trace::Global(r) => r.iterations(),
            Trace::Mhd(t) => t.iterations(),
        }
    }

    fn final_value(&self) -> f64 {
        match self {
            Trace::Global(r) => r.final_value(),
            Trace::Mhd(t) => t.final_value(),
        }
    }

    fn status(&self) -> &'static str {
        match self {
            Trace::Global(r) => r.status.name(),
            Trace::Mhd(t) => match t.status {
                MhdStatus::Stationary => "Stationary",
                MhdStatus::IterLimit => "IterLimit",
            },
        }
    }

    fn render(&self, format: Format) -> Result<String, Failure> {
        let text = match (self, format) {
            (Trace::Global(r), Format::Json) => serde_json::to_string_pretty(r).map_err(|e| Failure::Solver(e.to_string()))?,
            (Trace::Mhd(t), Format::Json) => serde_json::to_string_pretty(t).map_err(|e| Failure::Solver(e.to_string()))?,
            (Trace::Global(r), Format::Csv) => r.to_csv()?,
            (Trace::Mhd(t), Format::Csv) => t.to_csv()?,
        };
        Ok(text)
    }
}

fn run_method(method: Method, p: &Problem, opts: &SolverOptions) -> Result<Trace, Failure> {
    Ok(match method {
        Method::Mgcd => {
            let cfg = MgcdConfig { tol: opts.tol, max_iter: opts.max_iter.unwrap_or(1000), verify_discards: false };
            Trace::Global(mgcd_run(&p.f, &p.x0, &cfg)?)
        }
        Method::Mcd => {
            let cfg = McdConfig { mu: opts.mu, tol: opts.tol, max_iter: opts.max_iter.unwrap_or(1000) };
            Trace::Global(mcd_run(&p.f, &p.x0, &cfg)?)
        }
        Method::Mhd => {
            let g = ConvexFn::from_convex_dc(&p.f)?;
            let defaults = MhdConfig::default();
            let cfg = MhdConfig {
                stop_tol: opts.tol.unwrap_or(defaults.stop_tol),
                max_iter: opts.max_iter.unwrap_or(defaults.max_iter),
                ..defaults
            };
            Trace::Mhd(mhd_run(&g, &p.x0, &cfg)?)
        }
    })
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{}", text.trim_end()).map_err(|e| Failure::Solver(e.to_string()))
        }
    }
}

fn oracle_value(f: &DcForm) -> Result<Option<f64>, Failure> {
    Ok(match pa_global_min(f)? {
        LpOutcome::Bounded { value, .. } => Some(value),
        LpOutcome::UnboundedBelow { .. } => None,
    })
}

fn solve(method: Method, source: &SourceOptions, opts: &SolverOptions, out: Option<&Path>, format: Format) -> Outcome {
    let p = source.load().map_err(Failure::Input)?;
    eprintln!("{}: {:?} from {}", p.label, method, fmt_point(&p.x0));
    let trace = run_method(method, &p, opts)?;
    eprintln!("{} after {} iterations, f = {:?}", trace.status(), trace.iterations(), trace.final_value());
    emit(&trace.render(format)?, out)?;
    match &trace {
        Trace::Global(run) => match run.status {
            RunStatus::GlobalMin { .. } => {
                let fstar = oracle_value(&p.f)?;
                match fstar {
                    Some(v) if (run.final_value() - v).abs() <= VERIFY_TOL * v.abs().max(1.0) => {
                        eprintln!("oracle agrees: f* = {v:?}");
                        Ok(0)
                    }
                    other => {
                        eprintln!("error: certified minimum disagrees with the LP oracle ({other:?})");
                        Ok(EXIT_REJECTED)
                    }
                }
            }
            RunStatus::UnboundedBelow { .. } => Ok(EXIT_UNBOUNDED),
            RunStatus::Stationary => Ok(0),
            RunStatus::IterLimit => Ok(EXIT_ITER_LIMIT),
        },
        Trace::Mhd(t) => match t.status {
            MhdStatus::Stationary => Ok(0),
            MhdStatus::IterLimit => Ok(EXIT_ITER_LIMIT),
        },
    }
}

fn fmt_point(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v:?}")).collect();
    format!("({})", parts.join(", "))
}

fn certify(source: &SourceOptions, point: Option<&[f64]>, tol: Option<f64>, format: CertFormat) -> Outcome {
    let p = source.load().map_err(Failure::Input)?;
    let x = point.unwrap_or(&p.x0);
    let fx = p.f.eval(x)?;
    let cert = check_global_opt(&p.f, x, tol.unwrap_or_else(|| default_tol(fx)))?;
    let text = match format {
        CertFormat::Json => serde_json::to_string_pretty(&cert).map_err(|e| Failure::Solver(e.to_string()))?,
        CertFormat::Text => {
            let mut lines = vec![format!("point {} f = {fx:?} tol = {:?}", fmt_point(x), cert.tol)];
            lines.extend(cert.a.iter().enumerate().map(|(j, a)| format!("a_{j} = {a:?}")));
            lines.push(if cert.is_global { "GLOBAL" } else { "NOT GLOBAL" }.to_string());
            lines.join("\n")
        }
    };
    emit(&text, None)?;
    Ok(if cert.is_global { 0 } else { EXIT_REJECTED })
}

fn compare(source: &SourceOptions, opts: &SolverOptions, methods: &[Method]) -> Outcome {
    let p = source.load().map_err(Failure::Input)?;
    let fstar = oracle_value(&p.f)?;
    let mut lines = vec!["method,status,iterations,final_value,wall_time_s,oracle_gap".to_string()];
    for &m in methods {
        if m == Method::Mhd && !p.f.is_convex_form() {
            eprintln!("skipping mhd: the form has {} minus pieces", p.f.minus().len());
            continue;
        }
        let start = Instant::now();
        let trace = run_method(m, &p, opts)?;
        let wall = start.elapsed().as_secs_f64();
        let gap = fstar.map_or(String::new(), |v| format!("{:?}", trace.final_value() - v));
        let name = format!("{m:?}").to_lowercase();
        eprintln!("{name}: {} in {} iterations", trace.status(), trace.iterations());
        lines.push(format!("{name},{},{},{:?},{wall:?},{gap}", trace.status(), trace.iterations(), trace.final_value()));
    }
    emit(&lines.join("\n"), None)?;
    Ok(0)
}

fn reproduce() -> Outcome {
    let checks = example::run()?;
    let mut stdout = std::io::stdout().lock();
    for c in &checks {
        writeln!(stdout, "{} {}", if c.ok { "ok  " } else { "FAIL" }, c.line).map_err(|e| Failure::Solver(e.to_string()))?;
    }
    Ok(if checks.iter().all(|c| c.ok) { 0 } else { EXIT_REJECTED })
}

fn generate(spec: &GenSpec, scale: f64, out: Option<&Path>) -> Outcome {
    let spec = GenSpec { scale, ..spec.clone() };
    let f = spec.generate()?;
    eprintln!("starting point {}", fmt_point(&spec.start()));
    emit(&serde_json::to_string_pretty(&f).map_err(|e| Failure::Solver(e.to_string()))?, out)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Solve { method, source, solver, out, format } => solve(*method, source, solver, out.as_deref(), *format),
        Command::Certify { source, point, tol, format } => certify(source, point.as_ref().map(|p| p.0.as_slice()), *tol, *format),
        Command::Compare { source, solver, methods } => compare(source, solver, methods),
        Command::ReproduceExample => reproduce(),
        Command::Generate { spec, scale, out } => generate(spec, *scale, out.as_deref()),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_REJECTED)
        }
    }
}
