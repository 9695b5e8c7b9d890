use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use inclusion_forge::figures;
use inclusion_forge::io::{self, CaseConfig};
use inclusion_forge::model::validate;
use inclusion_forge::{solve_with_overrides, Error};

const EXIT_INVALID: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICS: u8 = 3;

#[derive(Parser)]
#[command(name = "inclusion-forge", version, about = "Profiles of uniformly stressed antiplane inclusions from slit maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one case and write its contours and diagnostics.
    Solve(SolveArgs),
    /// Check a case file without solving it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-run every bundled figure configuration.
    ReproduceFigures {
        #[arg(long, default_value = "figures-out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    config: PathBuf,
    /// Contour CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Diagnostics JSON output.
    #[arg(long)]
    diag: Option<PathBuf>,
    /// Quadrature nodes per slit (also the default Chebyshev order).
    #[arg(long)]
    nodes: Option<usize>,
    /// Contour points per bank.
    #[arg(long)]
    points: Option<usize>,
    /// Comma-separated a_j replacing the solved values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    override_a: Option<Vec<f64>>,
    /// Comma-separated rho_j replacing the solved values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    override_rho: Option<Vec<f64>>,
}

/// A failure tagged with its exit status.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_input_error() { EXIT_INPUT } else { EXIT_NUMERICS };
        Failure { code, error: e.into() }
    }
}

fn input(error: anyhow::Error) -> Failure {
    Failure { code: EXIT_INPUT, error }
}

fn numerics(error: anyhow::Error) -> Failure {
    Failure { code: EXIT_NUMERICS, error }
}

fn load(path: &Path) -> Result<CaseConfig, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(input)?;
    io::parse_config(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(input)
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(numerics)
}

fn run_solve(args: SolveArgs) -> Result<u8, Failure> {
    let mut cfg = load(&args.config)?;
    if let Some(n) = args.nodes {
        cfg.numerics.nodes = Some(n);
    }
    if let Some(p) = args.points {
        cfg.numerics.points = Some(p);
    }
    let (mut problem, mut overrides) = cfg.to_problem()?;
    if let Some(t) = io::tol_from_env()? {
        problem.numerics.tol_solve = t;
    }
    if args.override_a.is_some() {
        overrides.a = args.override_a;
    }
    if args.override_rho.is_some() {
        overrides.rho = args.override_rho;
    }
    let result = solve_with_overrides(&problem, &overrides)?;

    let title = cfg.name.clone().unwrap_or_else(|| args.config.display().to_string());
    if let Some(p) = &args.out {
        write(p, &io::contours_csv(&result))?;
    }
    if let Some(p) = &args.svg {
        write(p, &io::render_svg(&result, &title))?;
    }
    if let Some(p) = &args.diag {
        let json = serde_json::to_string_pretty(&result.diagnostics)
            .context("serializing diagnostics")
            .map_err(numerics)?;
        write(p, &(json + "\n"))?;
    }

    let d = &result.diagnostics;
    println!("{title}: {} ({} contours)", d.verdict, result.profiles.len());
    println!("  a   = {:?}", d.a);
    println!("  rho = {:?}", d.rho);
    println!(
        "  boundedness {:.3e}  schwarz {:.3e} / {:.3e}  truncation {:.3e}",
        d.boundedness_max, d.schwarz_first_max, d.schwarz_second_max, d.truncation_ratio
    );
    for r in &d.reasons {
        println!("  - {r}");
    }
    for w in &d.warnings {
        eprintln!("warning: {w}");
    }
    Ok(if d.verdict.is_valid() { 0 } else { EXIT_INVALID })
}

fn run_validate(config: &Path) -> Result<u8, Failure> {
    let cfg = load(config)?;
    let (problem, _) = cfg.to_problem()?;
    let mut report = validate(&problem.cfg, &problem.loading, &problem.materials);
    report.violations.extend(problem.numerics.violations());
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if report.is_ok() {
        println!("{}: ok", config.display());
        Ok(0)
    } else {
        for v in &report.violations {
            println!("  - {v}");
        }
        Ok(EXIT_INPUT)
    }
}

fn run_reproduce(out: &Path) -> Result<u8, Failure> {
    let tol = io::tol_from_env()?;
    let outcomes = figures::reproduce(out, tol)?;
    print!("{}", figures::summary_table(&outcomes));
    let mismatches = outcomes.iter().filter(|o| !o.matches()).count();
    println!("{} figures, {mismatches} mismatches, output in {}", outcomes.len(), out.display());
    Ok(if mismatches == 0 { 0 } else { EXIT_INVALID })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Validate { config } => run_validate(&config),
        Command::ReproduceFigures { out } => run_reproduce(&out),
    };
    match status {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
