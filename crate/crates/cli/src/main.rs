//! Command-line front end for the solver library: single solves, mesh
//! inspection, error-table sweeps, figure sampling, and verification
//! suites.
//!
//! Exit codes are stable: 0 on success, 2 for configuration problems
//! (bad flags, malformed config files, invalid parameter ranges — clap
//! usage errors also exit 2), and 3 for numerical failures and failed
//! verification checks.

mod config;
mod dyadic;
mod output;
mod verify;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use shishkin::experiments::{dyadic_label, figure_data, format_sci, run_sweep};
use shishkin::mesh::{build_mesh, mesh_report, transition_points};
use shishkin::problem::classify;
use shishkin::reference::{builtin_problem, BENCHMARK_PROBLEM};
use shishkin::solver::solve;

use crate::dyadic::parse_value;
use crate::output::write_atomic;
use crate::verify::Suite;

#[derive(Parser)]
#[command(
    name = "shishkin",
    version,
    about = "Upwind finite differences on layer-adapted Shishkin meshes for \
             two-parameter singularly perturbed boundary value problems"
)]
struct Cli {
    /// Worker threads for sweeps and suites (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem; prints the regime summary and writes the
    /// solution CSV.
    Solve(SolveArgs),
    /// Build the mesh for one parameter pair; prints its geometry and
    /// writes the node CSV.
    Mesh(MeshArgs),
    /// Run a parameter sweep and write the error tables.
    Sweep(SweepArgs),
    /// Sample the interpolated solution densely enough to plot the
    /// layers.
    Figure(FigureArgs),
    /// Run a named verification suite; exits 0 iff every check passes.
    Verify(VerifyArgs),
}

#[derive(clap::Args)]
struct SolveArgs {
    /// Diffusion parameter (dyadic like `2^-10`, or decimal).
    #[arg(long, value_parser = parse_value)]
    eps: f64,
    /// Convection parameter (dyadic like `2^-4`, or decimal).
    #[arg(long, value_parser = parse_value)]
    mu: f64,
    /// Mesh intervals (a multiple of 4, at least 8).
    #[arg(long)]
    n: usize,
    /// Built-in problem name.
    #[arg(long, default_value = BENCHMARK_PROBLEM)]
    problem: String,
    /// Output CSV path (columns index,x,U).
    #[arg(long, default_value = "solution.csv")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct MeshArgs {
    /// Diffusion parameter (dyadic like `2^-10`, or decimal).
    #[arg(long, value_parser = parse_value)]
    eps: f64,
    /// Convection parameter (dyadic like `2^-4`, or decimal).
    #[arg(long, value_parser = parse_value)]
    mu: f64,
    /// Mesh intervals (a multiple of 4, at least 8).
    #[arg(long)]
    n: usize,
    /// Built-in problem name (supplies the coefficient bounds).
    #[arg(long, default_value = BENCHMARK_PROBLEM)]
    problem: String,
    /// Output CSV path (columns index,x,h).
    #[arg(long, default_value = "mesh.csv")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct SweepArgs {
    /// TOML file with a [sweep] table; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for tables.csv and table1.md .. table3.md.
    #[arg(long, alias = "out", default_value = "results")]
    out_dir: PathBuf,
    /// Fine-mesh intervals for the error measurement.
    #[arg(long)]
    n_fine: Option<usize>,
    /// Built-in problem name.
    #[arg(long)]
    problem: Option<String>,
    /// Write only this rendering (default: both).
    #[arg(long, value_enum)]
    format: Option<TableFormat>,
}

#[derive(clap::Args)]
struct FigureArgs {
    /// Diffusion parameter (dyadic like `2^-10`, or decimal).
    #[arg(long, value_parser = parse_value)]
    eps: f64,
    /// Convection parameter (dyadic like `2^-4`, or decimal).
    #[arg(long, value_parser = parse_value)]
    mu: f64,
    /// Mesh intervals (a multiple of 4, at least 8).
    #[arg(long)]
    n: usize,
    /// Uniform sample points (mesh nodes are always included).
    #[arg(long, default_value_t = 501)]
    samples: usize,
    /// Built-in problem name.
    #[arg(long, default_value = BENCHMARK_PROBLEM)]
    problem: String,
    /// Output CSV path (columns x,u); defaults to figure_<eps>_<mu>.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Which invariant suite to run.
    #[arg(value_enum)]
    suite: Suite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    /// Long-form records CSV only.
    Csv,
    /// Markdown tables only.
    Md,
}

/// Failures routed to an exit code: configuration errors exit 2,
/// numerical ones 3.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<shishkin::Error> for Failure {
    fn from(e: shishkin::Error) -> Self {
        match e {
            shishkin::Error::Config(_) | shishkin::Error::Domain(_) => {
                Failure::Config(e.to_string())
            }
            shishkin::Error::Numerical(_) => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("io error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure {threads} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Mesh(args) => cmd_mesh(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Figure(args) => cmd_figure(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    let problem = builtin_problem(&args.problem, args.eps, args.mu)?;
    let solution = solve(&problem, args.n)?;
    let regime = &solution.regime;
    let report = mesh_report(&solution.mesh, regime);
    println!("problem = {}", args.problem);
    println!("eps = {}", dyadic_label(regime.eps));
    println!("mu = {}", dyadic_label(regime.mu));
    println!("kind = {:?}", regime.kind);
    println!("theta = {}", regime.theta);
    println!("rho_l = {}", regime.rho_l);
    println!("rho_r = {}", regime.rho_r);
    println!("sigma_l = {}", solution.mesh.sigma_l);
    println!("sigma_r = {}", solution.mesh.sigma_r);
    println!("steps = {} | {} | {}", report.h_l, report.h_c, report.h_r);
    let mut csv = Vec::new();
    solution.write_csv(&mut csv)?;
    write_atomic(&args.out, &csv)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_mesh(args: MeshArgs) -> Result<(), Failure> {
    let problem = builtin_problem(&args.problem, args.eps, args.mu)?;
    let regime = classify(&problem)?;
    let (sigma_l, sigma_r) = transition_points(args.n, &regime)?;
    let mesh = build_mesh(args.n, sigma_l, sigma_r)?;
    let report = mesh_report(&mesh, &regime);
    println!("eps = {}", dyadic_label(regime.eps));
    println!("mu = {}", dyadic_label(regime.mu));
    println!("kind = {:?}", regime.kind);
    println!("n = {}", args.n);
    println!("sigma_l = {sigma_l}");
    println!("sigma_r = {sigma_r}");
    println!("steps = {} | {} | {}", report.h_l, report.h_c, report.h_r);
    println!(
        "coarse_ratios = {} | {}",
        report.coarse_ratio_l, report.coarse_ratio_r
    );
    println!("layer_hypotheses = {}", report.assumption_holds);
    println!("uniform_fallback = {}", report.degenerate_uniform);
    println!(
        "rho_clamped = {} | {}",
        report.rho_l_clamped, report.rho_r_clamped
    );
    let mut csv = Vec::new();
    mesh.write_csv(&mut csv)?;
    write_atomic(&args.out, &csv)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let overrides = config::Overrides {
        n_fine: args.n_fine,
        problem: args.problem.clone(),
    };
    let sweep_config = config::load_sweep(args.config.as_deref(), &overrides)?;
    println!("eps_set = {} values", sweep_config.eps_set.len());
    println!("mu_set = {} values", sweep_config.mu_set.len());
    println!("n_set = {:?}", sweep_config.n_set);
    println!("n_fine = {}", sweep_config.n_fine);
    println!("problem = {}", config::problem_label(&sweep_config.problem));
    let result = run_sweep(&sweep_config)?;
    println!("records = {}", result.records.len());
    for &(n, e, p) in &result.table3 {
        match p {
            Some(p) => println!("n = {n}: E = {}, p = {p:.2}", format_sci(e)),
            None => println!("n = {n}: E = {}", format_sci(e)),
        }
    }
    let want_csv = args.format.is_none_or(|f| f == TableFormat::Csv);
    let want_md = args.format.is_none_or(|f| f == TableFormat::Md);
    let mut written = Vec::new();
    if want_csv {
        let path = args.out_dir.join("tables.csv");
        write_atomic(&path, result.records_csv().as_bytes())?;
        written.push(path);
    }
    if want_md {
        for (name, text) in [
            ("table1.md", result.table1_markdown()),
            ("table2.md", result.table2_markdown()),
            ("table3.md", result.table3_markdown()),
        ] {
            let path = args.out_dir.join(name);
            write_atomic(&path, text.as_bytes())?;
            written.push(path);
        }
    }
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_figure(args: FigureArgs) -> Result<(), Failure> {
    let problem = builtin_problem(&args.problem, args.eps, args.mu)?;
    let data = figure_data(&problem, args.n, args.samples)?;
    let out = args.out.unwrap_or_else(|| {
        PathBuf::from(format!(
            "figure_{}_{}.csv",
            dyadic_label(args.eps),
            dyadic_label(args.mu)
        ))
    });
    let mut csv = String::from("x,u\n");
    for (x, u) in &data {
        csv.push_str(&format!("{x},{u}\n"));
    }
    write_atomic(&out, csv.as_bytes())?;
    println!("samples = {}", data.len());
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let report = verify::run_suite(args.suite)?;
    for line in &report.lines {
        println!("{line}");
    }
    let name = args.suite.name();
    println!(
        "suite {name}: {} checks, {} failures",
        report.checks,
        report.failures.len()
    );
    if report.failures.is_empty() {
        return Ok(());
    }
    // Machine-readable failure list: one tab-separated line per failure.
    let stderr = std::io::stderr();
    let mut err = stderr.lock();
    for failure in &report.failures {
        let _ = writeln!(err, "{name}\t{}\t{}", failure.case, failure.detail);
    }
    Err(Failure::Numerical(format!(
        "suite {name}: {} of {} checks failed",
        report.failures.len(),
        report.checks
    )))
}
