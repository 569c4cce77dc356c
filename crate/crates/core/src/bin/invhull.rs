use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use invhull::cli::{exit_code, report_exit_code, run, Command, Method, RunConfig, WORKERS_ENV};
use invhull::HullError;

/// Reparameterization-invariant hulls of integral functionals.
///
/// Flags given on the command line override those read from `--config`.
#[derive(Parser, Debug)]
#[command(name = "invhull", version)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice of the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Invariant hull of a functional on a curve.
    Hull1d(Hull1dArgs),
    /// Pointwise invariant integrand at a matrix.
    Pointwise(PointwiseArgs),
    /// Disk-surface energies, Beltrami straightening and descent.
    Surface(SurfaceArgs),
    /// Run the property suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct Hull1dArgs {
    /// Density id, e.g. quadratic, norm, ppower:0.5.
    #[arg(long)]
    density: Option<String>,
    /// Built-in curve (line:a,b,c, parabola, helix) or a CSV file.
    #[arg(long)]
    curve: Option<String>,
    /// Grid cells for built-in curves.
    #[arg(long)]
    n: Option<usize>,
    /// Direct-minimizer iterations.
    #[arg(long)]
    iters: Option<usize>,
    /// Largest exponent of the triviality probe.
    #[arg(long)]
    probe_j: Option<usize>,
    /// Triviality-probe table.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PointwiseArgs {
    #[arg(long)]
    density: Option<String>,
    /// Matrix literal, rows separated by ';', e.g. "1,0;0,1;0,0".
    #[arg(long)]
    matrix: Option<String>,
    /// Multi-start count.
    #[arg(long)]
    starts: Option<usize>,
}

#[derive(Args, Debug)]
struct SurfaceArgs {
    /// flat, stretch:a,b or graph:sin:A.
    #[arg(long)]
    surface: Option<String>,
    /// Comma-separated mesh levels.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<u32>>,
    /// lbs, descent or both.
    #[arg(long, value_parser = Method::parse)]
    method: Option<Method>,
    /// Descent iterations.
    #[arg(long)]
    iters: Option<usize>,
    /// Magnitude of the random descent start.
    #[arg(long)]
    perturb: Option<f64>,
    /// Energy-history plot of the last descent.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Refinement sweep table.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Mesh of the finest level.
    #[arg(long)]
    off: Option<PathBuf>,
    /// Sampled surface of the finest level.
    #[arg(long)]
    obj: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Per-property table.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn build_config(cli: Cli) -> Result<RunConfig, HullError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_json_file(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Some(Cmd::Hull1d(a)) => {
            cfg.command = Command::Hull1d;
            set(&mut cfg.density, a.density);
            set(&mut cfg.curve, a.curve);
            set(&mut cfg.n, a.n);
            set(&mut cfg.iters, a.iters);
            set(&mut cfg.probe_j, a.probe_j);
            cfg.csv = a.csv.or(cfg.csv);
        }
        Some(Cmd::Pointwise(a)) => {
            cfg.command = Command::Pointwise;
            set(&mut cfg.density, a.density);
            set(&mut cfg.matrix, a.matrix);
            set(&mut cfg.starts, a.starts);
        }
        Some(Cmd::Surface(a)) => {
            cfg.command = Command::Surface;
            set(&mut cfg.surface, a.surface);
            set(&mut cfg.levels, a.levels);
            set(&mut cfg.method, a.method);
            set(&mut cfg.iters, a.iters);
            set(&mut cfg.perturb, a.perturb);
            cfg.svg = a.svg.or(cfg.svg);
            cfg.csv = a.csv.or(cfg.csv);
            cfg.off = a.off.or(cfg.off);
            cfg.obj = a.obj.or(cfg.obj);
        }
        Some(Cmd::Verify(a)) => {
            cfg.command = Command::Verify;
            cfg.csv = a.csv.or(cfg.csv);
        }
        None if cli.config.is_some() => {}
        None => return Err(HullError::Usage("a subcommand or --config is required".into())),
    }
    set(&mut cfg.seed, cli.seed);
    cfg.report = cli.report.or(cfg.report);
    Ok(cfg)
}

fn init_workers() -> Result<(), HullError> {
    let Ok(v) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| HullError::Usage(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| HullError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = init_workers().and_then(|_| build_config(cli)).and_then(|cfg| {
        let report = run(&cfg)?;
        if cfg.report.is_none() {
            print!("{}", report.to_json()?);
        }
        if cfg.command == Command::Verify {
            for p in report.results["properties"].as_array().into_iter().flatten() {
                eprintln!(
                    "{} {}::{} measured {} {} {}",
                    if p["passed"].as_bool() == Some(true) {
                        "PASS"
                    } else {
                        "FAIL"
                    },
                    p["module"].as_str().unwrap_or_default(),
                    p["name"].as_str().unwrap_or_default(),
                    p["measured"],
                    p["relation"].as_str().unwrap_or_default(),
                    p["bound"],
                );
            }
        }
        Ok(report)
    });
    match outcome {
        Ok(report) => ExitCode::from(report_exit_code(&report) as u8),
        Err(e) => {
            eprintln!("invhull: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
