use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hinf_energy::models::BeamParams;
use hinf_energy::{EnergyKind, EnergyOptions};
use hinf_energy_cli::bench::{self, BenchConfig, Family};
use hinf_energy_cli::commands::{self, OutputStyle, PointSource};
use hinf_energy_cli::grid::{self, AxisSpec};
use hinf_energy_cli::{CliError, CliResult, DEFAULT_MAX_BYTES};

/// Polynomial approximations of H∞ past and future energy functions.
#[derive(Parser)]
#[command(name = "hinf-energy", version)]
struct Cli {
    /// Machine-readable CSV output.
    #[arg(long, global = true)]
    csv: bool,
    /// Suppress reports; files are still written.
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Largest coefficient vector allowed, in bytes.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_BYTES)]
    max_bytes: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Past,
    Future,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Beam,
    Random,
}

#[derive(Args)]
struct Points {
    /// Axis grid `min:max:count`; repeat once per variable.
    #[arg(long, allow_hyphen_values = true)]
    grid: Vec<String>,
    /// File with one state per line.
    #[arg(long, conflicts_with = "grid")]
    points: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute energy coefficients and write a coefficient file.
    Energy {
        model: PathBuf,
        #[arg(long)]
        degree: usize,
        #[arg(long, allow_hyphen_values = true)]
        eta: f64,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        out: PathBuf,
        /// Report the residual of every k-way solve.
        #[arg(long)]
        verify: bool,
    },
    /// Evaluate a coefficient file on points.
    Eval {
        coeffs: PathBuf,
        #[command(flatten)]
        points: Points,
    },
    /// HJB residual of a coefficient file for a model.
    Residual {
        model: PathBuf,
        coeffs: PathBuf,
        #[command(flatten)]
        points: Points,
        /// Direction `x` for residuals at `εx`, comma separated.
        #[arg(long, allow_hyphen_values = true, requires = "eps_range")]
        ray: Option<String>,
        /// Values of `ε` as `min:max:count`.
        #[arg(long, requires = "ray")]
        eps_range: Option<String>,
    },
    /// Write the finite element beam model.
    Beam {
        #[arg(long)]
        elements: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[arg(long, default_value_t = 1.0)]
        modulus: f64,
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        #[arg(long, default_value_t = 1.0)]
        area: f64,
        #[arg(long, default_value_t = 1.0)]
        inertia: f64,
        #[arg(long, default_value_t = 0.1)]
        cable_offset: f64,
        /// Mass-proportional damping.
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        /// Stiffness-proportional damping.
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
    },
    /// Time the computation over several state dimensions.
    Bench {
        #[arg(long, value_enum, default_value = "beam")]
        model_family: FamilyArg,
        /// Comma-separated state dimensions.
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        eta: f64,
        /// Stiffness-proportional damping of the beam family.
        #[arg(long, default_value_t = 1e-4)]
        beta: f64,
        /// Seed of the random family.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn point_source(p: Points) -> CliResult<PointSource> {
    match (p.points, p.grid.is_empty()) {
        (Some(path), _) => Ok(PointSource::File(path)),
        (None, false) => Ok(PointSource::Grid(p.grid.iter().map(|s| AxisSpec::parse(s)).collect::<CliResult<_>>()?)),
        (None, true) => Err(CliError::parse("give --grid, --points or --ray")),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    #[cfg(feature = "parallel")]
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::parse(format!("--threads: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = cli.threads;
    let style = OutputStyle { csv: cli.csv, quiet: cli.quiet };
    let options = EnergyOptions { element_budget: cli.max_bytes / 8, verify: false };
    let stdout = io::stdout();
    let mut w = stdout.lock();
    match cli.command {
        Command::Energy { model, degree, eta, kind, out, verify } => {
            let kind = match kind {
                Kind::Past => EnergyKind::Past,
                Kind::Future => EnergyKind::Future,
            };
            let opts = EnergyOptions { verify, ..options };
            commands::cmd_energy(&model, degree, eta, kind, &out, &opts, style, &mut w)?;
        }
        Command::Eval { coeffs, points } => {
            commands::cmd_eval(&coeffs, &point_source(points)?, &mut w)?;
        }
        Command::Residual { model, coeffs, points, ray, eps_range } => {
            let source = match (ray, eps_range) {
                (Some(ray), Some(eps)) => {
                    let direction = grid::parse_vector(&ray, ray.split(',').count())?;
                    PointSource::Ray { direction, eps: AxisSpec::parse(&eps)? }
                }
                _ => point_source(points)?,
            };
            commands::cmd_residual(&model, &coeffs, &source, &mut w)?;
        }
        Command::Beam { elements, out, length, modulus, density, area, inertia, cable_offset, alpha, beta } => {
            let params = BeamParams {
                num_elements: elements,
                length,
                modulus,
                density,
                area,
                inertia,
                cable_offset,
                alpha,
                beta,
            };
            commands::cmd_beam(&params, &out, style, &mut w)?;
        }
        Command::Bench { model_family, n_list, degree, repeats, eta, beta, seed } => {
            let family = match model_family {
                FamilyArg::Beam => Family::Beam,
                FamilyArg::Random => Family::Random,
            };
            let cfg = BenchConfig { family, n_list, degree, repeats, eta, beta, seed, options };
            let res = bench::run_bench(&cfg)?;
            if !style.quiet {
                bench::write_bench(&res, &mut w)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
