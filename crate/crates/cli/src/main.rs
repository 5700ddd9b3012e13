use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use prony_smt::model::ModelKind;
use prony_smt_cli::commands::{self, SimulateOptions};
use prony_smt_cli::{demo, CliError};

/// Recovery of finite parametric sources from spherical-mean data.
#[derive(Parser)]
#[command(name = "prony-smt", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Points,
    Hyperplanes,
    Radial,
}

impl From<KindArg> for ModelKind {
    fn from(k: KindArg) -> ModelKind {
        match k {
            KindArg::Points => ModelKind::Points,
            KindArg::Hyperplanes => ModelKind::Hyperplanes,
            KindArg::Radial => ModelKind::Radial,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoKind {
    /// The worked two-point reconstruction.
    Example42,
    /// Colliding-amplitude point pair that recovery must refuse.
    CounterexamplePoints,
    /// Colliding-amplitude line pair with identical probe data.
    CounterexampleLines,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize per-sensor data (moments or traces) for a scenario.
    Simulate {
        /// Scenario JSON file.
        #[arg(long)]
        scenario: PathBuf,
        /// Output data file.
        #[arg(long)]
        out: PathBuf,
        /// Probe evaluations per sensor (default: 2·sources).
        #[arg(long)]
        probe_count: Option<usize>,
        /// Samples per radial trace.
        #[arg(long, default_value_t = 512)]
        radial_grid: usize,
        /// Standard deviation of additive Gaussian noise.
        #[arg(long, default_value_t = 0.0)]
        noise_sigma: f64,
        /// Noise seed (falls back to PRONY_SMT_SEED, then 0).
        #[arg(long, env = "PRONY_SMT_SEED")]
        seed: Option<u64>,
    },
    /// Recover a model from a data file and write the report.
    Recover {
        /// Data file produced by `simulate`.
        #[arg(long)]
        moments: PathBuf,
        /// Ambient dimension n.
        #[arg(long)]
        dim: usize,
        /// Number of sources m.
        #[arg(long)]
        sources: usize,
        /// Which recovery pipeline to run.
        #[arg(long)]
        kind: KindArg,
        /// Report output file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a recovery report against a scenario's ground truth.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        report: PathBuf,
        /// Error-table output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce a published computation end to end and check every value.
    DemoPaper {
        #[arg(long)]
        which: DemoKind,
    },
    /// Generate a seeded random scenario honoring all model invariants.
    Generate {
        #[arg(long)]
        kind: KindArg,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        sources: usize,
        #[arg(long, env = "PRONY_SMT_SEED", default_value_t = 0)]
        seed: u64,
        /// Gaussian kernel width for radial scenarios.
        #[arg(long)]
        kernel_width: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            scenario,
            out,
            probe_count,
            radial_grid,
            noise_sigma,
            seed,
        } => commands::simulate(
            &scenario,
            &out,
            &SimulateOptions {
                probe_count,
                radial_grid,
                noise_sigma,
                seed: seed.unwrap_or(0),
            },
        ),
        Command::Recover {
            moments,
            dim,
            sources,
            kind,
            out,
        } => commands::recover(&moments, dim, sources, kind.into(), &out).map(|_| ()),
        Command::Verify {
            scenario,
            report,
            out,
        } => commands::verify(&scenario, &report, out.as_ref()).map(|_| ()),
        Command::DemoPaper { which } => match which {
            DemoKind::Example42 => demo::example42(),
            DemoKind::CounterexamplePoints => demo::counterexample_points(),
            DemoKind::CounterexampleLines => demo::counterexample_lines(),
        },
        Command::Generate {
            kind,
            dim,
            sources,
            seed,
            kernel_width,
            out,
        } => commands::generate(kind.into(), dim, sources, seed, kernel_width, &out).map(|_| ()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
