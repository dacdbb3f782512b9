use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use halo_lab::config::Format;
use halo_lab::output::write_report;
use halo_lab::{run_experiment, ExperimentConfig, LabError, LabResult, Stages};

#[derive(Parser)]
#[command(name = "halo-lab", version, about = "Characteristic series, Newton polygons and slope scans for block U_p operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Every stage the config asks for.
    Run(Common),
    /// Build the operator and its characteristic series only.
    Charseries(Common),
    /// Series plus Newton polygons at the configured points.
    Polygon(Common),
    /// Series plus the lambda bound; exits 10 on a violation.
    LambdaCheck(Common),
    /// Slopes at every configured point.
    SlopeScan(Common),
    /// Slope factorization at the configured point.
    Factor(Common),
    /// Factorization plus the kernel of Q*(U).
    Riesz(Common),
}

#[derive(Args)]
struct Common {
    config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma separated subset of csv,json,svg,dat (overrides the config).
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<String>>,
    /// Worker threads for per-point work.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn stages(cmd: &Command) -> (Stages, &Common) {
    let none = Stages::CHARSERIES;
    match cmd {
        Command::Run(c) => (Stages::ALL, c),
        Command::Charseries(c) => (none, c),
        Command::Polygon(c) => (Stages { points: true, ..none }, c),
        Command::LambdaCheck(c) => (Stages { lambda: true, ..none }, c),
        Command::SlopeScan(c) => (Stages { points: true, ..none }, c),
        Command::Factor(c) => (Stages { factor: true, ..none }, c),
        Command::Riesz(c) => (Stages { factor: true, riesz: true, ..none }, c),
    }
}

fn execute(cli: Cli) -> LabResult<()> {
    let (stages, common) = stages(&cli.command);
    let config = ExperimentConfig::load(&common.config)?;
    let dir = common.out.clone().unwrap_or_else(|| config.outputs.dir.clone());
    let formats: BTreeSet<Format> = match &common.format {
        Some(list) => list.iter().map(|s| s.parse()).collect::<LabResult<_>>()?,
        None => config.outputs.formats.iter().copied().collect(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs.max(1))
        .build()
        .map_err(|e| LabError::Config(format!("cannot start {} workers: {e}", common.jobs)))?;
    let report = pool.install(|| run_experiment(&config, stages))?;
    let written = write_report(&report, &dir, &formats)?;
    for path in written {
        println!("{}", path.display());
    }
    match report.failure() {
        Some(f) => Err(LabError::Check(f)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("halo-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
