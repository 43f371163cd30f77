//! `gateset-forge`: simulate tomography data, run sweep campaigns, and
//! reconstruct gates from lab records.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gateset_forge::campaign::Template;
use gateset_forge::channels::LibraryName;
use gateset_forge::metrics::Metric;

use crate::config::{ExperimentKind, MeasurementKind};

#[derive(Parser, Debug)]
#[command(name = "gateset-forge", version, about = "Process and gate-set tomography under SPAM errors")]
struct Cli {
    /// Repeat for more log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    /// Only print errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a record file and its sidecar.
    Simulate(SimulateArgs),
    /// Run a sweep and write campaign.csv and campaign.meta.json.
    Campaign(CampaignArgs),
    /// QPT and/or self-consistent reconstruction of a record file.
    Reconstruct(ReconstructArgs),
    /// Fidelity error and diamond distance between two PTM or library files.
    Metrics(MetricsArgs),
    /// Physicality and 2-design checks on a library.
    Validate(ValidateArgs),
    /// Check a record file and report what it contains.
    Ingest(IngestArgs),
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    library: Option<LibraryName>,
    /// `kind:strength[:seed][:pre|post]`; repeat to stack errors.
    #[arg(long)]
    error: Vec<String>,
    /// Noise power per record.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    experiment: Option<ExperimentKind>,
    #[arg(long, value_enum)]
    measurement: Option<MeasurementKind>,
    /// PTM JSON probed by pair experiments.
    #[arg(long)]
    channel: Option<PathBuf>,
    #[arg(long, short, default_value = "records.csv")]
    out: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum EstimatorChoice {
    Qpt,
    Sc,
    Both,
}

#[derive(Args, Debug)]
pub struct CampaignArgs {
    #[arg(long, conflicts_with = "config")]
    template: Option<Template>,
    /// Campaign spec JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Replace the library axis.
    #[arg(long)]
    library: Vec<LibraryName>,
    /// Replace the noise-power axis.
    #[arg(long)]
    noise: Vec<f64>,
    #[arg(long, value_enum)]
    estimator: Option<EstimatorChoice>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Also write campaign.summary.csv with mean, median or q<fraction>.
    #[arg(long)]
    summary: Option<String>,
    #[arg(long, short, default_value = "campaign")]
    out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    /// Record CSV; its `.meta.json` sidecar must sit next to it.
    records: PathBuf,
    /// Ideal library, if the sidecar does not carry one.
    #[arg(long)]
    library: Option<LibraryName>,
    #[arg(long, value_enum, default_value = "both")]
    estimator: EstimatorChoice,
    #[arg(long, short, default_value = "reconstruction")]
    out: PathBuf,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    estimate: PathBuf,
    target: PathBuf,
    /// Optimize the diagonal frame of the estimate first.
    #[arg(long)]
    gauge: bool,
    /// Metric minimized by the frame search.
    #[arg(long, default_value = "fidelity-error")]
    metric: Metric,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Library JSON.
    file: Option<PathBuf>,
    /// Check a standard library instead.
    #[arg(long, conflicts_with = "file")]
    library: Option<LibraryName>,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    records: PathBuf,
    /// Rewrite the validated records here (noise powers already divided by repetitions).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet {
        log::LevelFilter::Error
    } else {
        match cli.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            _ => log::LevelFilter::Debug,
        }
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Campaign(a) => commands::campaign(a),
        Command::Reconstruct(a) => commands::reconstruct(a),
        Command::Metrics(a) => commands::metrics(a),
        Command::Validate(a) => commands::validate(a),
        Command::Ingest(a) => commands::ingest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
