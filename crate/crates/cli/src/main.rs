use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dlps_core::Error;

mod compare;
mod input;
mod price;
mod report;
mod scenario;
mod validate;

use input::DataArgs;

#[derive(Parser)]
#[command(name = "dlps", version, about = "Demand-linked dynamic pricing engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute on-peak and off-peak prices.
    Price(PriceArgs),
    /// Replay a demand scenario and report price, bill and cost deltas.
    Scenario(ScenarioArgs),
    /// Bill the day under flat, RTP, TOU and the proposed signal.
    Compare(CompareArgs),
    /// Check the engine against the published reference tables.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args)]
pub struct OutArgs {
    /// Directory for the report files. Without it the main table goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
pub struct PriceArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, conflicts_with = "all")]
    state: Option<u8>,
    /// Every state of the day (the default when --state is absent).
    #[arg(long)]
    all: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
pub struct ScenarioArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Scenario JSON file, or `-` for stdin.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    scenario: Option<PathBuf>,
    /// One of s1, s2, s3, s4.
    #[arg(long)]
    preset: Option<String>,
    /// Seed for random scenarios; overrides the seed in a scenario file.
    #[arg(long)]
    seed: Option<u64>,
    /// State the deltas are reported at.
    #[arg(long, default_value_t = dlps_core::scenario::ANALYSIS_STATE)]
    state: u8,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
pub struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Peak-to-off-peak ratio of the TOU tariff.
    #[arg(long, default_value_t = 1.0)]
    tou_multiplier: f64,
    /// Largest random peak-window demand reduction, as a fraction.
    #[arg(long, default_value_t = 0.15)]
    dr_max: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Bill the reference signals without the utility margin.
    #[arg(long)]
    no_profit: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    json: bool,
    /// Overrides one customer's base demand before checking, e.g. I8=120.
    #[arg(long, hide = true, value_name = "ID=KW")]
    corrupt_demand: Vec<String>,
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Price(args) => price::run(args).map(|_| true),
        Command::Scenario(args) => scenario::run(args).map(|_| true),
        Command::Compare(args) => compare::run(args).map(|_| true),
        Command::Validate(args) => validate::run(args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
