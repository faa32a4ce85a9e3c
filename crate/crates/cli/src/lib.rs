//! Subcommands behind the `coalition` binary.

mod commands;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub use sweep::{Axis, SweepSpec};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_EMPTY_CORE: u8 = 10;

#[derive(Parser, Debug)]
#[command(name = "coalition", version, about = "Coalition values and stability for cooperative wireless networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Value of one coalition (bits), or its members' payoffs.
    Value {
        #[command(flatten)]
        input: Input,
        /// Coalition mask, decimal or 0b-prefixed binary.
        #[arg(long)]
        coalition: String,
    },
    /// Core of a TU game: witness allocation or balanced certificate.
    Core {
        #[command(flatten)]
        input: Input,
    },
    /// Whether the grand coalition beats every partition.
    Cohesive {
        #[command(flatten)]
        input: Input,
    },
    /// Grand-coalition stability of the multiuser-detector game.
    MudStability {
        #[command(flatten)]
        input: Input,
    },
    /// Equal-split stable structures over a two-axis SNR grid.
    StabilityMap {
        #[arg(long)]
        scenario: PathBuf,
        /// `user:start_db:stop_db:steps`, given twice.
        #[arg(long = "axis", num_args = 1, required = true)]
        axes: Vec<String>,
        /// `user=snr_db` overrides of the base scenario.
        #[arg(long = "set")]
        overrides: Vec<String>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rate region of a coalition against the grand coalition.
    PdfRegion {
        #[arg(long)]
        scenario: PathBuf,
        /// Coalition to compare with the grand coalition.
        #[arg(long)]
        coalition: String,
        /// Grid points per cooperative-power axis.
        #[arg(long, default_value_t = 40)]
        grid: usize,
        /// Minimum number of weight directions.
        #[arg(long, default_value_t = 64)]
        weights: usize,
        /// `user=p_c` pins, applied to the coalition's region only.
        #[arg(long = "fix-pc")]
        fix_pc: Vec<String>,
        /// Comma-separated users spanning the comparison plane
        /// (default: the coalition's members).
        #[arg(long)]
        plane: Option<String>,
        /// Prefix for `<prefix>_coalition.csv` and `<prefix>_grand.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the acceptance suite.
    VerifyExamples {
        /// Criterion id, name fragment or group (tx, rx, mud, pdf, mac, game).
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, default_value_t = coalition_core::verify::DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
pub struct Input {
    /// Scenario JSON.
    #[arg(long, conflicts_with = "game", required_unless_present = "game")]
    pub scenario: Option<PathBuf>,
    /// Hand-written TU game JSON, `{"K": n, "values": {"mask": v}}`.
    #[arg(long)]
    pub game: Option<PathBuf>,
    /// Defaults to the natural model of the scenario.
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    #[arg(long, default_value = "mmse")]
    pub detector: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Model {
    RxJoint,
    TxPerfect,
    SingleReceiverMac,
    Mud,
}

pub fn run(cli: &Cli) -> Result<ExitCode> {
    let mut out = std::io::stdout().lock();
    let code = commands::dispatch(&cli.command, &mut out)?;
    Ok(ExitCode::from(code))
}

pub use commands::dispatch;
