//! Command-line front end: `check`, `design`, `sweep`, `compile`, `simulate`.
//!
//! Exit codes: 0 on success, 1 for usage, I/O and parse errors, 2 when the
//! input is well formed but physically invalid. Grid evaluation uses rayon;
//! set `RAYON_NUM_THREADS` to pin the thread count.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod files;
pub mod units;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Physics(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) | CliError::Io(_) => 1,
            CliError::Physics(_) => 2,
        }
    }
}

impl From<zfnmr::Error> for CliError {
    fn from(e: zfnmr::Error) -> Self {
        CliError::Physics(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "zfnmr", version, about = "Gate compiler and simulator for zero-field NMR spin networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summarize a spin system and decide controllability.
    Check {
        /// Built-in name (CH, PH, CHF) or system file.
        system: String,
    },
    /// Find a selective π pulse duration.
    Design(DesignArgs),
    /// Write the product fidelity over a duration grid as CSV.
    Sweep(SweepArgs),
    /// Compile a gate into a pulse sequence file.
    Compile(CompileArgs),
    /// Simulate a sequence file and report its gate fidelity.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    pub system: String,
    /// Spins to flip by π: names or 1-based indices, comma separated.
    #[arg(long)]
    pub target: String,
    /// Pulse amplitude with unit, e.g. 9G or 9e-4T.
    #[arg(long, default_value = "9G")]
    pub field: String,
    /// Search window `lo:hi` in seconds. Without it the shortest pulse
    /// reaching `--threshold` is returned.
    #[arg(long)]
    pub range: Option<String>,
    /// Use the commensurate duration `(2m₁+1)π/(γB)` from the best rational
    /// approximation with spectator index up to this value (two-spin
    /// systems, one target).
    #[arg(long, conflicts_with = "range")]
    pub rational: Option<u32>,
    /// Grid points for `--range` (default: 40 per fastest period).
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, default_value_t = zfnmr::design::DEFAULT_PI_THRESHOLD)]
    pub threshold: f64,
    /// Longest pulse considered without `--range`, seconds.
    #[arg(long, default_value_t = zfnmr::design::DEFAULT_PI_MAX_DURATION)]
    pub max_duration: f64,
    /// Also write the searched grid as CSV.
    #[arg(long, requires = "range")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub system: String,
    #[arg(long)]
    pub target: String,
    #[arg(long, default_value = "9G")]
    pub field: String,
    /// Duration window `lo:hi` in seconds.
    #[arg(long)]
    pub range: String,
    #[arg(long)]
    pub points: Option<usize>,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    pub system: String,
    /// ideal keeps single-spin factors as exact placeholders; compiled
    /// expands them into DC-pulse echoes.
    #[arg(long, default_value = "ideal", global = true)]
    pub mode: String,
    #[arg(long, default_value = "9G", global = true)]
    pub field: String,
    /// Sequence file destination; standard output when omitted.
    #[arg(short, long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub gate: GateArg,
}

#[derive(Debug, Subcommand)]
pub enum GateArg {
    Identity,
    /// Rotation of one spin: `single C z pi/2`.
    Single {
        spin: String,
        /// x, y, z or `nx,ny,nz`.
        #[arg(allow_hyphen_values = true)]
        axis: String,
        /// Radians; `pi` is accepted, e.g. -pi/2.
        #[arg(allow_hyphen_values = true)]
        angle: String,
    },
    Cnot {
        control: String,
        target: String,
    },
    /// CNOTs on disjoint pairs: `simul-cnot 1:2,3:4`.
    SimulCnot { pairs: String },
    /// Refocused zz evolution `e^{-i 2 theta Iz Iz}`.
    Zz {
        i: String,
        j: String,
        #[arg(allow_hyphen_values = true)]
        angle: String,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub system: String,
    pub sequence: PathBuf,
    /// Reference gate: `target` (the file's own), `identity`,
    /// `cnot:C:T`, `rotation:S:AXIS:ANGLE`, or a matrix/sequence file.
    #[arg(long, default_value = "target")]
    pub ideal: String,
    /// Keep the couplings on during DC pulses.
    #[arg(long)]
    pub j_during_pulses: bool,
    /// Treat ideal_gate events as an error instead of exact rotations.
    #[arg(long)]
    pub no_ideal_gates: bool,
    /// Also write a TOML record of the result.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            write!(out, "{e}").map_err(io_error)?;
            return Ok(());
        }
        Err(e) => {
            let msg = e.to_string();
            return Err(CliError::Usage(msg.strip_prefix("error: ").unwrap_or(&msg).trim_end().to_string()));
        }
    };
    match cli.command {
        Command::Check { system } => commands::check(&system, out),
        Command::Design(a) => commands::design(&a, out),
        Command::Sweep(a) => commands::sweep(&a, out),
        Command::Compile(a) => commands::compile(&a, out, err),
        Command::Simulate(a) => commands::simulate(&a, out),
    }
}

pub(crate) fn io_error(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}
