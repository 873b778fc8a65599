//! Command-line front end: orchestrates the pool / predictor / LUT / search
//! pipeline and writes every artifact as delimited text with a run manifest.

pub mod commands;
pub mod config;
pub mod formats;
pub mod oracles;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

/// Exit codes: 0 success, 2 usage error, 3 data/file error, 4 oracle
/// failure.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Oracle(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Oracle(_) => EXIT_ORACLE,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Oracle(m) => m,
        }
    }
}

pub fn read_file(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{path}: {e}")))
}

#[derive(Parser, Debug)]
#[command(
    name = "chamnet",
    version,
    about = "Platform-aware architecture adaptation toolkit"
)]
pub struct Cli {
    /// Built-in space name (chamnet-mobile, chamnet-res) or a schema file
    /// path.
    #[arg(long, global = true)]
    pub space: Option<String>,
    /// Seed for every stochastic component of the command.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker thread cap. Accepted for interface stability; execution is
    /// serial so results never depend on scheduling.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// TOML run configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Round searchable channel ranges to this multiple.
    #[arg(long, global = true)]
    pub channel_step: Option<u32>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw a low-discrepancy gene pool from the space.
    Pool {
        /// Number of distinct genes to draw.
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the accuracy predictor by iterative explore/exploit sampling.
    BuildAcc {
        /// Oracle spec: synthetic | file:PATH | cmd:PROG.
        #[arg(long, default_value = "synthetic")]
        oracle: String,
        /// Resume from a partial observation log.
        #[arg(long)]
        resume: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build an operator-latency LUT from a synthetic device or a record
    /// file.
    BuildLut {
        /// Synthetic device profile: cpu_like | dsp_like.
        #[arg(long)]
        device: Option<String>,
        /// Ingest an existing LUT record file instead.
        #[arg(long)]
        records: Option<PathBuf>,
        /// Platform id stored in the LUT header.
        #[arg(long)]
        platform: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the energy predictor (exploration-only sampling).
    BuildEnergy {
        /// Oracle spec: synthetic | synthetic:dsp | file:PATH | cmd:PROG.
        #[arg(long, default_value = "synthetic")]
        oracle: String,
        #[arg(long)]
        platform: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the evolutionary search under a latency or energy budget.
    Search {
        /// Accuracy model file.
        #[arg(long)]
        acc: PathBuf,
        /// Latency LUT file (latency-constrained search).
        #[arg(long)]
        lut: Option<PathBuf>,
        /// Energy model file (energy-constrained search).
        #[arg(long)]
        energy: Option<PathBuf>,
        #[arg(long)]
        thres_ms: Option<f64>,
        #[arg(long)]
        thres_mj: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run searches across a latency threshold list and emit the trade-off
    /// table.
    Sweep {
        #[arg(long)]
        acc: PathBuf,
        #[arg(long)]
        lut: PathBuf,
        /// Comma-separated latency budgets in ms.
        #[arg(long, value_delimiter = ',')]
        thres_ms_list: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score one gene against the given predictors.
    Eval {
        /// Gene values, comma-separated.
        #[arg(long)]
        gene: String,
        #[arg(long)]
        acc: PathBuf,
        #[arg(long)]
        lut: Option<PathBuf>,
        #[arg(long)]
        energy: Option<PathBuf>,
        #[arg(long)]
        thres_ms: Option<f64>,
        #[arg(long)]
        thres_mj: Option<f64>,
    },
}

/// Parse and run one command line (`args[0]` is the program name). Returns
/// the process exit code and prints errors to stderr.
pub fn run(args: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with successful exit.
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    // The manifest records argv after the program name, verbatim.
    let argv: Vec<String> = args.iter().skip(1).cloned().collect();
    match commands::dispatch(&cli, &argv) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
