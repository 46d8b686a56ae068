//! `kmdecomp`: product-limit estimation and unit-level decomposition from the command line.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 usage error, 3 malformed
//! input data, 4 domain error, 5 a verification identity failed.

mod commands;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_IO: u8 = 1;
pub const EXIT_PARSE: u8 = 3;
pub const EXIT_DOMAIN: u8 = 4;
pub const EXIT_VERIFY: u8 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "kmdecomp",
    version,
    about = "Kaplan-Meier estimation with unit-level decomposition"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Style {
    Km,
    Stacked,
    Split,
    Units,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV with header `time,event`
    #[arg(long, short)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; stdout when omitted
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Product-limit estimate as breakpoint/value records
    Estimate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Uniform grid `start:stop:step` instead of the breakpoints
        #[arg(long)]
        grid: Option<String>,
    },
    /// Unit curves, stacked layers and the empirical/predicted split
    Decompose {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Uniform grid `start:stop:step` instead of breakpoints and midpoints
        #[arg(long)]
        grid: Option<String>,
    },
    /// Simulate a population with Weibull failures and Weibull censoring
    Simulate {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 1.4)]
        failure_shape: f64,
        #[arg(long, default_value_t = 1.0)]
        failure_scale: f64,
        #[arg(long, default_value_t = 1.0)]
        censor_shape: f64,
        #[arg(long, default_value_t = 1.5)]
        censor_scale: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check the decomposition identities; nonzero exit if any fails
    Verify {
        #[command(flatten)]
        input: InputArgs,
        /// Corrupt one unit curve before checking (negative control)
        #[arg(long)]
        self_test: bool,
    },
    /// Plot data as long-format records or a static SVG
    Plotdata {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, value_enum, default_value_t = Style::Stacked)]
        style: Style,
        /// Defaults to svg when the output path ends in `.svg`, else csv
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        grid: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate {
            input,
            output,
            format,
            grid,
        } => commands::estimate(&input, &output, format, grid.as_deref()),
        Command::Decompose {
            input,
            output,
            format,
            grid,
        } => commands::decompose(&input, &output, format, grid.as_deref()),
        Command::Simulate {
            n,
            failure_shape,
            failure_scale,
            censor_shape,
            censor_scale,
            seed,
            output,
        } => commands::simulate(
            n,
            (failure_shape, failure_scale),
            (censor_shape, censor_scale),
            seed,
            &output,
        ),
        Command::Verify { input, self_test } => commands::verify(&input, self_test),
        Command::Plotdata {
            input,
            output,
            style,
            format,
            grid,
        } => commands::plotdata(&input, &output, style, format, grid.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::exit_code(&err))
        }
    }
}
