//! `periodicity` command-line tool.
//!
//! Exit codes: 0 on success, 2 for invalid flags, 3 for data errors. Errors
//! are reported on stderr as a single `error kind=<Kind> message="..."` line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use periodicity::io::parse_duration;

fn duration_arg(s: &str) -> Result<f64, String> {
    parse_duration(s)
}

fn instant_arg(s: &str) -> Result<f64, String> {
    periodicity::io::parse_instant(s)
}

#[derive(Debug, Parser)]
#[command(
    name = "periodicity",
    version,
    about = "Periodicity intensity of longitudinal time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IngestKind {
    /// Event logs (`timestamp,stream_id[,weight]`), binned and summed across files.
    Events,
    /// Accelerometer CSV (`timestamp,x,y,z`): SVM, band-pass, absolute value, bucket mean.
    Accel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Fft,
    LombScargle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// 24h period, 7d window, 1h stride.
    Home,
    /// 24h period, 7d window, 3h stride.
    Vle,
    /// 24h period, 7d window, 15m stride.
    Calf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RenderKind {
    Line,
    Stacked,
}

#[derive(Debug, clap::Args)]
pub struct IngestArgs {
    #[arg(long, value_enum)]
    pub kind: IngestKind,
    /// Input files; event files are fused, accelerometer files concatenated.
    #[arg(long = "input", required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    /// Event bin width [default: 15m].
    #[arg(long = "bin", value_parser = duration_arg)]
    pub bin: Option<f64>,
    /// First bin start (ISO-8601 with offset) [default: midnight UTC before the first event].
    #[arg(long, value_parser = instant_arg)]
    pub start: Option<f64>,
    /// End of the last bin [default: just past the last event].
    #[arg(long, value_parser = instant_arg)]
    pub end: Option<f64>,
    /// Band-pass lower cutoff in Hz [default: 0.5].
    #[arg(long)]
    pub low: Option<f64>,
    /// Band-pass upper cutoff in Hz, clamped to 0.45 x sample rate [default: 20].
    #[arg(long)]
    pub high: Option<f64>,
    /// Butterworth order [default: 4].
    #[arg(long)]
    pub order: Option<usize>,
    /// Averaging bucket for the rectified signal [default: 60s].
    #[arg(long = "mean-window", value_parser = duration_arg)]
    pub mean_window: Option<f64>,
    /// Run configuration (`key = value` lines); flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct IntensityArgs {
    /// Series file written by `ingest`.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Target period [default: 24h; use 168h for weekly periodicity].
    #[arg(long, value_parser = duration_arg)]
    pub period: Option<f64>,
    /// Window length [default: 7d].
    #[arg(long, value_parser = duration_arg)]
    pub window: Option<f64>,
    /// Window stride [default: 1h (home sensors); presets: vle 3h, calf 15m].
    #[arg(long, value_parser = duration_arg)]
    pub stride: Option<f64>,
    /// Period tolerance for neighbouring frequencies [default: 0.01h].
    #[arg(long, value_parser = duration_arg)]
    pub tolerance: Option<f64>,
    /// Spectral estimator; auto uses FFT on evenly sampled windows [default: auto].
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Windows with less than this fraction of expected samples emit 0 [default: 0.1].
    #[arg(long = "min-coverage")]
    pub min_coverage: Option<f64>,
    /// Parameter set: home (24h, 7d, 1h), vle (24h, 7d, 3h), calf (24h, 7d, 15m).
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Min-max normalise the trace to [0, 1].
    #[arg(long)]
    pub normalize: bool,
    /// Subject id stored in the trace [default: input file name up to the first dot].
    #[arg(long)]
    pub subject: Option<String>,
    /// Run configuration (`key = value` lines); flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct StackArgs {
    #[arg(long = "trace", required = true, num_args = 1..)]
    pub traces: Vec<PathBuf>,
    /// Fixed start of the aligned period [default: earliest window start].
    #[arg(long, value_parser = instant_arg)]
    pub start: Option<f64>,
    /// Fixed end of the aligned period [default: latest window end].
    #[arg(long, value_parser = instant_arg)]
    pub end: Option<f64>,
    /// Matrix of normalised values, one column per subject.
    #[arg(long)]
    pub out: PathBuf,
    /// Cohort top line (sum over subjects).
    #[arg(long = "top-line")]
    pub top_line: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct AnnotateArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// Width of each band [default: 7d].
    #[arg(long = "band-width", value_parser = duration_arg)]
    pub band_width: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct StabilityArgs {
    #[arg(long = "trace", required = true, num_args = 1..)]
    pub traces: Vec<PathBuf>,
    /// Number of random sub-groups.
    #[arg(long, default_value_t = 4)]
    pub groups: usize,
    #[arg(long = "rng-seed", default_value_t = 0)]
    pub rng_seed: u64,
    #[arg(long, value_parser = instant_arg)]
    pub start: Option<f64>,
    #[arg(long, value_parser = instant_arg)]
    pub end: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct RenderArgs {
    #[arg(long, value_enum)]
    pub kind: RenderKind,
    /// Trace file (line) or stack matrix (stacked).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Band file from `annotate`, drawn on line charts.
    #[arg(long)]
    pub bands: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Turn raw event logs or accelerometer files into a series file.
    Ingest(IngestArgs),
    /// Compute the periodicity intensity trace of a series.
    Intensity(IntensityArgs),
    /// Align and stack traces into a cohort matrix.
    Stack(StackArgs),
    /// Find the lowest, highest and steepest-change bands of a trace.
    Annotate(AnnotateArgs),
    /// Compare random sub-group top lines with the cohort top line.
    Stability(StabilityArgs),
    /// Draw a trace or a stack as SVG.
    Render(RenderArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(args) => commands::ingest(&args),
        Command::Intensity(args) => commands::intensity(&args),
        Command::Stack(args) => commands::stack(&args),
        Command::Annotate(args) => commands::annotate(&args),
        Command::Stability(args) => commands::stability(&args),
        Command::Render(args) => commands::render(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error kind={} message={:?}", err.kind(), err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
