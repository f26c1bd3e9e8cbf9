use std::path::PathBuf;

use chim_core::metrics::Scheme;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "chim",
    version,
    about = "Simulate, import and evaluate multipath channel-image datasets"
)]
pub struct Cli {
    /// key=value file supplying defaults for the subcommand's flags; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a dataset of fading grids for one profile and speed.
    Simulate(SimulateArgs),
    /// Convert a CSI capture (CSV) into a dataset.
    Import(ImportArgs),
    /// Compute LCR, AFD, mean autocorrelation or its cepstrum for a dataset.
    Metrics(MetricsArgs),
    /// Cepstral distance matrix between reference and candidate datasets.
    Compare(CompareArgs),
    /// Export one sample as a graymap of |H| plus a CSV of the grid.
    Render(RenderArgs),
    /// Split a dataset into two disjoint, seeded parts.
    Split(SplitArgs),
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct SimulateArgs {
    /// Built-in profile (etu, eva, peda) or a path to a profile file.
    #[arg(long)]
    pub profile: String,
    #[arg(long)]
    pub count: usize,
    /// User speed in km/h.
    #[arg(long, default_value_t = 50.0)]
    pub speed: f64,
    /// Defaults to $CHIM_SEED, then 0.
    #[arg(long, env = "CHIM_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 72)]
    pub subcarriers: usize,
    #[arg(long, default_value_t = 14)]
    pub slots: usize,
    /// Subcarrier spacing in Hz.
    #[arg(long, default_value_t = 15e3)]
    pub spacing: f64,
    /// Slot duration in seconds.
    #[arg(long, default_value_t = chim_core::sim::DEFAULT_SLOT_DURATION)]
    pub slot_duration: f64,
    /// Carrier frequency in Hz.
    #[arg(long, default_value_t = 2.1e9)]
    pub carrier: f64,
    /// Sinusoids per tap.
    #[arg(long, default_value_t = 64)]
    pub paths: usize,
    /// Normalize the stored planes.
    #[arg(long, value_enum)]
    pub normalize: Option<Normalization>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Normalization {
    GlobalMax,
    GlobalPercentile,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct ImportArgs {
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long, default_value_t = 56)]
    pub subcarriers: usize,
    #[arg(long, default_value_t = 14)]
    pub slots: usize,
    /// Skip one header row.
    #[arg(long)]
    pub header: bool,
    /// Rows hold magnitude,phase pairs instead of real,imag.
    #[arg(long)]
    pub magnitude_phase: bool,
    /// Channel type recorded for every sample.
    #[arg(long, default_value = "CSI")]
    pub label: String,
    /// User speed recorded for every sample, km/h.
    #[arg(long, default_value_t = 0.0)]
    pub speed: f32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Lcr,
    Afd,
    Autocorr,
    Cepstrum,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct MetricsArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum)]
    pub which: Metric,
    /// ifft-time for lcr/afd (the only valid choice), freq-concat otherwise.
    #[arg(long)]
    pub scheme: Option<Scheme>,
    #[arg(long, default_value_t = chim_core::metrics::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Slot duration of the dataset in seconds; sets the LCR/AFD time base.
    #[arg(long, default_value_t = chim_core::sim::DEFAULT_SLOT_DURATION)]
    pub slot_duration: f64,
    /// Lowest level, dB relative to RMS.
    #[arg(long, default_value_t = -30.0, allow_negative_numbers = true)]
    pub level_min: f64,
    /// Highest level, dB relative to RMS.
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub level_max: f64,
    #[arg(long, default_value_t = 40)]
    pub level_count: usize,
    /// CSV output; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct CompareArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub reference: Vec<PathBuf>,
    #[arg(long, num_args = 1.., required = true)]
    pub candidate: Vec<PathBuf>,
    /// Number of lower cepstral coefficients.
    #[arg(long, default_value_t = chim_core::metrics::DEFAULT_K)]
    pub k: usize,
    #[arg(long, default_value_t = Scheme::FreqConcat)]
    pub scheme: Scheme,
    #[arg(long, default_value_t = chim_core::metrics::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// JSON output; printed after the table when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct RenderArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Graymap (PGM) path.
    #[arg(long)]
    pub out: PathBuf,
    /// Grid CSV path; defaults to the graymap path with a .csv extension.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct SplitArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Share of samples in the first output.
    #[arg(long, default_value_t = 0.5)]
    pub fraction: f64,
    #[arg(long, env = "CHIM_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_a: PathBuf,
    #[arg(long)]
    pub out_b: PathBuf,
}
