//! Command-line flags. Every command that takes `--config` reads a JSON file
//! mirroring its settings first; flags given on the command line win.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "egomda",
    version,
    about = "Find the frequency bands that best separate two classes of spectra"
)]
pub struct Cli {
    /// Worker threads for candidate scoring, forests and data generation.
    /// Results do not depend on this value.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the two-class synthetic benchmark.
    Synth(SynthArgs),
    /// Search for discriminating bands with EGO-MDA.
    Discover(DiscoverArgs),
    /// Run the competing band-search methods side by side.
    Compare(CompareArgs),
    /// Replicate the EM convergence-bound experiments.
    Diagnose(DiagnoseArgs),
    /// Summarise a discovery result.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Realizations per class.
    #[arg(long = "n")]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InitArg {
    Lhs,
    Random,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Spectra CSV of class A (first row: frequencies).
    #[arg(long)]
    pub class_a: PathBuf,
    /// Spectra CSV of class B.
    #[arg(long)]
    pub class_b: PathBuf,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Number of bands L.
    #[arg(short = 'L', long = "bands")]
    pub bands: Option<usize>,
    /// Mixture components per class.
    #[arg(short = 'K', long)]
    pub k: Option<usize>,
    /// Width-penalty coefficient; `1 / ln w0` when only `--w0` is given.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Reference total width for the default penalty coefficient.
    #[arg(long)]
    pub w0: Option<f64>,
    /// Narrowest band allowed (Hz); one grid spacing by default.
    #[arg(long)]
    pub min_width: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// EGO iterations after the initial design.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Size of the initial design.
    #[arg(long)]
    pub n_init: Option<usize>,
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    /// Fraction of each class held out for scoring.
    #[arg(long)]
    pub holdout: Option<f64>,
    /// Frequency range searched, as `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub range: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated subset of r-mda, rf-mda, nm-mda, ego-mda.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Random band sets for R-MDA (also the EGO-MDA initial designs).
    #[arg(long)]
    pub r_draws: Option<usize>,
    #[arg(long)]
    pub rf_trees: Option<usize>,
    #[arg(long)]
    pub rf_repeats: Option<usize>,
    /// Uniform band width for RF-MDA (Hz).
    #[arg(long)]
    pub band_width: Option<f64>,
    /// Objective evaluations per NM-MDA run.
    #[arg(long)]
    pub nm_evals: Option<usize>,
    #[arg(long)]
    pub ego_runs: Option<usize>,
    #[arg(long)]
    pub ego_iterations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Which replication: 1 (well-specified mixture) or 2 (misspecified).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub prop: u8,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub t_max: Option<usize>,
    /// Sample size per run.
    #[arg(long = "n")]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// `bands.json` written by `discover`.
    pub result: PathBuf,
    /// True band boundaries as `lo1,hi1,lo2,hi2,...`.
    #[arg(long, value_delimiter = ',')]
    pub truth: Option<Vec<f64>>,
}
