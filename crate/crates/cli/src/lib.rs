//! Subcommands of the `egomda` binary. Each command reads its inputs, runs
//! one experiment and writes its outputs plus a `manifest.json` into the
//! output directory.

pub mod args;
pub mod commands;
pub mod manifest;

pub use args::{Cli, Command};
pub use manifest::{hash_file, InputHash, RunManifest};

use anyhow::Context;

/// Runs a parsed command line.
pub fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Synth(a) => commands::synth(&a),
        Command::Discover(a) => commands::discover(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Diagnose(a) => commands::diagnose(&a),
        Command::Report(a) => commands::report(&a, &mut std::io::stdout().lock()),
    }
}
