//! Synthetic benchmark data, ground-truth metrics and EM convergence bounds.

pub mod generator;
pub mod metrics;
pub mod theory;

pub use generator::{generate_synthetic, sample_spectrum, Bump, SynthConfig};
pub use metrics::{
    average_ranks, consecutive_distances, histogram_from_zero, overlap_stats, spearman,
    total_absolute_error, OverlapStats,
};
pub use theory::*;
