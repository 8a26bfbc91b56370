//! Competing band-search methods and the harness that runs them side by side.

pub mod compare;
pub mod forest;
pub mod methods;
pub mod nelder_mead;

pub use compare::{
    compare_methods, deviance_hash, quantile, CompareConfig, ComparisonTable, Method, MethodSummary,
};
pub use forest::{rf_importance, train_forest, RandomForest, RfConfig};
pub use methods::{
    draw_random_boundaries, nm_mda, r_mda, r_mda_draws, rf_mda, NmMdaResult, RMdaConfig,
    RandomBands, RfMdaResult, ScoredBands, UniformBandGrid,
};
pub use nelder_mead::{nelder_mead, NmConfig, NmResult};
