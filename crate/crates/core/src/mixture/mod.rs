//! Class-conditional Gaussian mixtures and the discriminant built on them.

pub mod deviance;
pub mod gmm;
pub mod kmeans;
pub mod mda;

pub use deviance::{deviance, deviance_terms, DevianceConfig, DevianceTerms};
pub use gmm::{em_fit, run_em, EmReport, EmSettings, EmState, MixtureModel};
pub use kmeans::{kmeans_init, KMeansInit};
pub use mda::{accuracy, fit_mda, label_from_posterior, MdaClassifier, MdaSettings};
