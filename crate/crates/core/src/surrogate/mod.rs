//! Gaussian-process surrogate of the deviance and the expected-improvement
//! acquisition.

pub mod ei;
pub mod gpr;
pub mod normalize;

pub use ei::{expected_improvement, maximize_ei, maximize_ei_with, EiMaximum, EiSearch};
pub use gpr::{gpr_fit, gpr_posterior, GprModel, KernelConfig, Posterior};
pub use normalize::UnitBox;
