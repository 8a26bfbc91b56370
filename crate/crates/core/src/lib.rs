//! Search for the frequency bands whose energies best separate two classes
//! of spectra.

pub mod baselines;
pub mod ego;
pub mod error;
pub mod mixture;
pub mod samples;
pub mod seed;
pub mod spectra;
pub mod surrogate;
pub mod synth;

pub use baselines::*;
pub use ego::*;
pub use error::{Error, Result};
pub use mixture::*;
pub use samples::Samples;
pub use spectra::*;
pub use surrogate::*;
pub use synth::*;
