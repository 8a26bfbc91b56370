//! Width-penalised deviance of a fitted classifier on a band set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::mda::MdaClassifier;
use crate::spectra::{BandSet, EnergyMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DevianceJson")]
pub struct DevianceConfig {
    /// Penalty coefficient on `log |α|`.
    pub eta: f64,
    /// Largest total width considered; `eta = 1 / ln w0` by default.
    pub w0: f64,
    /// Posteriors are clipped below at this value before taking logs.
    pub prob_floor: f64,
}

impl DevianceConfig {
    pub fn from_w0(w0: f64) -> Result<Self> {
        if !(w0 > 1.0 && w0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "w0 must exceed 1, got {w0}"
            )));
        }
        Self::new(1.0 / w0.ln(), w0, 1e-12)
    }

    pub fn new(eta: f64, w0: f64, prob_floor: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eta must be positive, got {eta}"
            )));
        }
        if !(prob_floor > 0.0 && prob_floor <= 1e-3) {
            return Err(Error::InvalidParameter(format!(
                "prob_floor must lie in (0, 1e-3], got {prob_floor}"
            )));
        }
        Ok(DevianceConfig {
            eta,
            w0,
            prob_floor,
        })
    }
}

impl Default for DevianceConfig {
    fn default() -> Self {
        DevianceConfig::from_w0(100.0).expect("valid default")
    }
}

/// Partial JSON form: a missing `eta` follows `w0`.
#[derive(Deserialize)]
struct DevianceJson {
    eta: Option<f64>,
    w0: Option<f64>,
    prob_floor: Option<f64>,
}

impl TryFrom<DevianceJson> for DevianceConfig {
    type Error = Error;
    fn try_from(j: DevianceJson) -> Result<Self> {
        let base = DevianceConfig::from_w0(j.w0.unwrap_or(100.0))?;
        DevianceConfig::new(
            j.eta.unwrap_or(base.eta),
            base.w0,
            j.prob_floor.unwrap_or(base.prob_floor),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DevianceTerms {
    /// `-2` times the mean log posterior of the true class.
    pub fit: f64,
    /// `eta * ln(total width)`.
    pub penalty: f64,
    pub total: f64,
}

/// Mean per-row deviance plus the width penalty.
pub fn deviance(
    energies: &EnergyMatrix,
    clf: &MdaClassifier,
    bands: &BandSet,
    cfg: &DevianceConfig,
) -> Result<f64> {
    deviance_terms(energies, clf, bands, cfg).map(|t| t.total)
}

pub fn deviance_terms(
    energies: &EnergyMatrix,
    clf: &MdaClassifier,
    bands: &BandSet,
    cfg: &DevianceConfig,
) -> Result<DevianceTerms> {
    let width = bands.total_width();
    if !(width > 0.0) {
        return Err(Error::InvalidBand(format!(
            "total width must be positive, got {width}"
        )));
    }
    if energies.n_bands() != clf.dim() {
        return Err(Error::DimensionMismatch {
            expected: clf.dim(),
            got: energies.n_bands(),
        });
    }
    if energies.n_rows() == 0 {
        return Err(Error::InsufficientData("no rows to score".into()));
    }
    let mut sum = 0.0;
    for i in 0..energies.n_rows() {
        let p = clf.class_posterior(energies.row(i))?[energies.label(i).index()];
        sum += p.max(cfg.prob_floor).ln();
    }
    let fit = -2.0 * sum / energies.n_rows() as f64;
    let penalty = cfg.eta * width.ln();
    Ok(DevianceTerms {
        fit,
        penalty,
        total: fit + penalty,
    })
}
