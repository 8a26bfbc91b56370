//! Two-class synthetic spectra with one triangular bump per class.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::spectra::{Band, BandSet, ClassLabel, FrequencyGrid, SpectrumSet};

/// Inside `band`, a grid point is drawn from `N(peak − slope·|f − centre|, 1)`
/// with probability `weight` and from `N(0, 1)` otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub band: Band,
    pub peak: f64,
    pub slope: f64,
    pub weight: f64,
}

impl Bump {
    pub fn centre(&self) -> f64 {
        0.5 * (self.band.lo + self.band.hi)
    }

    /// Mean of the bump component at `f`, or `None` outside the band.
    pub fn component_mean(&self, f: f64) -> Option<f64> {
        (f >= self.band.lo && f <= self.band.hi)
            .then(|| self.peak - self.slope * (f - self.centre()).abs())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_per_class: usize,
    pub grid_start: f64,
    pub grid_step: f64,
    pub grid_count: usize,
    pub bump_a: Bump,
    pub bump_b: Bump,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_per_class: 1000,
            grid_start: 0.0,
            grid_step: 1.0,
            grid_count: 101,
            bump_a: Bump {
                band: Band { lo: 21.0, hi: 25.0 },
                peak: 69.0,
                slope: 16.0,
                weight: 0.2,
            },
            bump_b: Bump {
                band: Band { lo: 51.0, hi: 55.0 },
                peak: 84.0,
                slope: 16.0,
                weight: 0.2,
            },
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::uniform(self.grid_start, self.grid_step, self.grid_count)
    }

    /// The generating bands `{α₁*, α₂*}`.
    pub fn truth(&self) -> Result<BandSet> {
        BandSet::new(vec![self.bump_a.band, self.bump_b.band])
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_per_class == 0 {
            return Err(Error::InvalidParameter(
                "need at least one realization per class".into(),
            ));
        }
        let grid = self.grid()?;
        for b in [&self.bump_a, &self.bump_b] {
            if !grid.contains(&b.band) {
                return Err(Error::BandOutOfRange {
                    lo: b.band.lo,
                    hi: b.band.hi,
                    min: grid.min(),
                    max: grid.max(),
                });
            }
            if !(0.0..=1.0).contains(&b.weight) {
                return Err(Error::InvalidParameter(format!(
                    "bump weight {} outside [0, 1]",
                    b.weight
                )));
            }
        }
        Ok(())
    }
}

/// One realization: independent draws per grid point.
pub fn sample_spectrum<R: Rng>(freqs: &[f64], bump: &Bump, rng: &mut R) -> Vec<f64> {
    freqs
        .iter()
        .map(|&f| {
            let z: f64 = StandardNormal.sample(rng);
            match bump.component_mean(f) {
                Some(m) if rng.random::<f64>() < bump.weight => m + z,
                _ => z,
            }
        })
        .collect()
}

/// Class A and class B spectra. Realization `i` of class `r` uses its own
/// derived stream, so the output does not depend on the thread count.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<(SpectrumSet, SpectrumSet)> {
    cfg.validate()?;
    let grid = Arc::new(cfg.grid()?);
    let make = |label: ClassLabel, bump: &Bump, domain: u64| -> Result<SpectrumSet> {
        let rows: Vec<Vec<f64>> = (0..cfg.n_per_class)
            .into_par_iter()
            .map(|i| {
                sample_spectrum(
                    grid.freqs(),
                    bump,
                    &mut seed::rng(cfg.seed, domain, i as u64),
                )
            })
            .collect();
        SpectrumSet::new(label, grid.clone(), rows)
    };
    Ok((
        make(ClassLabel::A, &cfg.bump_a, seed::domain::SYNTH_A)?,
        make(ClassLabel::B, &cfg.bump_b, seed::domain::SYNTH_B)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_means_at_centres() {
        let c = SynthConfig::default();
        assert_eq!(c.bump_a.component_mean(23.0), Some(69.0));
        assert_eq!(c.bump_a.component_mean(21.0), Some(37.0));
        assert_eq!(c.bump_b.component_mean(53.0), Some(84.0));
        assert_eq!(c.bump_b.component_mean(30.0), None);
    }

    #[test]
    fn shape_and_determinism() {
        let cfg = SynthConfig {
            n_per_class: 3,
            seed: 11,
            ..SynthConfig::default()
        };
        let (a, b) = generate_synthetic(&cfg).unwrap();
        assert_eq!((a.len(), b.len(), a.grid().len()), (3, 3, 101));
        let (a2, _) = generate_synthetic(&cfg).unwrap();
        assert_eq!(a, a2);
    }
}
