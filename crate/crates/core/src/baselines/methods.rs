//! RF-MDA, R-MDA and NM-MDA band searches.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::forest::{rf_importance, RfConfig};
use crate::baselines::nelder_mead::{nelder_mead, NmConfig};
use crate::ego::{evaluate_bands, Dataset};
use crate::error::{Error, Result};
use crate::mixture::{DevianceConfig, MdaSettings};
use crate::seed;
use crate::spectra::{energy_matrix, repair_within, Band, BandSet, FrequencyGrid};

/// Contiguous equal-width bands tiling a frequency range. When the range is
/// not a multiple of the width the last band is narrower.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformBandGrid {
    pub band_width: f64,
    pub bands: Vec<Band>,
}

impl UniformBandGrid {
    pub fn new(lower: f64, upper: f64, band_width: f64) -> Result<Self> {
        if !(band_width > 0.0 && upper > lower) {
            return Err(Error::InvalidParameter(format!(
                "cannot tile [{lower}, {upper}] with width {band_width}"
            )));
        }
        let count = ((upper - lower) / band_width - 1e-9).ceil().max(1.0) as usize;
        let bands = (0..count)
            .map(|i| Band {
                lo: lower + i as f64 * band_width,
                hi: (lower + (i + 1) as f64 * band_width).min(upper),
            })
            .collect();
        Ok(UniformBandGrid { band_width, bands })
    }

    /// Default tiling: 25 bands over the grid range.
    pub fn for_grid(grid: &FrequencyGrid, band_width: Option<f64>) -> Result<Self> {
        Self::new(
            grid.min(),
            grid.max(),
            band_width.unwrap_or(grid.span() / 25.0),
        )
    }

    pub fn band_set(&self) -> BandSet {
        BandSet::new(self.bands.clone()).expect("tiling is a valid band set")
    }
}

/// A scored band set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredBands {
    pub bands: BandSet,
    pub deviance: f64,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfMdaResult {
    pub selected: ScoredBands,
    pub uniform: UniformBandGrid,
    pub importance: Vec<f64>,
}

/// Ranks the uniform bands by forest importance and scores the top `top_l`.
pub fn rf_mda(
    data: &Dataset,
    band_width: Option<f64>,
    top_l: usize,
    rf: &RfConfig,
    mda: &MdaSettings,
    deviance: &DevianceConfig,
) -> Result<RfMdaResult> {
    let uniform = UniformBandGrid::for_grid(data.grid(), band_width)?;
    if top_l == 0 || top_l > uniform.bands.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot pick {top_l} of {} uniform bands",
            uniform.bands.len()
        )));
    }
    let energies = energy_matrix(data.fit_sets(), &uniform.band_set())?;
    let importance = rf_importance(&energies, rf)?;
    let mut order: Vec<usize> = (0..importance.len()).collect();
    order.sort_by(|&a, &b| importance[b].total_cmp(&importance[a]).then(a.cmp(&b)));
    let picked = BandSet::new(order[..top_l].iter().map(|&i| uniform.bands[i]).collect())?;
    let eval = evaluate_bands(&picked, data, mda, deviance)?;
    Ok(RfMdaResult {
        selected: ScoredBands {
            bands: picked,
            deviance: eval.deviance,
            accuracy: eval.accuracy,
        },
        uniform,
        importance,
    })
}

/// A random band set and the uniform draws behind it: per band, a location
/// fraction and a width fraction, both in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomBands {
    pub unit: Vec<f64>,
    pub boundaries: Vec<f64>,
}

/// Per band: width `w ~ U(min_width, (upper − lower)/L)` and
/// `lo ~ U(lower, upper − w)`.
pub fn draw_random_boundaries<R: Rng>(
    l: usize,
    lower: f64,
    upper: f64,
    min_width: f64,
    rng: &mut R,
) -> RandomBands {
    let max_width = ((upper - lower) / l as f64).max(min_width);
    let mut unit = Vec::with_capacity(2 * l);
    let mut boundaries = Vec::with_capacity(2 * l);
    for _ in 0..l {
        let (u_loc, u_w): (f64, f64) = (rng.random(), rng.random());
        let w = min_width + u_w * (max_width - min_width);
        let lo = lower + u_loc * (upper - w - lower);
        unit.extend([u_loc, u_w]);
        boundaries.extend([lo, lo + w]);
    }
    RandomBands { unit, boundaries }
}

/// Random band settings inside a frequency neighbourhood.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RMdaConfig {
    pub n_bands: usize,
    /// Range searched; the grid range when unset.
    pub neighborhood: Option<[f64; 2]>,
    pub n_draws: usize,
    /// One grid spacing when unset.
    pub min_width: Option<f64>,
    pub seed: u64,
}

/// Raw and repaired boundary vectors of every R-MDA draw.
pub fn r_mda_draws(grid: &FrequencyGrid, cfg: &RMdaConfig) -> Result<Vec<(Vec<f64>, BandSet)>> {
    let [lower, upper] = cfg.neighborhood.unwrap_or([grid.min(), grid.max()]);
    if !(lower >= grid.min() && upper <= grid.max() && upper > lower) {
        return Err(Error::BandOutOfRange {
            lo: lower,
            hi: upper,
            min: grid.min(),
            max: grid.max(),
        });
    }
    if cfg.n_bands == 0 {
        return Err(Error::InvalidParameter("L must be at least 1".into()));
    }
    let min_width = cfg.min_width.unwrap_or_else(|| grid.min_spacing());
    (0..cfg.n_draws)
        .map(|i| {
            let mut rng = seed::rng(cfg.seed, seed::domain::RANDOM_BANDS, i as u64);
            let raw =
                draw_random_boundaries(cfg.n_bands, lower, upper, min_width, &mut rng).boundaries;
            let bands = repair_within(&raw, min_width, lower, upper)?;
            Ok((raw, bands))
        })
        .collect()
}

/// Scores `n_draws` random band sets.
pub fn r_mda(
    data: &Dataset,
    cfg: &RMdaConfig,
    mda: &MdaSettings,
    deviance: &DevianceConfig,
) -> Result<Vec<ScoredBands>> {
    r_mda_draws(data.grid(), cfg)?
        .into_par_iter()
        .map(|(_, bands)| {
            let e = evaluate_bands(&bands, data, mda, deviance)?;
            Ok(ScoredBands {
                bands,
                deviance: e.deviance,
                accuracy: e.accuracy,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NmMdaResult {
    pub best: ScoredBands,
    pub initial_deviance: f64,
    pub evaluations: usize,
}

/// Nelder-Mead over the boundary vector, repairing every iterate before it
/// is scored. Failed evaluations count as `+∞`.
pub fn nm_mda(
    data: &Dataset,
    init: &BandSet,
    nm: &NmConfig,
    min_width: Option<f64>,
    mda: &MdaSettings,
    deviance: &DevianceConfig,
) -> Result<NmMdaResult> {
    let grid = data.grid();
    let min_width = min_width.unwrap_or_else(|| grid.min_spacing());
    let score = |x: &[f64]| {
        repair_within(x, min_width, grid.min(), grid.max())
            .and_then(|b| evaluate_bands(&b, data, mda, deviance))
            .map_or(f64::INFINITY, |e| e.deviance)
    };
    let x0 = init.boundaries();
    let initial_deviance = evaluate_bands(init, data, mda, deviance)?.deviance;
    let r = nelder_mead(score, &x0, nm)?;
    let bands = repair_within(&r.x, min_width, grid.min(), grid.max())?;
    let e = evaluate_bands(&bands, data, mda, deviance)?;
    Ok(NmMdaResult {
        best: ScoredBands {
            bands,
            deviance: e.deviance,
            accuracy: e.accuracy,
        },
        initial_deviance,
        evaluations: r.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_grid_tiles_range() {
        let g = UniformBandGrid::new(0.0, 100.0, 4.0).unwrap();
        assert_eq!(g.bands.len(), 25);
        assert_eq!(
            g.bands[24],
            Band {
                lo: 96.0,
                hi: 100.0
            }
        );
        let g = UniformBandGrid::new(0.0, 10.0, 4.0).unwrap();
        assert_eq!(g.bands.last(), Some(&Band { lo: 8.0, hi: 10.0 }));
        let total: f64 = g.bands.iter().map(Band::width).sum();
        assert!((total - 10.0).abs() < 1e-12);
    }

    #[test]
    fn random_boundaries_stay_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let d = draw_random_boundaries(2, 10.0, 60.0, 1.0, &mut rng);
            for pair in d.boundaries.chunks(2) {
                assert!(pair[0] >= 10.0 && pair[1] <= 60.0 && pair[1] - pair[0] >= 1.0 - 1e-12);
            }
        }
    }
}
