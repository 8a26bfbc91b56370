//! Ground-truth comparison metrics for recovered band sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::BandSet;

/// `Σ_i |lo_i − lo_i*| + |hi_i − hi_i*|` with bands paired in sorted order.
pub fn total_absolute_error(bands: &BandSet, truth: &BandSet) -> Result<f64> {
    if bands.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: bands.len(),
        });
    }
    // BandSet keeps its bands sorted by lo.
    Ok(bands
        .boundaries()
        .iter()
        .zip(truth.boundaries())
        .map(|(a, b)| (a - b).abs())
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapStats {
    /// Share of solutions in which every true band lies inside one solution band.
    pub complete: f64,
    /// Share of solutions that intersect at least one true band.
    pub partial: f64,
    /// Mean of `total width / true total width`, minus one.
    pub width_ratio: f64,
}

pub fn overlap_stats(history: &[BandSet], truth: &BandSet) -> Result<OverlapStats> {
    if history.is_empty() {
        return Err(Error::InsufficientData("empty history".into()));
    }
    let n = history.len() as f64;
    let mut complete = 0usize;
    let mut partial = 0usize;
    let mut ratio = 0.0;
    for s in history {
        if truth
            .bands()
            .iter()
            .all(|t| s.bands().iter().any(|b| b.contains_band(t)))
        {
            complete += 1;
        }
        if truth
            .bands()
            .iter()
            .any(|t| s.bands().iter().any(|b| b.intersection(t) > 0.0))
        {
            partial += 1;
        }
        ratio += s.total_width() / truth.total_width();
    }
    Ok(OverlapStats {
        complete: complete as f64 / n,
        partial: partial as f64 / n,
        width_ratio: ratio / n - 1.0,
    })
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation; `NaN` when either input is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData(
            "need two pairs for a correlation".into(),
        ));
    }
    Ok(pearson(&average_ranks(x), &average_ranks(y)))
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Euclidean distances between consecutive boundary vectors.
pub fn consecutive_distances(solutions: &[BandSet]) -> Vec<f64> {
    solutions
        .windows(2)
        .map(|w| {
            w[0].boundaries()
                .iter()
                .zip(w[1].boundaries())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

/// Counts of `values` in `bins` equal-width bins spanning `[0, max]`.
pub fn histogram_from_zero(values: &[f64], bins: usize) -> Vec<usize> {
    let mut counts = vec![0usize; bins.max(1)];
    let max = values.iter().copied().fold(0.0, f64::max);
    for &v in values {
        let i = if max > 0.0 {
            ((v / max) * bins as f64).floor() as usize
        } else {
            0
        };
        counts[i.min(bins - 1)] += 1;
    }
    counts
}
