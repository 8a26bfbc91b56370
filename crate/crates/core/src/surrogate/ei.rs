//! Expected improvement and its maximisation over the unit box.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::baselines::nelder_mead::{nelder_mead, NmConfig};
use crate::seed;
use crate::surrogate::gpr::{gpr_posterior, GprModel, Posterior};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Candidates kept for simplex polishing.
pub const POLISH_STARTS: usize = 5;

pub fn std_normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `E[max(y_min − Y, 0)]` for `Y ~ N(mean, std²)`.
pub fn expected_improvement(post: Posterior, y_min: f64) -> f64 {
    let gap = y_min - post.mean;
    if post.std <= 0.0 {
        return gap.max(0.0);
    }
    let z = gap / post.std;
    (gap * std_normal_cdf(z) + post.std * std_normal_pdf(z)).max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EiMaximum {
    /// Point proposed by the search, in the unit box.
    pub point: Vec<f64>,
    /// Image of `point` under the canonicalising map (equal to `point` for
    /// the plain search).
    pub canonical: Vec<f64>,
    pub ei: f64,
    /// Set when the surrogate is flat or no candidate has positive EI; the
    /// returned point is then an arbitrary candidate.
    pub flat: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EiSearch {
    /// Uniform random candidates scored before polishing.
    pub budget: usize,
    pub polish: NmConfig,
}

impl Default for EiSearch {
    fn default() -> Self {
        EiSearch {
            budget: 2000,
            polish: NmConfig {
                initial_step: 0.05,
                max_evals: 200,
                tol: 1e-4,
                ..NmConfig::default()
            },
        }
    }
}

/// Maximises EI over `[0, 1]^d`.
pub fn maximize_ei(model: &GprModel, y_min: f64, budget: usize, seed: u64) -> EiMaximum {
    let search = EiSearch {
        budget,
        ..EiSearch::default()
    };
    maximize_ei_with(model, y_min, &search, seed, |u| u.to_vec())
}

/// Maximises `EI(canon(u))` over `u ∈ [0, 1]^d`, where `canon` maps a raw
/// point to the point that would actually be evaluated.
pub fn maximize_ei_with<C>(
    model: &GprModel,
    y_min: f64,
    search: &EiSearch,
    seed: u64,
    canon: C,
) -> EiMaximum
where
    C: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let d = model.dim();
    let budget = search.budget.max(1);
    let mut rng = seed::rng(seed, seed::domain::ACQUISITION, 0);
    let candidates: Vec<Vec<f64>> = (0..budget)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();
    let score = |u: &[f64]| expected_improvement(gpr_posterior(model, &canon(u)), y_min);

    let scores: Vec<f64> = candidates.par_iter().map(|u| score(u)).collect();
    let mut order: Vec<usize> = (0..budget).collect();
    // Descending EI, ties by candidate index.
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

    let mut best = (candidates[order[0]].clone(), scores[order[0]]);
    if model.is_flat() || best.1 <= 0.0 {
        let canonical = canon(&best.0);
        return EiMaximum {
            point: best.0,
            canonical,
            ei: best.1,
            flat: true,
        };
    }

    let clamp = |u: &[f64]| -> Vec<f64> { u.iter().map(|v| v.clamp(0.0, 1.0)).collect() };
    for &start in order.iter().take(POLISH_STARTS) {
        let res = nelder_mead(|u| -score(&clamp(u)), &candidates[start], &search.polish);
        if let Ok(r) = res {
            let x = clamp(&r.x);
            let v = score(&x);
            if v > best.1 {
                best = (x, v);
            }
        }
    }
    let canonical = canon(&best.0);
    EiMaximum {
        point: best.0,
        canonical,
        ei: best.1,
        flat: false,
    }
}
