//! Gaussian mixtures with one covariance shared by all components, fitted by EM.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::kmeans::KMeansInit;
use crate::samples::Samples;
use crate::spectra::ClassLabel;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
/// Absolute lower bound for the covariance floor, for data with no spread at all.
const MIN_COV_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmSettings {
    pub max_iter: usize,
    /// Stop once the largest absolute parameter change falls below this.
    pub tol: f64,
    /// Covariance eigenvalue floor as a fraction of the data's mean variance.
    pub cov_floor_rel: f64,
}

impl Default for EmSettings {
    fn default() -> Self {
        EmSettings {
            max_iter: 200,
            tol: 1e-8,
            cov_floor_rel: 1e-6,
        }
    }
}

/// Mixture `Σ_k π_k N(μ_k, Σ)` for one class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureModel {
    pub label: ClassLabel,
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Row-major `d × d`.
    pub cov: Vec<f64>,
}

impl MixtureModel {
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    /// `log p(x)` under the mixture.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        let chol = CholeskyFactor::new(&self.cov, self.dim())?;
        Ok(chol.mixture_log_density(&self.weights, &self.means, x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmReport {
    /// Number of M-steps taken.
    pub iterations: usize,
    /// Log-likelihood of the initial parameters followed by the value after
    /// each M-step.
    pub log_likelihood: Vec<f64>,
    pub converged: bool,
    pub final_change: f64,
}

/// Lower-triangular Cholesky factor of a row-major SPD matrix.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct CholeskyFactor {
    lower: Vec<f64>,
    dim: usize,
    log_det: f64,
}

impl CholeskyFactor {
    pub(crate) fn new(cov: &[f64], dim: usize) -> Result<Self> {
        let m = DMatrix::from_row_slice(dim, dim, cov);
        let chol = m.cholesky().ok_or_else(|| {
            Error::InvalidParameter("covariance matrix is not positive definite".into())
        })?;
        let l = chol.l();
        let mut lower = vec![0.0; dim * dim];
        let mut log_det = 0.0;
        for i in 0..dim {
            for j in 0..=i {
                lower[i * dim + j] = l[(i, j)];
            }
            log_det += 2.0 * l[(i, i)].ln();
        }
        Ok(CholeskyFactor {
            lower,
            dim,
            log_det,
        })
    }

    /// `log N(x | mean, Σ)`.
    pub(crate) fn log_normal(&self, x: &[f64], mean: &[f64], z: &mut [f64]) -> f64 {
        let d = self.dim;
        let mut q = 0.0;
        for i in 0..d {
            let mut s = x[i] - mean[i];
            for j in 0..i {
                s -= self.lower[i * d + j] * z[j];
            }
            z[i] = s / self.lower[i * d + i];
            q += z[i] * z[i];
        }
        -0.5 * (d as f64 * LN_2PI + self.log_det + q)
    }

    pub(crate) fn mixture_log_density(
        &self,
        weights: &[f64],
        means: &[Vec<f64>],
        x: &[f64],
    ) -> f64 {
        let mut z = vec![0.0; self.dim];
        let terms: Vec<f64> = weights
            .iter()
            .zip(means)
            .map(|(w, m)| w.ln() + self.log_normal(x, m, &mut z))
            .collect();
        log_sum_exp(&terms)
    }
}

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Clips the eigenvalues of a symmetric row-major matrix from below.
pub(crate) fn floor_eigenvalues(cov: &[f64], dim: usize, floor: f64) -> Vec<f64> {
    if dim == 1 {
        return vec![cov[0].max(floor)];
    }
    let m = DMatrix::from_row_slice(dim, dim, cov);
    let eig = SymmetricEigen::new(m);
    if eig.eigenvalues.iter().all(|&v| v >= floor) {
        return cov.to_vec();
    }
    let clipped = eig.eigenvalues.map(|v| v.max(floor));
    let r = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    let mut out = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            out[i * dim + j] = 0.5 * (r[(i, j)] + r[(j, i)]);
        }
    }
    out
}

/// Covariance floor for `points`: `rel` times the mean per-coordinate variance.
pub(crate) fn covariance_floor(points: &Samples, rel: f64) -> f64 {
    let d = points.dim();
    let cov = points.covariance();
    let mean_diag = (0..d).map(|i| cov[i * d + i]).sum::<f64>() / d as f64;
    (rel * mean_diag).max(MIN_COV_FLOOR)
}

/// Parameters of a shared-covariance mixture during EM.
#[derive(Clone, Debug, PartialEq)]
pub struct EmState {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub cov: Vec<f64>,
    cov_floor: f64,
}

impl EmState {
    /// Starting point from a k-means partition: cluster fractions, centroids
    /// and the pooled within-cluster covariance.
    pub fn from_kmeans(points: &Samples, init: &KMeansInit, settings: &EmSettings) -> Result<Self> {
        let d = points.dim();
        if init.means.iter().any(|m| m.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: init.means[0].len(),
            });
        }
        if init.assignments.len() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: init.assignments.len(),
            });
        }
        let mut cov = vec![0.0; d * d];
        for (x, &a) in points.rows().zip(&init.assignments) {
            let m = &init.means[a];
            for i in 0..d {
                for j in 0..d {
                    cov[i * d + j] += (x[i] - m[i]) * (x[j] - m[j]);
                }
            }
        }
        cov.iter_mut().for_each(|c| *c /= points.len() as f64);
        Self::new(
            points,
            init.weights.clone(),
            init.means.clone(),
            cov,
            settings,
        )
    }

    pub fn new(
        points: &Samples,
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        cov: Vec<f64>,
        settings: &EmSettings,
    ) -> Result<Self> {
        let d = points.dim();
        if weights.len() != means.len() || weights.is_empty() {
            return Err(Error::InvalidParameter(
                "weights and means disagree on K".into(),
            ));
        }
        if cov.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: cov.len(),
            });
        }
        let cov_floor = covariance_floor(points, settings.cov_floor_rel);
        let cov = floor_eigenvalues(&cov, d, cov_floor);
        Ok(EmState {
            weights,
            means,
            cov,
            cov_floor,
        })
    }

    pub fn cov_floor(&self) -> f64 {
        self.cov_floor
    }

    /// Log-likelihood of `points` under the current parameters.
    pub fn log_likelihood(&self, points: &Samples) -> Result<f64> {
        let chol = CholeskyFactor::new(&self.cov, points.dim())?;
        Ok(points
            .rows()
            .map(|x| chol.mixture_log_density(&self.weights, &self.means, x))
            .sum())
    }

    /// One E-step plus M-step. Returns the log-likelihood of the parameters
    /// before the update and the largest absolute parameter change.
    pub fn step(&mut self, points: &Samples) -> Result<(f64, f64)> {
        let d = points.dim();
        let k = self.weights.len();
        let n = points.len();
        let chol = CholeskyFactor::new(&self.cov, d)?;
        let log_w: Vec<f64> = self.weights.iter().map(|w| w.ln()).collect();

        let mut z = vec![0.0; d];
        let mut terms = vec![0.0; k];
        let mut resp = vec![0.0; n * k];
        let mut loglik = 0.0;
        for (i, x) in points.rows().enumerate() {
            for c in 0..k {
                terms[c] = log_w[c] + chol.log_normal(x, &self.means[c], &mut z);
            }
            let lse = log_sum_exp(&terms);
            loglik += lse;
            for c in 0..k {
                resp[i * k + c] = (terms[c] - lse).exp();
            }
        }

        let mut nk = vec![0.0; k];
        let mut sums = vec![vec![0.0; d]; k];
        for (i, x) in points.rows().enumerate() {
            for c in 0..k {
                let r = resp[i * k + c];
                nk[c] += r;
                for (s, v) in sums[c].iter_mut().zip(x) {
                    *s += r * v;
                }
            }
        }
        let means: Vec<Vec<f64>> = (0..k)
            .map(|c| {
                if nk[c] > 0.0 {
                    sums[c].iter().map(|s| s / nk[c]).collect()
                } else {
                    self.means[c].clone()
                }
            })
            .collect();
        let weights: Vec<f64> = nk.iter().map(|v| v / n as f64).collect();

        let mut scatter = vec![0.0; d * d];
        let mut diff = vec![0.0; d];
        for (i, x) in points.rows().enumerate() {
            for c in 0..k {
                let r = resp[i * k + c];
                if r == 0.0 {
                    continue;
                }
                for a in 0..d {
                    diff[a] = x[a] - means[c][a];
                }
                for a in 0..d {
                    for b in 0..=a {
                        scatter[a * d + b] += r * diff[a] * diff[b];
                    }
                }
            }
        }
        for a in 0..d {
            for b in 0..=a {
                scatter[a * d + b] /= n as f64;
                scatter[b * d + a] = scatter[a * d + b];
            }
        }
        let cov = floor_eigenvalues(&scatter, d, self.cov_floor);

        let mut change: f64 = 0.0;
        for c in 0..k {
            change = change.max((weights[c] - self.weights[c]).abs());
            for a in 0..d {
                change = change.max((means[c][a] - self.means[c][a]).abs());
            }
        }
        for (a, b) in cov.iter().zip(&self.cov) {
            change = change.max((a - b).abs());
        }
        self.weights = weights;
        self.means = means;
        self.cov = cov;
        Ok((loglik, change))
    }

    pub fn into_model(self, label: ClassLabel) -> MixtureModel {
        MixtureModel {
            label,
            weights: self.weights,
            means: self.means,
            cov: self.cov,
        }
    }
}

/// EM for a shared-covariance mixture of one class's points, started from a
/// k-means partition. Stops after `max_iter` M-steps or once the largest
/// parameter change is below `tol`. Covariance eigenvalues never drop below
/// the floor, which keeps degenerate (e.g. constant) features usable.
pub fn em_fit(
    points: &Samples,
    label: ClassLabel,
    init: &KMeansInit,
    settings: &EmSettings,
) -> Result<(MixtureModel, EmReport)> {
    if points.len() < init.means.len() {
        return Err(Error::InsufficientData(format!(
            "{} points for {} components",
            points.len(),
            init.means.len()
        )));
    }
    let state = EmState::from_kmeans(points, init, settings)?;
    run_em(points, label, state, settings)
}

pub fn run_em(
    points: &Samples,
    label: ClassLabel,
    mut state: EmState,
    settings: &EmSettings,
) -> Result<(MixtureModel, EmReport)> {
    let mut trace = Vec::with_capacity(settings.max_iter + 1);
    let mut iterations = 0;
    let mut converged = false;
    let mut final_change = f64::INFINITY;
    for it in 1..=settings.max_iter {
        let (ll, change) = state.step(points)?;
        trace.push(ll);
        iterations = it;
        final_change = change;
        if change < settings.tol {
            converged = true;
            break;
        }
    }
    trace.push(state.log_likelihood(points)?);
    Ok((
        state.into_model(label),
        EmReport {
            iterations,
            log_likelihood: trace,
            converged,
            final_change,
        },
    ))
}
