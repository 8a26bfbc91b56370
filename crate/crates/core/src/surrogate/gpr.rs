//! Gaussian-process regression with a squared-exponential kernel and a
//! constant mean.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest nugget tried before giving up on the Cholesky factorisation.
pub const MAX_NUGGET: f64 = 1e-4;
/// First escalation step when the configured nugget is zero.
const FIRST_NUGGET: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelConfig {
    /// Length scale per normalised coordinate.
    pub theta_r: f64,
    /// Process standard deviation.
    pub sigma_r: f64,
    pub nugget: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            theta_r: 0.99,
            sigma_r: 9.0,
            nugget: 1e-8,
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_r > 0.0 && self.theta_r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "theta_R must be positive, got {}",
                self.theta_r
            )));
        }
        if !(self.sigma_r > 0.0 && self.sigma_r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma_R must be positive, got {}",
                self.sigma_r
            )));
        }
        if !(self.nugget >= 0.0 && self.nugget <= MAX_NUGGET) {
            return Err(Error::InvalidParameter(format!(
                "nugget must lie in [0, {MAX_NUGGET}], got {}",
                self.nugget
            )));
        }
        Ok(())
    }

    /// `σ_R² exp(−|u − v|² / (2 θ_R²))`.
    pub fn kernel(&self, u: &[f64], v: &[f64]) -> f64 {
        let d2: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
        self.sigma_r * self.sigma_r * (-d2 / (2.0 * self.theta_r * self.theta_r)).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug)]
pub struct GprModel {
    cfg: KernelConfig,
    inputs: Vec<Vec<f64>>,
    values: Vec<f64>,
    mean: f64,
    nugget: f64,
    chol: Cholesky<f64, Dyn>,
    /// `(K + nugget·I)⁻¹ (y − mean)`.
    weights: DVector<f64>,
}

impl GprModel {
    pub fn config(&self) -> &KernelConfig {
        &self.cfg
    }

    /// Nugget actually used after any escalation.
    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    pub fn prior_mean(&self) -> f64 {
        self.mean
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when every training value is the same.
    pub fn is_flat(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }

    /// Kernel matrix of the training inputs, without the nugget.
    pub fn kernel_matrix(&self) -> DMatrix<f64> {
        kernel_matrix(&self.cfg, &self.inputs)
    }
}

fn kernel_matrix(cfg: &KernelConfig, x: &[Vec<f64>]) -> DMatrix<f64> {
    let n = x.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = cfg.sigma_r * cfg.sigma_r;
        for j in 0..i {
            let v = cfg.kernel(&x[i], &x[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Fits the GP to `values` observed at unit-box `points`. The nugget starts
/// at `cfg.nugget` and grows tenfold (from at least 1e-10) until the
/// factorisation succeeds or `MAX_NUGGET` is exceeded.
pub fn gpr_fit(points: &[Vec<f64>], values: &[f64], cfg: &KernelConfig) -> Result<GprModel> {
    cfg.validate()?;
    if points.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            got: values.len(),
        });
    }
    if points.len() < 2 {
        return Err(Error::InsufficientData(
            "a GP needs at least 2 points".into(),
        ));
    }
    let d = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: p.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) || points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "GP training data must be finite".into(),
        ));
    }
    if points.iter().all(|p| p == &points[0]) {
        return Err(Error::InsufficientData(
            "a GP needs at least 2 distinct points".into(),
        ));
    }

    let k = kernel_matrix(cfg, points);
    let n = points.len();
    let mut nugget = cfg.nugget;
    let chol = loop {
        let mut m = k.clone();
        for i in 0..n {
            m[(i, i)] += nugget;
        }
        if let Some(c) = m.cholesky() {
            break c;
        }
        let next = (nugget * 10.0).max(FIRST_NUGGET);
        if next > MAX_NUGGET * (1.0 + 1e-12) {
            return Err(Error::Cholesky { nugget });
        }
        nugget = next;
    };

    let mean = values.iter().sum::<f64>() / n as f64;
    let centred = DVector::from_iterator(n, values.iter().map(|v| v - mean));
    let weights = chol.solve(&centred);
    Ok(GprModel {
        cfg: cfg.clone(),
        inputs: points.to_vec(),
        values: values.to_vec(),
        mean,
        nugget,
        chol,
        weights,
    })
}

/// Predictive mean and standard deviation of the latent function.
pub fn gpr_posterior(model: &GprModel, query: &[f64]) -> Posterior {
    let n = model.inputs.len();
    let kx = DVector::from_iterator(n, model.inputs.iter().map(|x| model.cfg.kernel(x, query)));
    let mean = model.mean + kx.dot(&model.weights);
    let mut v = kx;
    model.chol.l_dirty().solve_lower_triangular_mut(&mut v);
    let var = model.cfg.sigma_r * model.cfg.sigma_r - v.norm_squared();
    Posterior {
        mean,
        std: var.max(0.0).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_diagonal_is_sigma_squared() {
        let cfg = KernelConfig::default();
        assert_eq!(cfg.kernel(&[0.3, 0.4], &[0.3, 0.4]), 81.0);
    }

    #[test]
    fn two_point_system_by_hand() {
        let cfg = KernelConfig {
            theta_r: 0.5,
            sigma_r: 2.0,
            nugget: 1e-6,
        };
        let x = vec![vec![0.0], vec![1.0]];
        let y = [1.0, 3.0];
        let m = gpr_fit(&x, &y, &cfg).unwrap();
        let (s2, tau) = (4.0, 1e-6);
        let c = s2 * (-1.0f64 / 0.5).exp();
        let (a, det) = (s2 + tau, (s2 + tau) * (s2 + tau) - c * c);
        let q = 0.25;
        let k1 = s2 * (-(q * q) / 0.5f64).exp();
        let k2 = s2 * (-((1.0 - q) * (1.0 - q)) / 0.5f64).exp();
        // Explicit 2×2 inverse.
        let w1 = (a * (y[0] - 2.0) - c * (y[1] - 2.0)) / det;
        let w2 = (-c * (y[0] - 2.0) + a * (y[1] - 2.0)) / det;
        let mean = 2.0 + k1 * w1 + k2 * w2;
        let var = s2 - (a * k1 * k1 - 2.0 * c * k1 * k2 + a * k2 * k2) / det;
        let p = gpr_posterior(&m, &[q]);
        assert!((p.mean - mean).abs() < 1e-10);
        assert!((p.std - var.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn interpolates_training_points() {
        let cfg = KernelConfig {
            theta_r: 0.2,
            ..KernelConfig::default()
        };
        let x: Vec<Vec<f64>> = (0..6)
            .map(|i| vec![i as f64 / 5.0, (i * i) as f64 / 25.0])
            .collect();
        let y: Vec<f64> = (0..6).map(|i| (i as f64).sin() * 4.0).collect();
        let m = gpr_fit(&x, &y, &cfg).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            let p = gpr_posterior(&m, xi);
            assert!((p.mean - yi).abs() < 10.0 * m.nugget());
            assert!(p.std * p.std <= m.nugget() + 1e-8);
        }
    }

    #[test]
    fn reverts_to_prior_far_away() {
        let x = vec![vec![0.0, 0.0], vec![0.1, 0.0]];
        let m = gpr_fit(&x, &[1.0, 2.0], &KernelConfig::default()).unwrap();
        let p = gpr_posterior(&m, &[50.0, 50.0]);
        assert!((p.mean - 1.5).abs() < 1e-12);
        assert!((p.std - 9.0).abs() < 1e-12);
    }

    #[test]
    fn nugget_escalates_for_near_duplicates() {
        let cfg = KernelConfig {
            theta_r: 50.0,
            nugget: 0.0,
            ..KernelConfig::default()
        };
        let x = vec![vec![0.5, 0.5], vec![0.5, 0.5 + 1e-9]];
        let m = gpr_fit(&x, &[1.0, 1.1], &cfg).unwrap();
        assert!(m.nugget() > 0.0);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let cfg = KernelConfig::default();
        assert!(gpr_fit(&[vec![0.1]], &[1.0], &cfg).is_err());
        assert!(gpr_fit(&[vec![0.1], vec![0.1]], &[1.0, 2.0], &cfg).is_err());
        assert!(gpr_fit(&[vec![0.1], vec![0.2]], &[1.0], &cfg).is_err());
        let bad = KernelConfig {
            theta_r: 0.0,
            ..cfg
        };
        assert!(gpr_fit(&[vec![0.1], vec![0.2]], &[1.0, 2.0], &bad).is_err());
    }
}
