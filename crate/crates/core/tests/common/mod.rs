//! Reference computations shared by the oracle tests and the acceptance run.
#![allow(dead_code)]

use egomda::KernelConfig;
use nalgebra::{DMatrix, DVector};

/// GP predictive mean and variance by a dense LU solve.
pub fn dense_gp(
    x: &[Vec<f64>],
    y: &[f64],
    cfg: &KernelConfig,
    nugget: f64,
    q: &[f64],
) -> (f64, f64) {
    let n = x.len();
    let k = |u: &[f64], v: &[f64]| {
        let d2: f64 = u.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum();
        cfg.sigma_r.powi(2) * (-d2 / (2.0 * cfg.theta_r.powi(2))).exp()
    };
    let mut kk = DMatrix::from_fn(n, n, |i, j| k(&x[i], &x[j]));
    for i in 0..n {
        kk[(i, i)] += nugget;
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let r = DVector::from_iterator(n, y.iter().map(|v| v - mean));
    let kq = DVector::from_iterator(n, x.iter().map(|xi| k(xi, q)));
    let lu = kk.lu();
    let w = lu.solve(&r).expect("non-singular");
    let v = lu.solve(&kq).expect("non-singular");
    (mean + kq.dot(&w), cfg.sigma_r.powi(2) - kq.dot(&v))
}

/// Midpoint sums with `m` points per grid cell, clipped to `[lo, hi]`.
/// Exact up to rounding for a piecewise-linear spectrum.
pub fn riemann_energy(freqs: &[f64], values: &[f64], lo: f64, hi: f64, m: usize) -> f64 {
    let mut total = 0.0;
    for c in 0..freqs.len() - 1 {
        let (x0, x1) = (freqs[c].max(lo), freqs[c + 1].min(hi));
        if x1 <= x0 {
            continue;
        }
        let h = (x1 - x0) / m as f64;
        for i in 0..m {
            let x = x0 + (i as f64 + 0.5) * h;
            let t = (x - freqs[c]) / (freqs[c + 1] - freqs[c]);
            total += h * (values[c] + t * (values[c + 1] - values[c]));
        }
    }
    total
}

/// Gaussian MLE: mean and `1/n` covariance (row-major).
pub fn gaussian_mle(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let mut cov = vec![0.0; d * d];
    for j in 0..d {
        for k in 0..d {
            cov[j * d + k] = rows
                .iter()
                .map(|r| (r[j] - mean[j]) * (r[k] - mean[k]))
                .sum::<f64>()
                / n;
        }
    }
    (mean, cov)
}

/// Monte-Carlo estimate of `E[max(y_min − Y, 0)]` for `Y ~ N(mean, std²)`
/// from standard normal draws; returns the estimate and its standard error.
pub fn mc_improvement(mean: f64, std: f64, y_min: f64, z: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut n, mut sum, mut sq) = (0.0, 0.0, 0.0);
    for v in z {
        let gain = (y_min - (mean + std * v)).max(0.0);
        sum += gain;
        sq += gain * gain;
        n += 1.0;
    }
    let m = sum / n;
    (m, ((sq / n - m * m) / n).sqrt())
}
