//! Sample-size requirements and EM error bounds for well-specified and
//! misspecified Gaussian mixtures, with seeded replications to compare them
//! against.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::gmm::{EmSettings, EmState};
use crate::samples::Samples;
use crate::seed;

/// Parameters of the well-specified mixture bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Prop1Params {
    pub k: usize,
    pub d: usize,
    pub pi_min: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub lambda: f64,
    pub delta: f64,
    pub c: f64,
    pub c1: f64,
}

impl Default for Prop1Params {
    /// Two unit-variance components at 3 and 21 with equal weights.
    fn default() -> Self {
        Prop1Params {
            k: 2,
            d: 1,
            pi_min: 0.5,
            r_min: 18.0,
            r_max: 18.0,
            lambda: 0.05,
            delta: 0.05,
            c: 1.0,
            c1: 1.0,
        }
    }
}

impl Prop1Params {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.k < 1 || self.d < 1 {
            return bad("K and d must be at least 1");
        }
        if !(self.pi_min > 0.0 && self.pi_min <= 1.0 / self.k as f64) {
            return bad("pi_min must lie in (0, 1/K]");
        }
        if !(self.r_min > 0.0 && self.r_max >= self.r_min && self.r_max.is_finite()) {
            return bad("need 0 < R_min <= R_max");
        }
        if !(self.lambda > 0.0 && self.lambda < 0.5) {
            return bad("lambda must lie in (0, 1/2)");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if !(self.c > 0.0 && self.c1 > 0.0) {
            return bad("constants C and C1 must be positive");
        }
        Ok(())
    }

    /// `100 K² R_max (√d + 2 R_max)²`.
    pub fn c_tilde(&self) -> f64 {
        let k = self.k as f64;
        let s = (self.d as f64).sqrt() + 2.0 * self.r_max;
        100.0 * k * k * self.r_max * s * s
    }

    /// Right-hand side of the sample-size condition `N / ln N > rhs`.
    pub fn sample_size_rhs(&self) -> f64 {
        let kd = (self.k * self.d) as f64;
        let l2 = self.lambda * self.lambda;
        let sep = 1.0
            / (l2 * self.pi_min * self.r_min * self.r_min)
            / ((1.0 - 2.0 * self.lambda).powi(2));
        self.c * kd * (self.c_tilde() / self.delta).ln() / self.pi_min * sep.max(1.0)
    }

    pub fn satisfies_sample_size(&self, n: usize) -> bool {
        n >= 3 && (n as f64) / (n as f64).ln() > self.sample_size_rhs()
    }

    /// Statistical floor of the error bound for component weight `pi_k`.
    pub fn floor(&self, n: usize, pi_k: f64) -> f64 {
        let n = n as f64;
        let kd = (self.k * self.d) as f64;
        (self.c1 / pi_k) / (1.0 - 2.0 * self.lambda)
            * ((self.c_tilde() * n / self.delta).ln() / (n / kd)).sqrt()
    }

    /// Error bound after `t` iterations, evaluated whether or not `n`
    /// meets the sample-size condition.
    pub fn bound_unchecked(&self, n: usize, t: usize, initial_error: f64) -> f64 {
        0.5f64.powi(t as i32) * initial_error + self.floor(n, self.pi_min)
    }
}

/// Smallest `N ≥ 3` with `N / ln N` strictly above the required value.
pub fn prop1_min_samples(p: &Prop1Params) -> Result<usize> {
    p.validate()?;
    let rhs = p.sample_size_rhs();
    let ok = |n: usize| (n as f64) / (n as f64).ln() > rhs;
    let mut hi = 3usize;
    while !ok(hi) {
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| Error::InvalidParameter("required N overflows".into()))?;
    }
    let mut lo = hi / 2;
    if lo < 3 {
        return Ok(3);
    }
    // N / ln N increases for N ≥ 3, so bisection finds the boundary.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Error bound after `t` EM iterations; refused when `n` is below the
/// sample-size requirement.
pub fn prop1_error_bound(p: &Prop1Params, n: usize, t: usize, initial_error: f64) -> Result<f64> {
    p.validate()?;
    if !p.satisfies_sample_size(n) {
        return Err(Error::BoundNotValid(format!(
            "N = {n} gives N/ln N = {:.4}, which does not exceed the required {:.4}; \
             at least N = {} is needed for these constants",
            n as f64 / (n as f64).ln(),
            p.sample_size_rhs(),
            prop1_min_samples(p)?
        )));
    }
    Ok(p.bound_unchecked(n, t, initial_error))
}

/// Parameters of the misspecified symmetric-mixture bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Prop2Params {
    pub theta_star: f64,
    pub sigma: f64,
    pub rho: f64,
    pub delta: f64,
    pub c1: f64,
    pub c2: f64,
    pub c_prime: f64,
    /// Half-width of the neighbourhood of `θ*` expected to contain `θ̄`.
    pub c_rho: f64,
}

impl Default for Prop2Params {
    fn default() -> Self {
        Prop2Params {
            theta_star: 1.0,
            sigma: 1.0,
            rho: 0.04,
            delta: 0.05,
            c1: 1.0,
            c2: 1.0,
            c_prime: 1.0,
            c_rho: 0.49,
        }
    }
}

impl Prop2Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidParameter("sigma must be positive".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter("delta must lie in (0, 1)".into()));
        }
        if self.theta_star == 0.0 || !self.theta_star.is_finite() {
            return Err(Error::InvalidParameter("theta* must be non-zero".into()));
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0 && self.c_prime > 0.0) {
            return Err(Error::InvalidParameter("constants must be positive".into()));
        }
        Ok(())
    }

    pub fn xi(&self) -> f64 {
        self.theta_star.abs() / self.sigma
    }

    /// Contraction factor `exp(−c′ ξ²)`.
    pub fn gamma(&self) -> f64 {
        (-self.c_prime * self.xi() * self.xi()).exp()
    }

    /// Component means of the generating three-component mixture.
    pub fn component_means(&self) -> [f64; 3] {
        let t = self.theta_star;
        [t * (-self.rho - 1.0), t * (self.rho - 1.0), t]
    }

    pub const WEIGHTS: [f64; 3] = [0.25, 0.25, 0.5];

    pub fn min_samples(&self) -> f64 {
        self.c1 * (1.0 / self.delta).ln()
    }

    /// `[θ* − C_ρ, θ* + C_ρ]`.
    pub fn neighbourhood(&self) -> [f64; 2] {
        [self.theta_star - self.c_rho, self.theta_star + self.c_rho]
    }

    pub fn floor(&self, n: usize) -> f64 {
        let g = self.gamma();
        let t = self.theta_star;
        self.c2 / (1.0 - g)
            * t.abs()
            * (t * t + self.sigma * self.sigma)
            * ((1.0 / self.delta).ln() / n as f64).sqrt()
    }
}

/// I.i.d. draws from the three-component mixture.
pub fn sample_misspecified(p: &Prop2Params, n: usize, seed: u64) -> Result<Vec<f64>> {
    p.validate()?;
    let means = p.component_means();
    let mut rng = seed::rng(seed, seed::domain::REPLICATION, 2);
    Ok((0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let c = if u < 0.25 {
                0
            } else if u < 0.5 {
                1
            } else {
                2
            };
            let z: f64 = StandardNormal.sample(&mut rng);
            means[c] + p.sigma * z
        })
        .collect())
}

/// Sample EM for `½N(θ, 1) + ½N(−θ, 1)`: `θ ← mean(tanh(θ x) x)`.
/// Returns `θ^0, …, θ^t`.
pub fn em_misspecified(sample: &[f64], theta0: f64, t: usize) -> Result<Vec<f64>> {
    if theta0 == 0.0 || !theta0.is_finite() {
        return Err(Error::InvalidParameter(
            "theta0 must be finite and non-zero".into(),
        ));
    }
    if sample.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let n = sample.len() as f64;
    let mut trace = Vec::with_capacity(t + 1);
    let mut theta = theta0;
    trace.push(theta);
    for _ in 0..t {
        theta = sample.iter().map(|&x| (theta * x).tanh() * x).sum::<f64>() / n;
        trace.push(theta);
    }
    Ok(trace)
}

/// Population EM operator `E_{g*}[tanh(θ X / σ²) X]` by composite Simpson
/// quadrature over ±12σ around each component.
pub fn population_em_operator(p: &Prop2Params, theta: f64) -> f64 {
    const INTERVALS: usize = 4000;
    let s2 = p.sigma * p.sigma;
    let mut total = 0.0;
    for (w, m) in Prop2Params::WEIGHTS.iter().zip(p.component_means()) {
        let (a, b) = (m - 12.0 * p.sigma, m + 12.0 * p.sigma);
        let h = (b - a) / INTERVALS as f64;
        let f = |x: f64| {
            let z = (x - m) / p.sigma;
            (theta * x / s2).tanh() * x * (-0.5 * z * z).exp()
                / (p.sigma * (2.0 * std::f64::consts::PI).sqrt())
        };
        let mut s = f(a) + f(b);
        for i in 1..INTERVALS {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        total += w * s * h / 3.0;
    }
    total
}

/// Fixed point `θ̄` of the population EM operator, reached from `θ*`.
pub fn population_theta_bar(p: &Prop2Params) -> Result<f64> {
    p.validate()?;
    let mut theta = p.theta_star;
    for _ in 0..10_000 {
        let next = population_em_operator(p, theta);
        if (next - theta).abs() < 1e-14 {
            return Ok(next);
        }
        theta = next;
    }
    Err(Error::InvalidParameter(
        "population EM did not converge".into(),
    ))
}

/// Bound on `|θ^t − θ̄|`; refused when `n < c₁ ln(1/δ)`.
pub fn prop2_bound(
    p: &Prop2Params,
    n: usize,
    t: usize,
    theta0: f64,
    theta_bar: f64,
) -> Result<f64> {
    p.validate()?;
    if (n as f64) < p.min_samples() {
        return Err(Error::BoundNotValid(format!(
            "N = {n} is below c1·ln(1/δ) = {:.4}",
            p.min_samples()
        )));
    }
    Ok(p.gamma().powi(t as i32) * (theta0 - theta_bar).abs() + p.floor(n))
}

/// Seeded repetition of EM on a two-component, one-dimensional mixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Prop1Replication {
    pub params: Prop1Params,
    pub means: [f64; 2],
    pub n: usize,
    /// Initial means are the true means plus `U(−spread, spread)` offsets.
    pub init_spread: f64,
    pub t_max: usize,
    pub runs: usize,
    pub seed: u64,
}

impl Default for Prop1Replication {
    fn default() -> Self {
        Prop1Replication {
            params: Prop1Params::default(),
            means: [3.0, 21.0],
            n: 1500,
            init_spread: 3.0,
            t_max: 50,
            runs: 100,
            seed: 0,
        }
    }
}

/// Per-iteration errors `max_k |μ_k^t − μ_k*|` for `t = 0..=t_max`.
pub fn prop1_error_trace(cfg: &Prop1Replication, run: usize) -> Result<Vec<f64>> {
    let mut rng = seed::rng(cfg.seed, seed::domain::REPLICATION, run as u64);
    let rows: Vec<[f64; 1]> = (0..cfg.n)
        .map(|i| {
            let z: f64 = StandardNormal.sample(&mut rng);
            [cfg.means[i % 2] + z]
        })
        .collect();
    let pts = Samples::from_rows(&rows);
    let init: Vec<Vec<f64>> = cfg
        .means
        .iter()
        .map(|m| vec![m + rng.random_range(-cfg.init_spread..=cfg.init_spread)])
        .collect();
    let error = |means: &[Vec<f64>]| {
        means
            .iter()
            .zip(cfg.means)
            .map(|(m, t)| (m[0] - t).abs())
            .fold(0.0, f64::max)
    };
    let mut state = EmState::new(
        &pts,
        vec![0.5, 0.5],
        init,
        vec![1.0],
        &EmSettings::default(),
    )?;
    let mut trace = vec![error(&state.means)];
    for _ in 0..cfg.t_max {
        state.step(&pts)?;
        trace.push(error(&state.means));
    }
    Ok(trace)
}

/// Seeded repetition of the misspecified-model EM.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Prop2Replication {
    pub params: Prop2Params,
    pub n: usize,
    pub theta0: f64,
    pub t_max: usize,
    pub runs: usize,
    pub seed: u64,
}

impl Default for Prop2Replication {
    fn default() -> Self {
        Prop2Replication {
            params: Prop2Params::default(),
            n: 1500,
            theta0: 0.6,
            t_max: 50,
            runs: 100,
            seed: 0,
        }
    }
}

/// `θ^0, …, θ^{t_max}` for one seeded sample.
pub fn prop2_theta_trace(cfg: &Prop2Replication, run: usize) -> Result<Vec<f64>> {
    let sample = sample_misspecified(
        &cfg.params,
        cfg.n,
        seed::derive(cfg.seed, seed::domain::REPLICATION, run as u64),
    )?;
    em_misspecified(&sample, cfg.theta0, cfg.t_max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub run: usize,
    pub t: usize,
    pub bound: f64,
    pub empirical_error: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_tilde_formula() {
        let p = Prop1Params::default();
        assert_eq!(p.c_tilde(), 100.0 * 4.0 * 18.0 * 37.0 * 37.0);
    }

    #[test]
    fn min_samples_is_sharp() {
        let p = Prop1Params::default();
        let n = prop1_min_samples(&p).unwrap();
        assert!(p.satisfies_sample_size(n));
        assert!(!p.satisfies_sample_size(n - 1));
    }

    #[test]
    fn bound_limits() {
        let p = Prop1Params::default();
        let n = prop1_min_samples(&p).unwrap();
        let floor = p.floor(n, p.pi_min);
        assert_eq!(prop1_error_bound(&p, n, 0, 2.0).unwrap(), 2.0 + floor);
        assert_eq!(prop1_error_bound(&p, n, 2000, 2.0).unwrap(), floor);
        assert!(matches!(
            prop1_error_bound(&p, n - 1, 0, 2.0),
            Err(Error::BoundNotValid(_))
        ));
    }

    #[test]
    fn misspecified_components() {
        let m = Prop2Params::default().component_means();
        assert!((m[0] + 1.04).abs() < 1e-15 && (m[1] + 0.96).abs() < 1e-15 && m[2] == 1.0);
    }

    #[test]
    fn symmetric_data_keeps_sign() {
        let data = [-2.0, -0.5, 0.5, 2.0, -1.0, 1.0];
        let trace = em_misspecified(&data, 0.3, 20).unwrap();
        assert!(trace.iter().all(|&t| t > 0.0));
    }

    #[test]
    fn prop2_bound_validity() {
        let p = Prop2Params::default();
        assert!(prop2_bound(&p, 2, 0, 0.6, 1.0).is_err());
        let b0 = prop2_bound(&p, 1500, 0, 0.6, 1.0).unwrap();
        assert!((b0 - (0.4 + p.floor(1500))).abs() < 1e-15);
        assert!(
            prop2_bound(&p, 3000, 5, 0.6, 1.0).unwrap()
                < prop2_bound(&p, 1500, 5, 0.6, 1.0).unwrap()
        );
    }

    #[test]
    fn theta_bar_is_a_fixed_point() {
        let p = Prop2Params::default();
        let tb = population_theta_bar(&p).unwrap();
        assert!((population_em_operator(&p, tb) - tb).abs() < 1e-12);
    }
}
