//! Derivative-free simplex minimisation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NmConfig {
    /// Offset of each initial simplex vertex from `x0` along one axis.
    pub initial_step: f64,
    pub max_evals: usize,
    pub reflect: f64,
    pub expand: f64,
    pub contract: f64,
    pub shrink: f64,
    /// Stop once every vertex lies within this distance of the best one.
    pub tol: f64,
}

impl Default for NmConfig {
    fn default() -> Self {
        NmConfig {
            initial_step: 1.0,
            max_evals: 2000,
            reflect: 1.0,
            expand: 2.0,
            contract: 0.5,
            shrink: 0.5,
            tol: 1e-8,
        }
    }
}

impl NmConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.initial_step > 0.0
            && self.reflect > 0.0
            && self.expand > 1.0
            && self.expand > self.reflect
            && self.contract > 0.0
            && self.contract < 1.0
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.tol >= 0.0
            && self.max_evals >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "Nelder-Mead settings out of range: {self:?}"
            )))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// Best value after each iteration.
    pub incumbent: Vec<f64>,
}

/// Minimises `f` from `x0`. Non-finite objective values count as `+∞`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], cfg: &NmConfig) -> Result<NmResult>
where
    F: FnMut(&[f64]) -> f64,
{
    cfg.validate()?;
    let n = x0.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty starting point".into()));
    }
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let f0 = eval(x0, &mut evals);
    if f0 == f64::INFINITY {
        return Err(Error::InvalidParameter(
            "objective is not finite at x0".into(),
        ));
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    for i in 0..n {
        if evals >= cfg.max_evals {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += cfg.initial_step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    if simplex.len() < n + 1 {
        return Ok(NmResult {
            x: x0.to_vec(),
            value: f0,
            evaluations: evals,
            converged: false,
            incumbent: vec![],
        });
    }

    let mut incumbent = Vec::new();
    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        incumbent.push(simplex[0].1);
        let best = &simplex[0].0;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| dist(x, best))
            .fold(0.0, f64::max);
        if diameter < cfg.tol {
            converged = true;
            break;
        }
        if evals >= cfg.max_evals {
            break;
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(cfg.reflect);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(cfg.reflect * cfg.expand);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let accepted = if fr < worst.1 {
            let xc = along(cfg.reflect * cfg.contract);
            let fc = eval(&xc, &mut evals);
            (fc <= fr).then_some((xc, fc))
        } else {
            let xc = along(-cfg.contract);
            let fc = eval(&xc, &mut evals);
            (fc < worst.1).then_some((xc, fc))
        };
        if let Some(v) = accepted {
            simplex[n] = v;
            continue;
        }
        let x_best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = x_best
                .iter()
                .zip(&vertex.0)
                .map(|(b, v)| b + cfg.shrink * (v - b))
                .collect();
            let v = eval(&x, &mut evals);
            *vertex = (x, v);
        }
    }
    let (x, value) = simplex.swap_remove(0);
    Ok(NmResult {
        x,
        value,
        evaluations: evals,
        converged,
        incumbent,
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let c = [1.5, -2.0, 0.25, 4.0];
        let f = |x: &[f64]| {
            x.iter()
                .zip(&c)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        };
        let cfg = NmConfig {
            max_evals: 500,
            tol: 1e-6,
            ..NmConfig::default()
        };
        for x0 in [[0.0; 4], [10.0, 10.0, -10.0, 3.0]] {
            let r = nelder_mead(f, &x0, &cfg).unwrap();
            assert!(r.evaluations <= 500);
            assert!(dist(&r.x, &c) < 1e-4, "{:?} after {}", r.x, r.evaluations);
        }
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let r = nelder_mead(f, &[-1.2, 1.0], &NmConfig::default()).unwrap();
        assert!(r.value < 1e-3 && r.evaluations <= 2000);
    }

    #[test]
    fn flat_objective_returns_start() {
        let r = nelder_mead(|_| 3.0, &[0.3, 0.7], &NmConfig::default()).unwrap();
        assert_eq!(r.x, vec![0.3, 0.7]);
        assert!(r.converged);
    }

    #[test]
    fn non_finite_values_are_avoided() {
        let f = |x: &[f64]| {
            if x[0] < 0.0 {
                f64::NAN
            } else {
                (x[0] - 1.0).powi(2)
            }
        };
        let r = nelder_mead(f, &[3.0], &NmConfig::default()).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-6);
        assert!(nelder_mead(|_| f64::NAN, &[0.0], &NmConfig::default()).is_err());
    }

    #[test]
    fn incumbent_never_increases() {
        let f = |x: &[f64]| (x[0] * 3.0).sin() + 0.1 * x[0] * x[0] + (x[1] - 0.5).abs();
        let r = nelder_mead(f, &[2.0, 2.0], &NmConfig::default()).unwrap();
        assert!(r.incumbent.windows(2).all(|w| w[1] <= w[0]));
    }
}
