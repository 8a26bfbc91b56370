use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-coordinate search box with an affine map onto `[0, 1]^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl UnitBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::InvalidParameter(
                "search box has no coordinates".into(),
            ));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidParameter(format!(
                    "coordinate {i} has empty extent [{lo}, {hi}]"
                )));
            }
        }
        Ok(UnitBox { lower, upper })
    }

    /// The same interval for every coordinate.
    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn normalize(&self, raw: &[f64]) -> Result<Vec<f64>> {
        self.check(raw)?;
        Ok(raw
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(x, (lo, hi))| (x - lo) / (hi - lo))
            .collect())
    }

    pub fn denormalize(&self, unit: &[f64]) -> Result<Vec<f64>> {
        self.check(unit)?;
        Ok(unit
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(u, (lo, hi))| lo + u * (hi - lo))
            .collect())
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maps_onto_unit_interval() {
        let b = UnitBox::cube(0.0, 100.0, 2).unwrap();
        let u = b.normalize(&[21.0, 25.0]).unwrap();
        assert!((u[0] - 0.21).abs() < 1e-15 && (u[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn round_trip() {
        let b = UnitBox::new(vec![-3.5, 10.0, 0.0], vec![7.25, 11.0, 1e4]).unwrap();
        let x = [1.0, 10.3, 5321.7];
        let back = b.denormalize(&b.normalize(&x).unwrap()).unwrap();
        for (a, c) in back.iter().zip(&x) {
            assert!((a - c).abs() <= 1e-12 * c.abs().max(1.0));
        }
    }

    #[test]
    fn zero_extent_is_rejected() {
        assert!(UnitBox::cube(5.0, 5.0, 2).is_err());
        assert!(UnitBox::new(vec![0.0], vec![1.0, 2.0]).is_err());
    }
}
