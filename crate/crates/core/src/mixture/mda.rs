//! Mixture discriminant analysis: one shared-covariance Gaussian mixture per
//! class, a covariance pooled across both classes, and Bayes posteriors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::gmm::{
    em_fit, log_sum_exp, CholeskyFactor, EmReport, EmSettings, MixtureModel,
};
use crate::mixture::kmeans::kmeans_init;
use crate::seed;
use crate::spectra::{ClassLabel, EnergyMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MdaSettings {
    /// Mixture components per class.
    pub k: usize,
    pub em: EmSettings,
    pub seed: u64,
}

impl Default for MdaSettings {
    fn default() -> Self {
        MdaSettings {
            k: 3,
            em: EmSettings::default(),
            seed: 0,
        }
    }
}

/// Two class mixtures sharing one covariance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MdaClassifier {
    models: [MixtureModel; 2],
    priors: [f64; 2],
    chol: CholeskyFactor,
    reports: Option<[EmReport; 2]>,
}

impl MdaClassifier {
    /// Builds a classifier from hand-made parts. Both models must carry the
    /// same covariance matrix.
    pub fn from_parts(
        model_a: MixtureModel,
        model_b: MixtureModel,
        priors: [f64; 2],
    ) -> Result<Self> {
        if model_a.label != ClassLabel::A || model_b.label != ClassLabel::B {
            return Err(Error::InvalidParameter(
                "models must be labelled A then B".into(),
            ));
        }
        if model_a.cov != model_b.cov {
            return Err(Error::InvalidParameter(
                "class models must share one covariance matrix".into(),
            ));
        }
        let d = model_a.dim();
        if model_b.dim() != d || model_a.cov.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: model_b.dim(),
            });
        }
        for m in [&model_a, &model_b] {
            let s: f64 = m.weights.iter().sum();
            if (s - 1.0).abs() > 1e-9 || m.weights.iter().any(|&w| !(w >= 0.0)) {
                return Err(Error::InvalidParameter(format!(
                    "class {} weights do not form a simplex",
                    m.label
                )));
            }
        }
        if priors.iter().any(|&p| !(p >= 0.0)) || ((priors[0] + priors[1]) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter("class priors must sum to 1".into()));
        }
        let chol = CholeskyFactor::new(&model_a.cov, d)?;
        Ok(MdaClassifier {
            models: [model_a, model_b],
            priors,
            chol,
            reports: None,
        })
    }

    pub fn model(&self, label: ClassLabel) -> &MixtureModel {
        &self.models[label.index()]
    }

    pub fn priors(&self) -> [f64; 2] {
        self.priors
    }

    pub fn cov(&self) -> &[f64] {
        &self.models[0].cov
    }

    pub fn dim(&self) -> usize {
        self.models[0].dim()
    }

    pub fn k(&self) -> usize {
        self.models[0].k()
    }

    /// EM reports of the two class fits, when fitted from data.
    pub fn em_reports(&self) -> Option<&[EmReport; 2]> {
        self.reports.as_ref()
    }

    /// `log p(r) + log p(x | r)` for both classes.
    pub fn joint_log_densities(&self, x: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (o, (m, p)) in out.iter_mut().zip(self.models.iter().zip(self.priors)) {
            *o = p.ln() + self.chol.mixture_log_density(&m.weights, &m.means, x);
        }
        out
    }

    /// `(p(A | x), p(B | x))`, computed in log space.
    pub fn class_posterior(&self, x: &[f64]) -> Result<[f64; 2]> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let l = self.joint_log_densities(x);
        let d = l[1] - l[0];
        if d.is_nan() {
            let lse = log_sum_exp(&l);
            return Ok([(l[0] - lse).exp(), (l[1] - lse).exp()]);
        }
        // Logistic of the log-odds keeps the pair summing to one even when
        // both log densities are large.
        Ok([logistic(-d), logistic(d)])
    }

    /// Most probable class per row; an exact tie goes to class A.
    pub fn classify(&self, energies: &EnergyMatrix) -> Result<Vec<ClassLabel>> {
        (0..energies.n_rows())
            .map(|i| {
                let p = self.class_posterior(energies.row(i))?;
                Ok(label_from_posterior(p))
            })
            .collect()
    }
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Argmax of a posterior pair with ties broken toward class A.
pub fn label_from_posterior(p: [f64; 2]) -> ClassLabel {
    if p[0] >= p[1] {
        ClassLabel::A
    } else {
        ClassLabel::B
    }
}

/// Fraction of matching labels (0 for empty input).
pub fn accuracy(predicted: &[ClassLabel], truth: &[ClassLabel]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

/// Fits each class's mixture independently, then replaces both covariances
/// by their count-weighted average. Priors are the empirical class fractions.
pub fn fit_mda(energies: &EnergyMatrix, settings: &MdaSettings) -> Result<MdaClassifier> {
    let n = energies.n_rows() as f64;
    let mut fitted = Vec::with_capacity(2);
    for label in ClassLabel::BOTH {
        let pts = energies.class_samples(label);
        if pts.len() < settings.k.max(1) {
            return Err(Error::InsufficientData(format!(
                "class {label} has {} rows, needs at least K = {}",
                pts.len(),
                settings.k
            )));
        }
        let init = kmeans_init(
            &pts,
            settings.k,
            seed::derive(settings.seed, seed::domain::KMEANS, label.index() as u64),
        )?;
        let (model, report) = em_fit(&pts, label, &init, &settings.em)?;
        fitted.push((model, report, pts.len() as f64));
    }
    let (mut b, rep_b, nb) = fitted.pop().unwrap();
    let (mut a, rep_a, na) = fitted.pop().unwrap();
    let pooled: Vec<f64> = a
        .cov
        .iter()
        .zip(&b.cov)
        .map(|(x, y)| (na * x + nb * y) / (na + nb))
        .collect();
    a.cov = pooled.clone();
    b.cov = pooled;
    let mut clf = MdaClassifier::from_parts(a, b, [na / n, nb / n])?;
    clf.reports = Some([rep_a, rep_b]);
    Ok(clf)
}

#[derive(Serialize, Deserialize)]
struct ClassifierJson {
    k: usize,
    d: usize,
    priors: [f64; 2],
    /// Row-major `d × d`.
    cov: Vec<f64>,
    weights: [Vec<f64>; 2],
    means: [Vec<Vec<f64>>; 2],
}

impl Serialize for MdaClassifier {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ClassifierJson {
            k: self.k(),
            d: self.dim(),
            priors: self.priors,
            cov: self.cov().to_vec(),
            weights: [
                self.models[0].weights.clone(),
                self.models[1].weights.clone(),
            ],
            means: [self.models[0].means.clone(), self.models[1].means.clone()],
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MdaClassifier {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = ClassifierJson::deserialize(d)?;
        if j.cov.len() != j.d * j.d || j.weights.iter().any(|w| w.len() != j.k) {
            return Err(D::Error::custom("classifier dimensions are inconsistent"));
        }
        let [wa, wb] = j.weights;
        let [ma, mb] = j.means;
        let a = MixtureModel {
            label: ClassLabel::A,
            weights: wa,
            means: ma,
            cov: j.cov.clone(),
        };
        let b = MixtureModel {
            label: ClassLabel::B,
            weights: wb,
            means: mb,
            cov: j.cov,
        };
        MdaClassifier::from_parts(a, b, j.priors).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::Samples;

    fn model(label: ClassLabel, means: &[f64], var: f64) -> MixtureModel {
        MixtureModel {
            label,
            weights: vec![1.0 / means.len() as f64; means.len()],
            means: means.iter().map(|&m| vec![m]).collect(),
            cov: vec![var],
        }
    }

    #[test]
    fn equal_models_give_half() {
        let clf = MdaClassifier::from_parts(
            model(ClassLabel::A, &[0.0, 2.0], 1.0),
            model(ClassLabel::B, &[0.0, 2.0], 1.0),
            [0.5, 0.5],
        )
        .unwrap();
        let p = clf.class_posterior(&[0.7]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        assert_eq!(label_from_posterior(p), ClassLabel::A);
    }

    #[test]
    fn dominance_far_from_the_other_class() {
        let clf = MdaClassifier::from_parts(
            model(ClassLabel::A, &[0.0], 1.0),
            model(ClassLabel::B, &[50.0, 60.0], 1.0),
            [0.5, 0.5],
        )
        .unwrap();
        assert!(clf.class_posterior(&[0.0]).unwrap()[0] > 0.999);
        // Far past both classes the log-space route still normalises.
        let p = clf.class_posterior(&[1e4]).unwrap();
        assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hand_built_models_match_density_ratio() {
        let a = MixtureModel {
            label: ClassLabel::A,
            weights: vec![0.3, 0.7],
            means: vec![vec![-1.0], vec![2.0]],
            cov: vec![1.5],
        };
        let b = MixtureModel {
            label: ClassLabel::B,
            weights: vec![1.0],
            means: vec![vec![0.5]],
            cov: vec![1.5],
        };
        let clf = MdaClassifier::from_parts(a, b, [0.4, 0.6]).unwrap();
        let phi =
            |x: f64, m: f64| (-(x - m) * (x - m) / 3.0).exp() / (3.0 * std::f64::consts::PI).sqrt();
        for x in [-3.0, -0.2, 0.5, 1.7, 4.0] {
            let pa = 0.4 * (0.3 * phi(x, -1.0) + 0.7 * phi(x, 2.0));
            let pb = 0.6 * phi(x, 0.5);
            let want = pa / (pa + pb);
            let got = clf.class_posterior(&[x]).unwrap();
            assert!((got[0] - want).abs() < 1e-12, "{x}: {} vs {want}", got[0]);
        }
    }

    #[test]
    fn rejects_mismatched_covariances_and_dimensions() {
        let a = model(ClassLabel::A, &[0.0], 1.0);
        let b = model(ClassLabel::B, &[1.0], 2.0);
        assert!(MdaClassifier::from_parts(a.clone(), b, [0.5, 0.5]).is_err());
        let clf =
            MdaClassifier::from_parts(a, model(ClassLabel::B, &[1.0], 1.0), [0.5, 0.5]).unwrap();
        assert!(matches!(
            clf.class_posterior(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn too_few_rows_for_k() {
        let e = EnergyMatrix::new(
            Samples::from_rows(&[[0.0], [1.0], [2.0], [3.0]]),
            vec![ClassLabel::A, ClassLabel::A, ClassLabel::A, ClassLabel::B],
        )
        .unwrap();
        let s = MdaSettings {
            k: 2,
            ..MdaSettings::default()
        };
        assert!(matches!(fit_mda(&e, &s), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn json_round_trip() {
        let clf = MdaClassifier::from_parts(
            model(ClassLabel::A, &[0.0, 2.0], 1.25),
            model(ClassLabel::B, &[1.0, 3.0], 1.25),
            [0.25, 0.75],
        )
        .unwrap();
        let text = serde_json::to_string(&clf).unwrap();
        let back: MdaClassifier = serde_json::from_str(&text).unwrap();
        assert_eq!(back, clf);
    }
}
