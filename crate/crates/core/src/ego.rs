//! The EGO-MDA loop: a Latin-hypercube start, then repeated expected
//! improvement proposals, each repaired into a valid band set, scored by the
//! deviance of a freshly fitted MDA classifier and fed back to the GP.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::{
    accuracy, deviance_terms, fit_mda, DevianceConfig, MdaClassifier, MdaSettings,
};
use crate::seed;
use crate::spectra::{
    energy_matrix, repair_within, BandSet, ClassLabel, FrequencyGrid, SpectrumSet,
};
use crate::surrogate::{gpr_fit, maximize_ei_with, EiSearch, GprModel, KernelConfig, UnitBox};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitDesign {
    Lhs,
    Random,
}

/// Units in which `KernelConfig::theta_r` is given. The GP always works on the
/// unit box; a range in Hz is divided by the search-range width first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RangeUnits {
    Hz,
    Unit,
}

/// Stop once the incumbent has improved by no more than `tol` over the last
/// `window` iterations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EarlyStop {
    pub window: usize,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EgoConfig {
    /// Number of bands `L`.
    pub n_bands: usize,
    pub n_init: usize,
    /// EGO iterations after the initial design.
    pub iterations: usize,
    /// Frequency range searched by every boundary; the grid range when unset.
    pub search_range: Option<[f64; 2]>,
    /// Narrowest band allowed; one grid spacing when unset.
    pub min_width: Option<f64>,
    pub init: InitDesign,
    pub mda: MdaSettings,
    pub deviance: DevianceConfig,
    pub kernel: KernelConfig,
    pub kernel_units: RangeUnits,
    pub acquisition: EiSearch,
    pub early_stop: Option<EarlyStop>,
    /// Fraction of each class held out for scoring; the deviance is computed
    /// on the fitting data when unset.
    pub holdout: Option<f64>,
    /// Seeds the design, the acquisition and the holdout split; `mda.seed`
    /// seeds the classifier fits.
    pub seed: u64,
}

impl Default for EgoConfig {
    fn default() -> Self {
        EgoConfig {
            n_bands: 2,
            n_init: 10,
            iterations: 200,
            search_range: None,
            min_width: None,
            init: InitDesign::Lhs,
            mda: MdaSettings::default(),
            deviance: DevianceConfig::default(),
            kernel: KernelConfig::default(),
            kernel_units: RangeUnits::Hz,
            acquisition: EiSearch::default(),
            early_stop: None,
            holdout: None,
            seed: 0,
        }
    }
}

impl EgoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_bands == 0 {
            return Err(Error::InvalidParameter("L must be at least 1".into()));
        }
        if self.n_init < 2 {
            return Err(Error::InvalidParameter("N_init must be at least 2".into()));
        }
        if let Some(f) = self.holdout {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "holdout fraction must lie in (0, 1), got {f}"
                )));
            }
        }
        if let Some(w) = self.min_width {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "min_width must be positive, got {w}"
                )));
            }
        }
        self.kernel.validate()
    }
}

/// Spectra of both classes, optionally split into fitting and scoring parts.
#[derive(Clone, Debug)]
pub struct Dataset {
    fit: [SpectrumSet; 2],
    score: Option<[SpectrumSet; 2]>,
}

impl Dataset {
    pub fn new(a: SpectrumSet, b: SpectrumSet) -> Result<Self> {
        check_pair(&a, &b)?;
        Ok(Dataset {
            fit: [a, b],
            score: None,
        })
    }

    /// Holds out `fraction` of each class, chosen by a seeded shuffle.
    pub fn with_holdout(a: SpectrumSet, b: SpectrumSet, fraction: f64, seed: u64) -> Result<Self> {
        check_pair(&a, &b)?;
        let mut fit = Vec::with_capacity(2);
        let mut score = Vec::with_capacity(2);
        for set in [a, b] {
            let n = set.len();
            let n_score = ((n as f64) * fraction).round() as usize;
            if n_score == 0 || n_score == n {
                return Err(Error::InsufficientData(format!(
                    "class {} has {n} rows, too few to hold out {fraction}",
                    set.label()
                )));
            }
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut seed::rng(
                seed,
                seed::domain::SPLIT,
                set.label().index() as u64,
            ));
            let pick = |ids: &[usize]| {
                let mut ids = ids.to_vec();
                ids.sort_unstable();
                let spectra = ids.iter().map(|&i| set.spectra()[i].clone()).collect();
                SpectrumSet::from_spectra(set.label(), set.grid().clone(), spectra)
            };
            score.push(pick(&idx[..n_score])?);
            fit.push(pick(&idx[n_score..])?);
        }
        let [fa, fb]: [SpectrumSet; 2] = fit.try_into().expect("two classes");
        let [sa, sb]: [SpectrumSet; 2] = score.try_into().expect("two classes");
        Ok(Dataset {
            fit: [fa, fb],
            score: Some([sa, sb]),
        })
    }

    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        self.fit[0].grid()
    }

    pub fn fit_sets(&self) -> &[SpectrumSet] {
        &self.fit
    }

    pub fn score_sets(&self) -> &[SpectrumSet] {
        self.score.as_ref().unwrap_or(&self.fit)
    }
}

fn check_pair(a: &SpectrumSet, b: &SpectrumSet) -> Result<()> {
    if a.label() != ClassLabel::A || b.label() != ClassLabel::B {
        return Err(Error::InvalidParameter(
            "expected class A then class B".into(),
        ));
    }
    if a.grid() != b.grid() {
        return Err(Error::InvalidSpectrum(
            "both classes must share a frequency grid".into(),
        ));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub deviance: f64,
    pub fit: f64,
    pub penalty: f64,
    pub accuracy: f64,
    pub classifier: MdaClassifier,
}

/// Fits MDA to the band energies of the fitting data and scores the
/// deviance and accuracy on the scoring data.
pub fn evaluate_bands(
    bands: &BandSet,
    data: &Dataset,
    mda: &MdaSettings,
    deviance: &DevianceConfig,
) -> Result<Evaluation> {
    let train = energy_matrix(data.fit_sets(), bands)?;
    let clf = fit_mda(&train, mda)?;
    let scored = match &data.score {
        Some(s) => energy_matrix(s, bands)?,
        None => train,
    };
    let terms = deviance_terms(&scored, &clf, bands, deviance)?;
    if !terms.total.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "non-finite deviance for {bands}"
        )));
    }
    let predicted = clf.classify(&scored)?;
    Ok(Evaluation {
        deviance: terms.total,
        fit: terms.fit,
        penalty: terms.penalty,
        accuracy: accuracy(&predicted, scored.labels()),
        classifier: clf,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EgoRecord {
    /// 1-based evaluation index `P`.
    pub p: usize,
    /// EGO iterations completed when this record was added (0 for the design).
    pub q: usize,
    /// Boundary vector as proposed, before repair (Hz).
    pub proposal: Vec<f64>,
    pub bands: BandSet,
    pub deviance: f64,
    pub fit: f64,
    pub penalty: f64,
    pub accuracy: f64,
    pub best_so_far: f64,
    /// Expected improvement at the proposal; absent for the initial design.
    pub ei: Option<f64>,
    pub flat_acquisition: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EgoHistory {
    records: Vec<EgoRecord>,
    n_init: usize,
    best: usize,
    /// Classifier of the incumbent record; other classifiers are dropped.
    incumbent: Option<MdaClassifier>,
}

impl EgoHistory {
    fn new(n_init: usize) -> Self {
        EgoHistory {
            records: Vec::new(),
            n_init,
            best: 0,
            incumbent: None,
        }
    }

    /// Evaluations so far.
    pub fn p(&self) -> usize {
        self.records.len()
    }

    /// EGO iterations so far.
    pub fn q(&self) -> usize {
        self.records.len().saturating_sub(self.n_init)
    }

    pub fn n_init(&self) -> usize {
        self.n_init
    }

    pub fn records(&self) -> &[EgoRecord] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn best_index(&self) -> usize {
        self.best
    }

    pub fn best(&self) -> Option<&EgoRecord> {
        self.records.get(self.best)
    }

    pub fn incumbent_classifier(&self) -> Option<&MdaClassifier> {
        self.incumbent.as_ref()
    }

    pub fn deviances(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.deviance).collect()
    }

    pub fn incumbent_trace(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.best_so_far).collect()
    }

    fn push(
        &mut self,
        proposal: Vec<f64>,
        bands: BandSet,
        eval: Evaluation,
        ei: Option<f64>,
        flat: bool,
    ) {
        let improved = self.best().is_none_or(|b| eval.deviance < b.deviance);
        let best_so_far = if improved {
            eval.deviance
        } else {
            self.records[self.best].best_so_far
        };
        let p = self.records.len() + 1;
        self.records.push(EgoRecord {
            p,
            q: p.saturating_sub(self.n_init),
            proposal,
            bands,
            deviance: eval.deviance,
            fit: eval.fit,
            penalty: eval.penalty,
            accuracy: eval.accuracy,
            best_so_far,
            ei,
            flat_acquisition: flat,
        });
        if improved {
            self.best = p - 1;
            self.incumbent = Some(eval.classifier);
        }
    }

    /// Writes `p, Q, lo_1, hi_1, …, y, best_so_far` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let l = self.records.first().map_or(0, |r| r.bands.len());
        let mut header = vec!["p".to_string(), "Q".to_string()];
        for i in 1..=l {
            header.push(format!("lo_{i}"));
            header.push(format!("hi_{i}"));
        }
        header.push("y".into());
        header.push("best_so_far".into());
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.records {
            let mut row = vec![r.p.to_string(), r.q.to_string()];
            row.extend(r.bands.boundaries().iter().map(|v| v.to_string()));
            row.push(r.deviance.to_string());
            row.push(r.best_so_far.to_string());
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io("<history>", e))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidParameter(format!("csv: {e}"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EgoResult {
    pub bands: BandSet,
    pub deviance: f64,
    pub accuracy: f64,
    pub classifier: MdaClassifier,
    pub history: EgoHistory,
    pub config: EgoConfig,
}

impl EgoResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Evaluation failed twice; `history` holds everything evaluated before.
#[derive(Debug, thiserror::Error)]
#[error("EGO stopped after {} evaluations: {source}", history.p())]
pub struct EgoFailure {
    #[source]
    pub source: Error,
    pub history: Box<EgoHistory>,
}

/// Search geometry derived from a config and the data grid.
#[derive(Clone, Debug)]
pub struct SearchSpace {
    pub unit: UnitBox,
    pub lower: f64,
    pub upper: f64,
    pub min_width: f64,
    pub n_bands: usize,
}

impl SearchSpace {
    pub fn new(cfg: &EgoConfig, grid: &FrequencyGrid) -> Result<Self> {
        let [lower, upper] = cfg.search_range.unwrap_or([grid.min(), grid.max()]);
        if !(lower >= grid.min() && upper <= grid.max() && upper > lower) {
            return Err(Error::BandOutOfRange {
                lo: lower,
                hi: upper,
                min: grid.min(),
                max: grid.max(),
            });
        }
        let min_width = cfg.min_width.unwrap_or_else(|| grid.min_spacing());
        let count = cfg.n_bands;
        if upper - lower < count as f64 * min_width {
            return Err(Error::RangeTooNarrow {
                width: upper - lower,
                count,
                min_width,
            });
        }
        Ok(SearchSpace {
            unit: UnitBox::cube(lower, upper, 2 * count)?,
            lower,
            upper,
            min_width,
            n_bands: count,
        })
    }

    /// Kernel settings on the unit box.
    pub fn surrogate_kernel(&self, cfg: &EgoConfig) -> KernelConfig {
        match cfg.kernel_units {
            RangeUnits::Unit => cfg.kernel.clone(),
            RangeUnits::Hz => KernelConfig {
                theta_r: cfg.kernel.theta_r / (self.upper - self.lower),
                ..cfg.kernel.clone()
            },
        }
    }

    pub fn repair(&self, raw: &[f64]) -> Result<BandSet> {
        repair_within(raw, self.min_width, self.lower, self.upper)
    }

    /// Unit-box coordinates of the repaired image of unit point `u`.
    pub fn canonical(&self, u: &[f64]) -> Result<Vec<f64>> {
        let raw = self.unit.denormalize(u)?;
        self.unit.normalize(&self.repair(&raw)?.boundaries())
    }
}

/// `n` points in `[0, 1]^d` with one point per stratum along every axis.
pub fn latin_hypercube<R: Rng>(n: usize, d: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; d]; n];
    for j in 0..d {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        for (i, p) in perm.into_iter().enumerate() {
            pts[i][j] = (p as f64 + rng.random::<f64>()) / n as f64;
        }
    }
    pts
}

fn evaluate_with_retry(
    bands: &BandSet,
    data: &Dataset,
    cfg: &EgoConfig,
    p: usize,
) -> Result<Evaluation> {
    let mda = cfg.mda.clone();
    evaluate_bands(bands, data, &mda, &cfg.deviance).or_else(|_| {
        let retry = MdaSettings {
            seed: seed::derive(cfg.seed, seed::domain::RETRY, p as u64),
            ..mda
        };
        evaluate_bands(bands, data, &retry, &cfg.deviance)
    })
}

/// Draws and evaluates the initial design.
pub fn initialize_design(
    cfg: &EgoConfig,
    data: &Dataset,
) -> std::result::Result<EgoHistory, EgoFailure> {
    let fail = |source, history| EgoFailure {
        source,
        history: Box::new(history),
    };
    let space =
        SearchSpace::new(cfg, data.grid()).map_err(|e| fail(e, EgoHistory::new(cfg.n_init)))?;
    let mut rng = seed::rng(cfg.seed, seed::domain::DESIGN, 0);
    let d = 2 * cfg.n_bands;
    let unit = match cfg.init {
        InitDesign::Lhs => latin_hypercube(cfg.n_init, d, &mut rng),
        InitDesign::Random => (0..cfg.n_init)
            .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
            .collect(),
    };
    let raw: Vec<Vec<f64>> = unit
        .iter()
        .map(|u| space.unit.denormalize(u).expect("dimension matches"))
        .collect();
    initialize_with(cfg, data, &raw)
}

/// Evaluates a caller-supplied initial design of raw boundary vectors (Hz).
pub fn initialize_with(
    cfg: &EgoConfig,
    data: &Dataset,
    raw: &[Vec<f64>],
) -> std::result::Result<EgoHistory, EgoFailure> {
    let mut history = EgoHistory::new(raw.len());
    let fail = |source, history| EgoFailure {
        source,
        history: Box::new(history),
    };
    if let Err(e) = cfg.validate() {
        return Err(fail(e, history));
    }
    if raw.len() < 2 {
        return Err(fail(
            Error::InvalidParameter("N_init must be at least 2".into()),
            history,
        ));
    }
    let space = match SearchSpace::new(cfg, data.grid()) {
        Ok(s) => s,
        Err(e) => return Err(fail(e, history)),
    };
    for proposal in raw {
        let step = space.repair(proposal).and_then(|bands| {
            evaluate_with_retry(&bands, data, cfg, history.p() + 1).map(|e| (bands, e))
        });
        match step {
            Ok((bands, eval)) => history.push(proposal.clone(), bands, eval, None, false),
            Err(e) => return Err(fail(e, history)),
        }
    }
    Ok(history)
}

/// GP fitted to the unit-box coordinates of every repaired record.
pub fn fit_surrogate(
    history: &EgoHistory,
    space: &SearchSpace,
    cfg: &EgoConfig,
) -> Result<GprModel> {
    let x = history
        .records
        .iter()
        .map(|r| space.unit.normalize(&r.bands.boundaries()))
        .collect::<Result<Vec<_>>>()?;
    gpr_fit(&x, &history.deviances(), &space.surrogate_kernel(cfg))
}

/// One acquisition, repair and evaluation; appends a record.
pub fn ego_step(
    history: &mut EgoHistory,
    model: &GprModel,
    data: &Dataset,
    cfg: &EgoConfig,
) -> Result<()> {
    let space = SearchSpace::new(cfg, data.grid())?;
    let y_min = history.best().map_or(f64::INFINITY, |r| r.deviance);
    let q = history.q() as u64;
    let acq = maximize_ei_with(
        model,
        y_min,
        &cfg.acquisition,
        seed::derive(cfg.seed, seed::domain::ACQUISITION, q),
        |u| space.canonical(u).unwrap_or_else(|_| u.to_vec()),
    );
    let proposal = space.unit.denormalize(&acq.point)?;
    let bands = space.repair(&proposal)?;
    let eval = evaluate_with_retry(&bands, data, cfg, history.p() + 1)?;
    history.push(proposal, bands, eval, Some(acq.ei), acq.flat);
    Ok(())
}

/// Runs the whole loop on the two classes.
pub fn run_ego_mda(
    cfg: &EgoConfig,
    a: &SpectrumSet,
    b: &SpectrumSet,
) -> std::result::Result<EgoResult, EgoFailure> {
    let data = build_dataset(cfg, a, b).map_err(|e| EgoFailure {
        source: e,
        history: Box::new(EgoHistory::new(cfg.n_init)),
    })?;
    let history = initialize_design(cfg, &data)?;
    continue_ego(cfg, &data, history)
}

pub fn build_dataset(cfg: &EgoConfig, a: &SpectrumSet, b: &SpectrumSet) -> Result<Dataset> {
    match cfg.holdout {
        Some(f) => Dataset::with_holdout(a.clone(), b.clone(), f, cfg.seed),
        None => Dataset::new(a.clone(), b.clone()),
    }
}

/// Runs `cfg.iterations` EGO steps from an evaluated initial design.
pub fn continue_ego(
    cfg: &EgoConfig,
    data: &Dataset,
    mut history: EgoHistory,
) -> std::result::Result<EgoResult, EgoFailure> {
    let space = match SearchSpace::new(cfg, data.grid()) {
        Ok(s) => s,
        Err(e) => {
            return Err(EgoFailure {
                source: e,
                history: Box::new(history),
            })
        }
    };
    for _ in 0..cfg.iterations {
        let step = fit_surrogate(&history, &space, cfg)
            .and_then(|model| ego_step(&mut history, &model, data, cfg));
        if let Err(e) = step {
            return Err(EgoFailure {
                source: e,
                history: Box::new(history),
            });
        }
        if let Some(stop) = &cfg.early_stop {
            let trace = &history.records;
            let q = history.q();
            if stop.window > 0 && q >= stop.window {
                let then = trace[trace.len() - 1 - stop.window].best_so_far;
                let now = trace[trace.len() - 1].best_so_far;
                if then - now <= stop.tol {
                    break;
                }
            }
        }
    }
    let best = history.best().expect("non-empty history").clone();
    let classifier = history.incumbent.clone().expect("incumbent classifier");
    Ok(EgoResult {
        bands: best.bands,
        deviance: best.deviance,
        accuracy: best.accuracy,
        classifier,
        history,
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// Class B carries a bump of height `h` on [8, 12]; everything else is noise.
    fn toy(n: usize, h: f64, seed: u64) -> (SpectrumSet, SpectrumSet) {
        let grid = Arc::new(FrequencyGrid::uniform(0.0, 1.0, 31).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = Normal::new(0.0, 1.0).unwrap();
        let mut make = |bump: bool| -> Vec<Vec<f64>> {
            (0..n)
                .map(|_| {
                    (0..31)
                        .map(|f| {
                            let m = if bump && (8..=12).contains(&f) {
                                h
                            } else {
                                0.0
                            };
                            m + z.sample(&mut rng)
                        })
                        .collect()
                })
                .collect()
        };
        let a = SpectrumSet::new(ClassLabel::A, grid.clone(), make(false)).unwrap();
        let b = SpectrumSet::new(ClassLabel::B, grid, make(true)).unwrap();
        (a, b)
    }

    fn small_cfg() -> EgoConfig {
        EgoConfig {
            n_bands: 1,
            n_init: 5,
            iterations: 3,
            mda: MdaSettings {
                k: 1,
                ..MdaSettings::default()
            },
            acquisition: EiSearch {
                budget: 200,
                ..EiSearch::default()
            },
            seed: 4,
            ..EgoConfig::default()
        }
    }

    #[test]
    fn lhs_has_one_point_per_stratum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = latin_hypercube(8, 3, &mut rng);
        for j in 0..3 {
            let mut bins: Vec<usize> = pts.iter().map(|p| (p[j] * 8.0) as usize).collect();
            bins.sort_unstable();
            assert_eq!(bins, (0..8).collect::<Vec<_>>());
        }
    }

    #[test]
    fn counters_after_design_and_steps() {
        let (a, b) = toy(40, 3.0, 2);
        let cfg = small_cfg();
        let data = Dataset::new(a.clone(), b.clone()).unwrap();
        let mut h = initialize_design(&cfg, &data).unwrap();
        assert_eq!((h.p(), h.q()), (5, 0));
        let space = SearchSpace::new(&cfg, data.grid()).unwrap();
        let model = fit_surrogate(&h, &space, &cfg).unwrap();
        ego_step(&mut h, &model, &data, &cfg).unwrap();
        assert_eq!((h.p(), h.q()), (6, 1));
        let r = run_ego_mda(&cfg, &a, &b).unwrap();
        assert_eq!(r.history.p(), r.history.n_init() + r.history.q());
        assert_eq!(r.history.q(), 3);
    }

    #[test]
    fn zero_budget_returns_best_of_design() {
        let (a, b) = toy(30, 3.0, 3);
        let cfg = EgoConfig {
            iterations: 0,
            ..small_cfg()
        };
        let r = run_ego_mda(&cfg, &a, &b).unwrap();
        let min = r
            .history
            .deviances()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        assert_eq!(r.deviance, min);
        assert_eq!(r.history.q(), 0);
    }

    #[test]
    fn holdout_split_sizes() {
        let (a, b) = toy(20, 3.0, 5);
        let d = Dataset::with_holdout(a, b, 0.25, 9).unwrap();
        assert_eq!(d.fit_sets()[0].len(), 15);
        assert_eq!(d.score_sets()[1].len(), 5);
    }

    #[test]
    fn history_csv_layout() {
        let (a, b) = toy(30, 3.0, 6);
        let cfg = EgoConfig {
            iterations: 1,
            ..small_cfg()
        };
        let r = run_ego_mda(&cfg, &a, &b).unwrap();
        let mut buf = Vec::new();
        r.history.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "p,Q,lo_1,hi_1,y,best_so_far");
        assert_eq!(lines.len(), 7);
        assert!(lines[6].starts_with("6,1,"));
    }
}
