//! Runs the band-search methods on the same data and deviance settings and
//! summarises their deviance distributions.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::forest::RfConfig;
use crate::baselines::methods::{nm_mda, r_mda, r_mda_draws, rf_mda, RMdaConfig, ScoredBands};
use crate::baselines::nelder_mead::NmConfig;
use crate::ego::{continue_ego, initialize_with, Dataset, EgoConfig, RangeUnits};
use crate::error::{Error, Result};
use crate::mixture::{DevianceConfig, MdaSettings};
use crate::seed;
use crate::spectra::BandSet;
use crate::surrogate::{EiSearch, KernelConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "r-mda")]
    RMda,
    #[serde(rename = "rf-mda")]
    RfMda,
    #[serde(rename = "nm-mda")]
    NmMda,
    #[serde(rename = "ego-mda")]
    EgoMda,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::RMda, Method::RfMda, Method::NmMda, Method::EgoMda];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::RMda => "R-MDA",
            Method::RfMda => "RF-MDA",
            Method::NmMda => "NM-MDA",
            Method::EgoMda => "EGO-MDA",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "r-mda" | "r" => Ok(Method::RMda),
            "rf-mda" | "rf" => Ok(Method::RfMda),
            "nm-mda" | "nm" => Ok(Method::NmMda),
            "ego-mda" | "ego" => Ok(Method::EgoMda),
            _ => Err(Error::InvalidParameter(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareConfig {
    pub methods: Vec<Method>,
    pub n_bands: usize,
    pub mda: MdaSettings,
    pub deviance: DevianceConfig,
    pub min_width: Option<f64>,
    /// Random band sets drawn for R-MDA; they also seed the EGO runs.
    pub r_draws: usize,
    pub neighborhood: Option<[f64; 2]>,
    /// Uniform band width for RF-MDA; range / 25 when unset.
    pub band_width: Option<f64>,
    pub rf: RfConfig,
    /// Forest seeds tried for RF-MDA; NM-MDA starts once from each result.
    pub rf_repeats: usize,
    pub nm: NmConfig,
    /// EGO runs, each started from its own slice of the R-MDA draws.
    pub ego_runs: usize,
    pub ego_iterations: usize,
    pub kernel: KernelConfig,
    pub kernel_units: RangeUnits,
    pub acquisition: EiSearch,
    pub seed: u64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            methods: Method::ALL.to_vec(),
            n_bands: 2,
            mda: MdaSettings::default(),
            deviance: DevianceConfig::default(),
            min_width: None,
            r_draws: 50,
            neighborhood: None,
            band_width: None,
            rf: RfConfig::default(),
            rf_repeats: 3,
            nm: NmConfig {
                initial_step: 2.0,
                max_evals: 200,
                tol: 1e-3,
                ..NmConfig::default()
            },
            ego_runs: 5,
            ego_iterations: 50,
            kernel: KernelConfig::default(),
            kernel_units: RangeUnits::Hz,
            acquisition: EiSearch::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub deviances: Vec<f64>,
    pub accuracies: Vec<f64>,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean_accuracy: f64,
    pub best_bands: Option<BandSet>,
    /// `100 (median − EGO median) / median`; absent for EGO-MDA itself.
    pub improvement_pct: Option<f64>,
    pub error: Option<String>,
}

impl MethodSummary {
    fn from_runs(method: Method, runs: &[ScoredBands]) -> Self {
        let deviances: Vec<f64> = runs.iter().map(|r| r.deviance).collect();
        let accuracies: Vec<f64> = runs.iter().map(|r| r.accuracy).collect();
        let best = runs
            .iter()
            .min_by(|a, b| a.deviance.total_cmp(&b.deviance))
            .map(|r| r.bands.clone());
        let q = |p| quantile(&deviances, p);
        MethodSummary {
            method,
            min: q(0.0),
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: q(1.0),
            mean_accuracy: accuracies.iter().sum::<f64>() / accuracies.len().max(1) as f64,
            deviances,
            accuracies,
            best_bands: best,
            improvement_pct: None,
            error: None,
        }
    }

    fn failed(method: Method, e: &Error) -> Self {
        MethodSummary {
            method,
            deviances: vec![],
            accuracies: vec![],
            min: f64::NAN,
            q1: f64::NAN,
            median: f64::NAN,
            q3: f64::NAN,
            max: f64::NAN,
            mean_accuracy: f64::NAN,
            best_bands: None,
            improvement_pct: None,
            error: Some(e.to_string()),
        }
    }
}

/// Linear-interpolation quantile of unsorted data; `NaN` when empty.
pub fn quantile(v: &[f64], p: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let h = p * (s.len() - 1) as f64;
    let i = h.floor() as usize;
    let j = (i + 1).min(s.len() - 1);
    s[i] + (h - i as f64) * (s[j] - s[i])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<MethodSummary>,
    pub deviance: DevianceConfig,
    /// SHA-256 of the JSON form of the deviance settings shared by all methods.
    pub deviance_hash: String,
    pub seed: u64,
}

impl ComparisonTable {
    pub fn row(&self, method: Method) -> Option<&MethodSummary> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let e = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        w.write_record([
            "method",
            "count",
            "min",
            "q1",
            "median",
            "q3",
            "max",
            "mean_accuracy",
            "improvement_pct",
            "deviance_hash",
            "error",
        ])
        .map_err(e)?;
        for r in &self.rows {
            w.write_record([
                r.method.to_string(),
                r.deviances.len().to_string(),
                r.min.to_string(),
                r.q1.to_string(),
                r.median.to_string(),
                r.q3.to_string(),
                r.max.to_string(),
                r.mean_accuracy.to_string(),
                r.improvement_pct.map_or(String::new(), |v| v.to_string()),
                self.deviance_hash.clone(),
                r.error.clone().unwrap_or_default(),
            ])
            .map_err(e)?;
        }
        w.flush().map_err(|err| Error::io("<compare>", err))
    }
}

pub fn deviance_hash(cfg: &DevianceConfig) -> String {
    let json = serde_json::to_string(cfg).expect("plain struct serialises");
    hex::encode(Sha256::digest(json.as_bytes()))
}

/// Runs the configured methods. A method that fails gets a row with its
/// error message instead of aborting the table.
pub fn compare_methods(data: &Dataset, cfg: &CompareConfig) -> Result<ComparisonTable> {
    if cfg.methods.is_empty() {
        return Err(Error::InvalidParameter("no methods requested".into()));
    }
    let wants = |m| cfg.methods.contains(&m);
    let r_cfg = RMdaConfig {
        n_bands: cfg.n_bands,
        neighborhood: cfg.neighborhood,
        n_draws: cfg.r_draws,
        min_width: cfg.min_width,
        seed: seed::derive(cfg.seed, seed::domain::COMPARE, 0),
    };
    let mut rows = Vec::new();

    if wants(Method::RMda) {
        rows.push(match r_mda(data, &r_cfg, &cfg.mda, &cfg.deviance) {
            Ok(runs) => MethodSummary::from_runs(Method::RMda, &runs),
            Err(e) => MethodSummary::failed(Method::RMda, &e),
        });
    }

    let rf_runs: Result<Vec<ScoredBands>> = if wants(Method::RfMda) || wants(Method::NmMda) {
        (0..cfg.rf_repeats.max(1))
            .map(|i| {
                let rf = RfConfig {
                    seed: seed::derive(cfg.seed, seed::domain::FOREST, i as u64),
                    ..cfg.rf.clone()
                };
                rf_mda(
                    data,
                    cfg.band_width,
                    cfg.n_bands,
                    &rf,
                    &cfg.mda,
                    &cfg.deviance,
                )
                .map(|r| r.selected)
            })
            .collect()
    } else {
        Ok(vec![])
    };
    if wants(Method::RfMda) {
        rows.push(match &rf_runs {
            Ok(runs) => MethodSummary::from_runs(Method::RfMda, runs),
            Err(e) => MethodSummary::failed(Method::RfMda, e),
        });
    }
    if wants(Method::NmMda) {
        let nm = rf_runs.as_ref().map_err(clone_err).and_then(|starts| {
            starts
                .iter()
                .map(|s| {
                    nm_mda(
                        data,
                        &s.bands,
                        &cfg.nm,
                        cfg.min_width,
                        &cfg.mda,
                        &cfg.deviance,
                    )
                    .map(|r| r.best)
                })
                .collect::<Result<Vec<_>>>()
        });
        rows.push(match nm {
            Ok(runs) => MethodSummary::from_runs(Method::NmMda, &runs),
            Err(e) => MethodSummary::failed(Method::NmMda, &e),
        });
    }

    if wants(Method::EgoMda) {
        rows.push(match run_ego_batch(data, cfg, &r_cfg) {
            Ok(runs) => MethodSummary::from_runs(Method::EgoMda, &runs),
            Err(e) => MethodSummary::failed(Method::EgoMda, &e),
        });
    }

    if let Some(ego) = rows
        .iter()
        .find(|r| r.method == Method::EgoMda)
        .map(|r| r.median)
    {
        for r in rows.iter_mut().filter(|r| r.method != Method::EgoMda) {
            if r.error.is_none() && ego.is_finite() {
                r.improvement_pct = Some(100.0 * (r.median - ego) / r.median);
            }
        }
    }
    Ok(ComparisonTable {
        rows,
        deviance_hash: deviance_hash(&cfg.deviance),
        deviance: cfg.deviance.clone(),
        seed: cfg.seed,
    })
}

fn clone_err(e: &Error) -> Error {
    Error::InvalidParameter(e.to_string())
}

/// EGO runs, run `i` starting from the `i`-th equal slice of the R-MDA draws.
fn run_ego_batch(
    data: &Dataset,
    cfg: &CompareConfig,
    r_cfg: &RMdaConfig,
) -> Result<Vec<ScoredBands>> {
    let runs = cfg.ego_runs.max(1);
    let per_run = cfg.r_draws / runs;
    if per_run < 2 {
        return Err(Error::InvalidParameter(format!(
            "{} R-MDA draws cannot seed {runs} EGO runs with at least 2 points each",
            cfg.r_draws
        )));
    }
    let draws = r_mda_draws(data.grid(), r_cfg)?;
    (0..runs)
        .map(|i| {
            let ego = EgoConfig {
                n_bands: cfg.n_bands,
                n_init: per_run,
                iterations: cfg.ego_iterations,
                search_range: cfg.neighborhood,
                min_width: cfg.min_width,
                mda: cfg.mda.clone(),
                deviance: cfg.deviance.clone(),
                kernel: cfg.kernel.clone(),
                kernel_units: cfg.kernel_units,
                acquisition: cfg.acquisition.clone(),
                seed: seed::derive(cfg.seed, seed::domain::COMPARE, 1 + i as u64),
                ..EgoConfig::default()
            };
            let raw: Vec<Vec<f64>> = draws[i * per_run..(i + 1) * per_run]
                .iter()
                .map(|d| d.0.clone())
                .collect();
            let result = initialize_with(&ego, data, &raw)
                .and_then(|h| continue_ego(&ego, data, h))
                .map_err(|f| f.source)?;
            Ok(ScoredBands {
                bands: result.bands,
                deviance: result.deviance,
                accuracy: result.accuracy,
            })
        })
        .collect()
}
