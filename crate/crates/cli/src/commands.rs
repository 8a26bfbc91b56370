//! One function per subcommand.

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, ensure, Context};
use egomda::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::args::*;
use crate::manifest::RunManifest;

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> anyhow::Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
        }
    }
}

fn create_out(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn ensure_file(path: &Path) -> anyhow::Result<()> {
    ensure!(path.is_file(), "input file not found: {}", path.display());
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)
        .with_context(|| format!("writing {}", path.display()))
}

fn finish(
    mut manifest: RunManifest,
    dir: &Path,
    outputs: &[&str],
    started: Instant,
) -> anyhow::Result<()> {
    manifest.outputs = outputs.iter().map(|s| s.to_string()).collect();
    manifest.duration_secs = started.elapsed().as_secs_f64();
    manifest.write(dir)
}

fn apply_deviance(
    dev: &mut DevianceConfig,
    eta: Option<f64>,
    w0: Option<f64>,
) -> anyhow::Result<()> {
    *dev = match (eta, w0) {
        (None, None) => return Ok(()),
        (None, Some(w0)) => DevianceConfig::new(1.0 / w0.ln(), w0, dev.prob_floor)?,
        (Some(eta), w0) => DevianceConfig::new(eta, w0.unwrap_or(dev.w0), dev.prob_floor)?,
    };
    Ok(())
}

fn load_inputs(input: &InputArgs) -> anyhow::Result<(SpectrumSet, SpectrumSet)> {
    ensure_file(&input.class_a)?;
    ensure_file(&input.class_b)?;
    let a = load_spectra_csv(&input.class_a, ClassLabel::A)?;
    let b = load_spectra_csv(&input.class_b, ClassLabel::B)?;
    Ok((a, b))
}

pub fn synth(args: &SynthArgs) -> anyhow::Result<()> {
    let started = Instant::now();
    let mut cfg: SynthConfig = load_config(args.config.as_deref())?;
    if let Some(n) = args.n {
        cfg.n_per_class = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    create_out(&args.out)?;

    let (a, b) = generate_synthetic(&cfg)?;
    write_spectra_csv(args.out.join("classA.csv"), &a)?;
    write_spectra_csv(args.out.join("classB.csv"), &b)?;
    let manifest = RunManifest::new("synth", cfg.seed, &cfg, &[])?;
    finish(manifest, &args.out, &["classA.csv", "classB.csv"], started)
}

pub fn discover(args: &DiscoverArgs) -> anyhow::Result<()> {
    let started = Instant::now();
    let mut cfg: EgoConfig = load_config(args.config.as_deref())?;
    let m = &args.model;
    if let Some(l) = m.bands {
        cfg.n_bands = l;
    }
    if let Some(k) = m.k {
        cfg.mda.k = k;
    }
    apply_deviance(&mut cfg.deviance, m.eta, m.w0)?;
    if m.min_width.is_some() {
        cfg.min_width = m.min_width;
    }
    if let Some(q) = args.iterations {
        cfg.iterations = q;
    }
    if let Some(n) = args.n_init {
        cfg.n_init = n;
    }
    if let Some(init) = args.init {
        cfg.init = match init {
            InitArg::Lhs => InitDesign::Lhs,
            InitArg::Random => InitDesign::Random,
        };
    }
    if args.holdout.is_some() {
        cfg.holdout = args.holdout;
    }
    if let Some(r) = &args.range {
        cfg.search_range = Some([r[0], r[1]]);
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
        cfg.mda.seed = s;
    }
    cfg.validate()?;

    let (a, b) = load_inputs(&args.input)?;
    let data = build_dataset(&cfg, &a, &b)?;
    SearchSpace::new(&cfg, data.grid())?;
    create_out(&args.out)?;
    let manifest = RunManifest::new(
        "discover",
        cfg.seed,
        &cfg,
        &[&args.input.class_a, &args.input.class_b],
    )?;

    match run_ego_mda(&cfg, &a, &b) {
        Ok(result) => {
            std::fs::write(args.out.join("bands.json"), result.to_json()?)?;
            result.history.save_csv(args.out.join("history.csv"))?;
            finish(manifest, &args.out, &["bands.json", "history.csv"], started)
        }
        Err(failure) => {
            if !failure.history.is_empty() {
                failure
                    .history
                    .save_csv(args.out.join("history.partial.csv"))?;
            }
            Err(failure.into())
        }
    }
}

pub fn compare(args: &CompareArgs) -> anyhow::Result<()> {
    let started = Instant::now();
    let mut cfg: CompareConfig = load_config(args.config.as_deref())?;
    let m = &args.model;
    if let Some(l) = m.bands {
        cfg.n_bands = l;
    }
    if let Some(k) = m.k {
        cfg.mda.k = k;
    }
    apply_deviance(&mut cfg.deviance, m.eta, m.w0)?;
    if m.min_width.is_some() {
        cfg.min_width = m.min_width;
    }
    if let Some(names) = &args.methods {
        cfg.methods = names
            .iter()
            .map(|s| s.parse::<Method>().map_err(|e| anyhow::anyhow!("{e}")))
            .collect::<anyhow::Result<_>>()?;
    }
    let mut distinct = cfg.methods.clone();
    distinct.sort_by_key(|m| Method::ALL.iter().position(|x| x == m));
    distinct.dedup();
    ensure!(
        distinct.len() >= 2,
        "compare needs at least two distinct methods"
    );
    if let Some(n) = args.r_draws {
        cfg.r_draws = n;
    }
    if let Some(n) = args.rf_trees {
        cfg.rf.n_trees = n;
    }
    if let Some(n) = args.rf_repeats {
        cfg.rf_repeats = n;
    }
    if args.band_width.is_some() {
        cfg.band_width = args.band_width;
    }
    if let Some(n) = args.nm_evals {
        cfg.nm.max_evals = n;
    }
    if let Some(n) = args.ego_runs {
        cfg.ego_runs = n;
    }
    if let Some(n) = args.ego_iterations {
        cfg.ego_iterations = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
        cfg.mda.seed = s;
    }

    let (a, b) = load_inputs(&args.input)?;
    let data = Dataset::new(a, b)?;
    create_out(&args.out)?;
    let manifest = RunManifest::new(
        "compare",
        cfg.seed,
        &cfg,
        &[&args.input.class_a, &args.input.class_b],
    )?;

    let table = compare_methods(&data, &cfg)?;
    table.write_csv(File::create(args.out.join("compare.csv"))?)?;
    write_json(&args.out.join("compare.json"), &table)?;
    for row in &table.rows {
        if let Some(e) = &row.error {
            eprintln!("warning: {} failed: {e}", row.method);
        }
    }
    finish(
        manifest,
        &args.out,
        &["compare.csv", "compare.json"],
        started,
    )
}

/// Per-iteration summary across replication runs.
#[derive(Debug, Serialize)]
struct BoundSummary {
    t: usize,
    bound: f64,
    empirical_error: f64,
    dominated_fraction: f64,
    bound_valid: bool,
}

fn summarise(rows: &[BoundRow], t_max: usize, bound_valid: bool) -> Vec<BoundSummary> {
    (0..=t_max)
        .map(|t| {
            let at: Vec<&BoundRow> = rows.iter().filter(|r| r.t == t).collect();
            let errors: Vec<f64> = at.iter().map(|r| r.empirical_error).collect();
            let bounds: Vec<f64> = at.iter().map(|r| r.bound).collect();
            let dominated = at.iter().filter(|r| r.empirical_error <= r.bound).count();
            BoundSummary {
                t,
                bound: quantile(&bounds, 0.5),
                empirical_error: quantile(&errors, 0.5),
                dominated_fraction: dominated as f64 / at.len().max(1) as f64,
                bound_valid,
            }
        })
        .collect()
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> anyhow::Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn diagnose(args: &DiagnoseArgs) -> anyhow::Result<()> {
    use rayon::prelude::*;

    let started = Instant::now();
    let (rows, t_max, valid, seed, config) = if args.prop == 1 {
        let mut cfg: Prop1Replication = load_config(args.config.as_deref())?;
        if let Some(r) = args.runs {
            cfg.runs = r;
        }
        if let Some(t) = args.t_max {
            cfg.t_max = t;
        }
        if let Some(n) = args.n {
            cfg.n = n;
        }
        if let Some(s) = args.seed {
            cfg.seed = s;
        }
        cfg.params.validate()?;
        ensure!(cfg.runs > 0 && cfg.n > 0, "runs and n must be positive");
        let valid = cfg.params.satisfies_sample_size(cfg.n);
        if !valid {
            eprintln!(
                "warning: n = {} is below the required {}; the bound is reported without its guarantee",
                cfg.n,
                prop1_min_samples(&cfg.params)?
            );
        }
        let traces: Vec<Vec<f64>> = (0..cfg.runs)
            .into_par_iter()
            .map(|run| prop1_error_trace(&cfg, run))
            .collect::<Result<_>>()?;
        let rows: Vec<BoundRow> = traces
            .iter()
            .enumerate()
            .flat_map(|(run, trace)| {
                let p = &cfg.params;
                trace.iter().enumerate().map(move |(t, &e)| BoundRow {
                    run,
                    t,
                    bound: p.bound_unchecked(cfg.n, t, trace[0]),
                    empirical_error: e,
                })
            })
            .collect();
        (
            rows,
            cfg.t_max,
            valid,
            cfg.seed,
            serde_json::to_value(&cfg)?,
        )
    } else {
        let mut cfg: Prop2Replication = load_config(args.config.as_deref())?;
        if let Some(r) = args.runs {
            cfg.runs = r;
        }
        if let Some(t) = args.t_max {
            cfg.t_max = t;
        }
        if let Some(n) = args.n {
            cfg.n = n;
        }
        if let Some(s) = args.seed {
            cfg.seed = s;
        }
        cfg.params.validate()?;
        ensure!(cfg.runs > 0, "runs must be positive");
        let theta_bar = population_theta_bar(&cfg.params)?;
        let bounds: Vec<f64> = (0..=cfg.t_max)
            .map(|t| prop2_bound(&cfg.params, cfg.n, t, cfg.theta0, theta_bar))
            .collect::<Result<_>>()?;
        let traces: Vec<Vec<f64>> = (0..cfg.runs)
            .into_par_iter()
            .map(|run| prop2_theta_trace(&cfg, run))
            .collect::<Result<_>>()?;
        let rows: Vec<BoundRow> = traces
            .iter()
            .enumerate()
            .flat_map(|(run, trace)| {
                let bounds = &bounds;
                trace.iter().enumerate().map(move |(t, &th)| BoundRow {
                    run,
                    t,
                    bound: bounds[t],
                    empirical_error: (th - theta_bar).abs(),
                })
            })
            .collect();
        (rows, cfg.t_max, true, cfg.seed, serde_json::to_value(&cfg)?)
    };

    create_out(&args.out)?;
    write_rows(
        &args.out.join("bounds.csv"),
        &summarise(&rows, t_max, valid),
    )?;
    write_rows(&args.out.join("runs.csv"), &rows)?;
    let mut manifest = RunManifest::new("diagnose", seed, &config, &[])?;
    manifest.config = serde_json::json!({ "prop": args.prop, "replication": config });
    finish(manifest, &args.out, &["bounds.csv", "runs.csv"], started)
}

pub fn report(args: &ReportArgs, out: &mut impl Write) -> anyhow::Result<()> {
    ensure_file(&args.result)?;
    let text = std::fs::read_to_string(&args.result)
        .with_context(|| format!("reading {}", args.result.display()))?;
    let result = EgoResult::from_json(&text)
        .with_context(|| format!("parsing {}", args.result.display()))?;

    writeln!(out, "band  lo  hi  width")?;
    for (i, b) in result.bands.bands().iter().enumerate() {
        writeln!(out, "{}  {}  {}  {}", i + 1, b.lo, b.hi, b.width())?;
    }
    writeln!(out, "deviance  {}", result.deviance)?;
    writeln!(out, "accuracy  {}", result.accuracy)?;
    writeln!(out, "evaluations  {}", result.history.p())?;
    writeln!(out, "iterations  {}", result.history.q())?;

    if let Some(truth) = &args.truth {
        let truth = BandSet::from_boundaries(truth).context("parsing --truth")?;
        if truth.len() != result.bands.len() {
            bail!(
                "--truth has {} bands, the result has {}",
                truth.len(),
                result.bands.len()
            );
        }
        let tae = total_absolute_error(&result.bands, &truth)?;
        let solutions: Vec<BandSet> = result
            .history
            .records()
            .iter()
            .map(|r| r.bands.clone())
            .collect();
        let stats = overlap_stats(&solutions, &truth)?;
        writeln!(out, "total_absolute_error  {tae}")?;
        writeln!(out, "complete_overlap  {}", stats.complete)?;
        writeln!(out, "partial_overlap  {}", stats.partial)?;
        writeln!(out, "width_ratio  {}", stats.width_ratio)?;
    }
    Ok(())
}
