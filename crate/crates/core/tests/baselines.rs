//! Random forest, RF-MDA, R-MDA, NM-MDA and the comparison harness.

use egomda::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn synthetic(n: usize, seed: u64) -> Dataset {
    let (a, b) = generate_synthetic(&SynthConfig {
        n_per_class: n,
        seed,
        ..SynthConfig::default()
    })
    .unwrap();
    Dataset::new(a, b).unwrap()
}

fn labelled(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<ClassLabel>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Normal::new(0.0, 1.0).unwrap();
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let label = if i % 2 == 0 {
            ClassLabel::A
        } else {
            ClassLabel::B
        };
        let s = if label == ClassLabel::A { -1.0 } else { 1.0 };
        rows.push(vec![
            s + 0.8 * z.sample(&mut rng),
            z.sample(&mut rng),
            z.sample(&mut rng),
            z.sample(&mut rng),
        ]);
        y.push(label);
    }
    (rows, y)
}

#[test]
fn duplicated_columns_share_importance() {
    let (rows, y) = labelled(400, 1);
    let dup: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0], r[0], r[1], r[2]]).collect();
    let forest = train_forest(
        &Samples::from_rows(&dup),
        &y,
        &RfConfig {
            seed: 3,
            ..RfConfig::default()
        },
    )
    .unwrap();
    let imp = forest.importance();
    assert!(imp[0] < 2.0 * imp[1] && imp[1] < 2.0 * imp[0], "{imp:?}");
    assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn forest_ignores_monotone_feature_transforms() {
    let (rows, y) = labelled(300, 2);
    let warped: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r[0].exp(), 3.0 * r[1] - 7.0, r[2].powi(3), r[3].atan()])
        .collect();
    let cfg = RfConfig {
        n_trees: 60,
        seed: 9,
        ..RfConfig::default()
    };
    let f1 = train_forest(&Samples::from_rows(&rows), &y, &cfg).unwrap();
    let f2 = train_forest(&Samples::from_rows(&warped), &y, &cfg).unwrap();
    for (r, w) in rows.iter().zip(&warped) {
        assert_eq!(f1.predict(r), f2.predict(w));
    }
    assert_eq!(f1.importance(), f2.importance());
}

fn ks_uniform(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn random_band_draws_are_uniform() {
    let draws: Vec<RandomBands> = (0..200)
        .map(|i| {
            let mut rng = seed::rng(42, seed::domain::RANDOM_BANDS, i);
            draw_random_boundaries(2, 0.0, 100.0, 1.0, &mut rng)
        })
        .collect();
    for j in 0..4 {
        let d = ks_uniform(draws.iter().map(|r| r.unit[j]).collect());
        assert!(d < 0.15, "coordinate {j}: KS {d}");
    }
}

#[test]
fn random_draws_respect_the_neighbourhood() {
    let grid = FrequencyGrid::uniform(0.0, 1.0, 101).unwrap();
    let cfg = RMdaConfig {
        n_bands: 3,
        neighborhood: Some([10.0, 60.0]),
        n_draws: 300,
        min_width: None,
        seed: 4,
    };
    for (_, set) in r_mda_draws(&grid, &cfg).unwrap() {
        for b in set.bands() {
            assert!(b.lo >= 10.0 && b.hi <= 60.0 && b.width() >= 1.0 - 1e-9);
        }
    }
    let one = RMdaConfig { n_draws: 1, ..cfg };
    assert_eq!(
        r_mda_draws(&grid, &one).unwrap(),
        r_mda_draws(&grid, &one).unwrap()
    );
    let outside = RMdaConfig {
        neighborhood: Some([-5.0, 60.0]),
        ..one
    };
    assert!(r_mda_draws(&grid, &outside).is_err());
}

#[test]
fn rf_mda_picks_the_signal_bands() {
    let data = synthetic(400, 7);
    let truth = SynthConfig::default().truth().unwrap();
    let rf = RfConfig {
        n_trees: 100,
        seed: 1,
        ..RfConfig::default()
    };
    let run = || {
        rf_mda(
            &data,
            Some(4.0),
            2,
            &rf,
            &MdaSettings::default(),
            &DevianceConfig::default(),
        )
        .unwrap()
    };
    let r = run();
    for t in truth.bands() {
        assert!(
            r.selected
                .bands
                .bands()
                .iter()
                .any(|b| b.intersection(t) > 0.0),
            "{}",
            r.selected.bands
        );
    }
    assert_eq!(r, run());
}

#[test]
fn all_uniform_bands_pay_the_full_range_penalty() {
    let data = synthetic(200, 3);
    let dev = DevianceConfig::default();
    let mda = MdaSettings {
        k: 1,
        ..MdaSettings::default()
    };
    let rf = RfConfig {
        n_trees: 20,
        ..RfConfig::default()
    };
    let r = rf_mda(&data, Some(10.0), 10, &rf, &mda, &dev).unwrap();
    let e = evaluate_bands(&r.selected.bands, &data, &mda, &dev).unwrap();
    assert!((e.penalty - dev.eta * 100f64.ln()).abs() < 1e-12);
    assert_eq!(e.deviance, r.selected.deviance);
}

#[test]
fn nm_mda_never_ends_worse_than_its_start() {
    let data = synthetic(300, 11);
    let truth = SynthConfig::default().truth().unwrap();
    let nm = NmConfig {
        initial_step: 2.0,
        max_evals: 60,
        tol: 1e-3,
        ..NmConfig::default()
    };
    let mda = MdaSettings::default();
    let dev = DevianceConfig::default();
    let r = nm_mda(&data, &truth, &nm, None, &mda, &dev).unwrap();
    assert!(r.best.deviance <= r.initial_deviance);
    assert_eq!(r, nm_mda(&data, &truth, &nm, None, &mda, &dev).unwrap());
}

#[test]
fn nm_mda_improves_on_rf_mda() {
    let data = synthetic(400, 12);
    let mda = MdaSettings::default();
    let dev = DevianceConfig::default();
    let rf = rf_mda(&data, None, 2, &RfConfig::default(), &mda, &dev).unwrap();
    let nm = NmConfig {
        initial_step: 2.0,
        max_evals: 150,
        tol: 1e-3,
        ..NmConfig::default()
    };
    let r = nm_mda(&data, &rf.selected.bands, &nm, None, &mda, &dev).unwrap();
    assert!(
        r.best.deviance < rf.selected.deviance,
        "{} vs {}",
        r.best.deviance,
        rf.selected.deviance
    );
}

fn small_compare(seed: u64) -> CompareConfig {
    CompareConfig {
        r_draws: 8,
        rf: RfConfig {
            n_trees: 30,
            ..RfConfig::default()
        },
        rf_repeats: 2,
        nm: NmConfig {
            initial_step: 2.0,
            max_evals: 25,
            tol: 1e-3,
            ..NmConfig::default()
        },
        ego_runs: 2,
        ego_iterations: 3,
        acquisition: EiSearch {
            budget: 200,
            ..EiSearch::default()
        },
        seed,
        ..CompareConfig::default()
    }
}

#[test]
fn comparison_table_shape_and_formula() {
    let data = synthetic(150, 2);
    let cfg = small_compare(5);
    let table = compare_methods(&data, &cfg).unwrap();
    let counts: Vec<(Method, usize)> = table
        .rows
        .iter()
        .map(|r| (r.method, r.deviances.len()))
        .collect();
    assert_eq!(
        counts,
        vec![
            (Method::RMda, 8),
            (Method::RfMda, 2),
            (Method::NmMda, 2),
            (Method::EgoMda, 2)
        ]
    );
    assert_eq!(table.deviance_hash, deviance_hash(&cfg.deviance));
    let ego = table.row(Method::EgoMda).unwrap().median;
    for r in table.rows.iter().filter(|r| r.method != Method::EgoMda) {
        let expected = 100.0 * (r.median - ego) / r.median;
        assert!((r.improvement_pct.unwrap() - expected).abs() < 1e-12);
        assert!(r.q1 <= r.median && r.median <= r.q3 && r.min <= r.q1 && r.q3 <= r.max);
    }
    assert_eq!(table, compare_methods(&data, &cfg).unwrap());

    let mut csv = Vec::new();
    table.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.contains(&table.deviance_hash)));
}

#[test]
fn failing_method_is_reported_not_fatal() {
    let data = synthetic(100, 4);
    let cfg = CompareConfig {
        methods: vec![Method::RMda, Method::EgoMda],
        ego_runs: 5,
        ..small_compare(1)
    };
    let table = compare_methods(&data, &cfg).unwrap();
    assert!(table.row(Method::RMda).unwrap().error.is_none());
    let ego = table.row(Method::EgoMda).unwrap();
    assert!(ego.error.is_some() && ego.deviances.is_empty());
}
