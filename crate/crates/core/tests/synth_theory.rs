//! Synthetic generator, ground-truth metrics and the convergence-bound
//! calculators.

use egomda::*;
use proptest::prelude::*;

fn bands(v: &[f64]) -> BandSet {
    BandSet::from_boundaries(v).unwrap()
}

#[test]
fn noise_region_has_zero_mean() {
    let cfg = SynthConfig {
        n_per_class: 1000,
        seed: 21,
        ..SynthConfig::default()
    };
    let (a, b) = generate_synthetic(&cfg).unwrap();
    for set in [&a, &b] {
        for f in [0usize, 10, 40, 70, 100] {
            let mean = set.spectra().iter().map(|s| s.values()[f]).sum::<f64>() / set.len() as f64;
            assert!(mean.abs() < 0.15, "class {} f={f}: {mean}", set.label());
        }
    }
}

#[test]
fn in_band_mean_matches_mixture_mean() {
    let cfg = SynthConfig {
        n_per_class: 4000,
        seed: 5,
        ..SynthConfig::default()
    };
    let (a, b) = generate_synthetic(&cfg).unwrap();
    // (f, class set, bump mean); mixture mean is 0.2 × bump mean.
    let cases = [
        (21usize, &a, 37.0),
        (23, &a, 69.0),
        (25, &a, 37.0),
        (53, &b, 84.0),
        (52, &b, 68.0),
    ];
    for (f, set, bump) in cases {
        let n = set.len() as f64;
        let mean = 0.2 * bump;
        let var = 0.8 * 1.0 + 0.2 * (1.0 + bump * bump) - mean * mean;
        let got = set.spectra().iter().map(|s| s.values()[f]).sum::<f64>() / n;
        let se = (var / n).sqrt();
        assert!(
            (got - mean).abs() <= 3.0 * se,
            "f={f}: {got} vs {mean} ± {se}"
        );
    }
    // Each class only bumps inside its own band.
    let mean_b23 = b.spectra().iter().map(|s| s.values()[23]).sum::<f64>() / b.len() as f64;
    assert!(mean_b23.abs() < 0.15);
}

#[test]
fn component_means_at_band_centres() {
    let cfg = SynthConfig::default();
    assert_eq!(cfg.bump_a.component_mean(23.0), Some(69.0));
    assert_eq!(cfg.bump_b.component_mean(53.0), Some(84.0));
    assert_eq!(cfg.bump_a.component_mean(30.0), None);
}

#[test]
fn single_realization_is_valid() {
    let cfg = SynthConfig {
        n_per_class: 1,
        ..SynthConfig::default()
    };
    let (a, b) = generate_synthetic(&cfg).unwrap();
    assert_eq!((a.len(), b.len(), a.grid().len()), (1, 1, 101));
}

fn sorted_bandset() -> impl Strategy<Value = BandSet> {
    prop::collection::vec(0.0f64..100.0, 4).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v[1] = v[1].max(v[0] + 1e-3);
        v[2] = v[2].max(v[1]);
        v[3] = v[3].max(v[2] + 1e-3);
        bands(&v)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn total_absolute_error_is_a_metric(x in sorted_bandset(), y in sorted_bandset(), z in sorted_bandset()) {
        let d = |p: &BandSet, q: &BandSet| total_absolute_error(p, q).unwrap();
        prop_assert!(d(&x, &y) >= 0.0);
        prop_assert_eq!(d(&x, &x), 0.0);
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-9);
        if x != y {
            prop_assert!(d(&x, &y) > 0.0);
        }
    }

    #[test]
    fn min_samples_boundary_is_sharp(
        pi_min in 0.05f64..0.5,
        lambda in 0.01f64..0.45,
        delta in 0.01f64..0.5,
        r in 1.0f64..30.0,
        c in 0.1f64..5.0,
    ) {
        let p = Prop1Params { pi_min, lambda, delta, r_min: r, r_max: r, c, ..Prop1Params::default() };
        let n = prop1_min_samples(&p).unwrap();
        prop_assert!(p.satisfies_sample_size(n));
        if n > 3 {
            prop_assert!(!p.satisfies_sample_size(n - 1));
        }
    }

    #[test]
    fn misspecified_em_is_odd_in_data_and_start(seed in 0u64..1000, theta0 in 0.1f64..2.0) {
        let p = Prop2Params::default();
        let x = sample_misspecified(&p, 300, seed).unwrap();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let t1 = em_misspecified(&x, theta0, 20).unwrap();
        let t2 = em_misspecified(&neg, -theta0, 20).unwrap();
        for (a, b) in t1.iter().zip(&t2) {
            prop_assert_eq!(*a, -*b);
        }
    }
}

#[test]
fn hand_counted_overlap_fractions() {
    let truth = bands(&[21.0, 25.0, 51.0, 55.0]);
    let history = [
        bands(&[20.0, 26.0, 50.0, 56.0]), // both contained
        bands(&[22.0, 30.0, 60.0, 70.0]), // partial on the first only
        bands(&[0.0, 5.0, 6.0, 10.0]),    // dormant
        bands(&[21.0, 25.0, 40.0, 60.0]), // both contained
    ];
    let s = overlap_stats(&history, &truth).unwrap();
    assert!((s.complete - 0.5).abs() < 1e-12);
    assert!((s.partial - 0.75).abs() < 1e-12);
    // Widths 12, 18, 9, 24 against 8.
    let ratio = (12.0 / 8.0 + 18.0 / 8.0 + 9.0 / 8.0 + 24.0 / 8.0) / 4.0 - 1.0;
    assert!((s.width_ratio - ratio).abs() < 1e-12);
}

#[test]
fn tae_examples() {
    let truth = bands(&[21.0, 25.0, 51.0, 55.0]);
    assert_eq!(total_absolute_error(&truth, &truth).unwrap(), 0.0);
    assert_eq!(
        total_absolute_error(&bands(&[20.0, 26.0, 51.0, 55.0]), &truth).unwrap(),
        2.0
    );
    assert!(total_absolute_error(&bands(&[20.0, 26.0]), &truth).is_err());
}

#[test]
fn min_samples_equals_brute_force_scan() {
    let p = Prop1Params::default();
    // Written out independently from the defaults: K=2, d=1, C=1, δ=0.05,
    // λ=0.05, R=18, π_min=0.5.
    let (k, d, c, delta, lambda, r, pi) = (2.0f64, 1.0f64, 1.0, 0.05, 0.05, 18.0f64, 0.5);
    let c_tilde = 100.0 * k * k * r * (d.sqrt() + 2.0 * r).powi(2);
    let sep = 1.0 / (lambda * lambda * pi * r * r * (1.0 - 2.0 * lambda).powi(2));
    let rhs = c * k * d * (c_tilde / delta).ln() / pi * sep.max(1.0);
    let scan = (3usize..)
        .find(|&n| n as f64 / (n as f64).ln() > rhs)
        .unwrap();
    assert_eq!(prop1_min_samples(&p).unwrap(), scan);
}

#[test]
fn min_samples_monotone_in_pi_min_and_c() {
    let base = Prop1Params::default();
    let mut last = 0;
    for pi in [0.5, 0.4, 0.3, 0.2, 0.1] {
        let n = prop1_min_samples(&Prop1Params {
            pi_min: pi,
            ..base.clone()
        })
        .unwrap();
        assert!(n >= last);
        last = n;
    }
    let n1 = prop1_min_samples(&base).unwrap();
    let n2 = prop1_min_samples(&Prop1Params {
        c: 2.0,
        ..base.clone()
    })
    .unwrap();
    assert!(n2 >= n1);
}

#[test]
fn prop1_bound_limits() {
    let p = Prop1Params::default();
    let n = prop1_min_samples(&p).unwrap() + 10;
    let floor = p.floor(n, p.pi_min);
    assert_eq!(prop1_error_bound(&p, n, 0, 2.0).unwrap(), 2.0 + floor);
    assert!((prop1_error_bound(&p, n, 2000, 2.0).unwrap() - floor).abs() < 1e-15);
    assert!(matches!(
        prop1_error_bound(&p, 100, 0, 2.0),
        Err(Error::BoundNotValid(_))
    ));
}

#[test]
fn misspecified_sample_moments() {
    let p = Prop2Params::default();
    assert_eq!(p.component_means(), [-1.04, -0.96, 1.0]);
    let x = sample_misspecified(&p, 100_000, 3).unwrap();
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    assert!(mean.abs() < 0.02, "{mean}");
}

#[test]
fn misspecified_em_converges_into_the_interval() {
    let p = Prop2Params::default();
    let x = sample_misspecified(&p, 1500, 17).unwrap();
    let trace = em_misspecified(&x, 0.6, 200).unwrap();
    let step = trace.windows(2).position(|w| (w[1] - w[0]).abs() < 1e-6);
    assert!(step.is_some(), "no convergence within 200 iterations");
    let [lo, hi] = p.neighbourhood();
    let entry = trace.iter().position(|t| (lo..=hi).contains(t)).unwrap();
    assert!(trace[entry..].iter().all(|t| (lo..=hi).contains(t)));
}

#[test]
fn prop2_bound_shrinks_with_n_and_time() {
    let p = Prop2Params::default();
    let tb = population_theta_bar(&p).unwrap();
    let mut last = f64::INFINITY;
    for n in [200, 500, 1500, 10_000] {
        let b = prop2_bound(&p, n, 3, 0.6, tb).unwrap();
        assert!(b < last);
        last = b;
    }
    assert!((prop2_bound(&p, 1500, 10_000, 0.6, tb).unwrap() - p.floor(1500)).abs() < 1e-15);
    assert!(prop2_bound(&p, 1, 0, 0.6, tb).is_err());
}
