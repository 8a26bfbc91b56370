use criterion::{criterion_group, criterion_main, Criterion};
use egomda::*;
use std::hint::black_box;

fn data() -> Dataset {
    let (a, b) = generate_synthetic(&SynthConfig {
        n_per_class: 500,
        seed: 1,
        ..SynthConfig::default()
    })
    .unwrap();
    Dataset::new(a, b).unwrap()
}

fn band_energy_matrix(c: &mut Criterion) {
    let data = data();
    let bands = BandSet::from_boundaries(&[20.5, 25.5, 50.5, 55.5]).unwrap();
    c.bench_function("energy_matrix 1000x2", |b| {
        b.iter(|| energy_matrix(black_box(data.fit_sets()), &bands).unwrap())
    });
}

fn mda_fit(c: &mut Criterion) {
    let data = data();
    let bands = SynthConfig::default().truth().unwrap();
    let energies = energy_matrix(data.fit_sets(), &bands).unwrap();
    let settings = MdaSettings::default();
    c.bench_function("fit_mda k=3 d=2", |b| {
        b.iter(|| fit_mda(black_box(&energies), &settings).unwrap())
    });
    c.bench_function("evaluate_bands", |b| {
        b.iter(|| evaluate_bands(&bands, &data, &settings, &DevianceConfig::default()).unwrap())
    });
}

fn surrogate(c: &mut Criterion) {
    let points: Vec<Vec<f64>> = (0..100)
        .map(|i| {
            (0..4)
                .map(|j| ((i * 7 + j * 13) % 101) as f64 / 100.0)
                .collect()
        })
        .collect();
    let values: Vec<f64> = points
        .iter()
        .map(|p| p.iter().map(|x| (x - 0.4).powi(2)).sum())
        .collect();
    let cfg = KernelConfig {
        theta_r: 0.3,
        ..KernelConfig::default()
    };
    c.bench_function("gpr_fit n=100 d=4", |b| {
        b.iter(|| gpr_fit(black_box(&points), &values, &cfg).unwrap())
    });
    let model = gpr_fit(&points, &values, &cfg).unwrap();
    let y_min = model.min_value();
    c.bench_function("maximize_ei 2000 candidates", |b| {
        b.iter(|| maximize_ei(&model, y_min, 2000, 3))
    });
}

fn forest(c: &mut Criterion) {
    let data = data();
    let grid = UniformBandGrid::for_grid(data.grid(), None).unwrap();
    let energies = energy_matrix(data.fit_sets(), &grid.band_set()).unwrap();
    let cfg = RfConfig {
        n_trees: 50,
        ..RfConfig::default()
    };
    let mut group = c.benchmark_group("forest");
    group.sample_size(10);
    group.bench_function("rf_importance 50 trees", |b| {
        b.iter(|| rf_importance(black_box(&energies), &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, band_energy_matrix, mda_fit, surrogate, forest);
criterion_main!(benches);
