use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use isentropy::{
    cell_case_distribution, entropy_field, fit_model, inject_noise, normal_cdf, synthetic_base,
    EnsembleField, GridDims, ModelKind, NoiseKind, NoiseSpec,
};

fn ensemble(dims: GridDims, members: usize) -> EnsembleField {
    let spec = NoiseSpec {
        kind: NoiseKind::Gaussian,
        magnitude: 0.2,
        member_count: members,
        seed: 7,
    };
    inject_noise(&synthetic_base(dims), dims, &spec).unwrap()
}

fn case_expansion(c: &mut Criterion) {
    let mut group = c.benchmark_group("cell_case_distribution");
    let d2 = [0.1, 0.5, 0.7, 0.95];
    let d3 = [0.1, 0.5, 0.7, 0.95, 0.3, 0.6, 0.2, 0.85];
    group.bench_function("2d", |b| {
        b.iter(|| cell_case_distribution(black_box(&d2)).unwrap().entropy())
    });
    group.bench_function("3d", |b| {
        b.iter(|| cell_case_distribution(black_box(&d3)).unwrap().entropy())
    });
    group.finish();
}

fn gaussian_cdf(c: &mut Criterion) {
    c.bench_function("normal_cdf", |b| b.iter(|| normal_cdf(black_box(-1.3))));
}

fn fitting(c: &mut Criterion) {
    let field = ensemble(GridDims::new(64, 64, 8).unwrap(), 20);
    let mut group = c.benchmark_group("fit_model/64x64x8x20");
    group.sample_size(20);
    for kind in [
        ModelKind::FullEmpirical,
        ModelKind::Uniform,
        ModelKind::Gaussian,
        ModelKind::Histogram(5),
        ModelKind::Quantile(5),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(kind), &kind, |b, &kind| {
            b.iter(|| fit_model(&field, kind).unwrap())
        });
    }
    group.finish();
}

fn entropy(c: &mut Criterion) {
    let mut group = c.benchmark_group("entropy_field");
    group.sample_size(20);
    for (label, dims) in [
        ("2d_256x256", GridDims::new_2d(256, 256).unwrap()),
        ("3d_64x64x16", GridDims::new(64, 64, 16).unwrap()),
    ] {
        let field = ensemble(dims, 20);
        for kind in [
            ModelKind::FullEmpirical,
            ModelKind::Gaussian,
            ModelKind::Quantile(5),
        ] {
            let models = fit_model(&field, kind).unwrap();
            group.bench_with_input(BenchmarkId::new(label, kind), &models, |b, m| {
                b.iter(|| entropy_field(m, black_box(0.1)).unwrap().total_entropy())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, case_expansion, gaussian_cdf, fitting, entropy);
criterion_main!(benches);
