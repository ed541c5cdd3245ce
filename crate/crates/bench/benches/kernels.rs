use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use pauli_bench::{basis, family, power_law, probe_k, sector};
use pauli_core::charvals::{gs_index, ContourShape, DerivativeScheme, HolomorphicFamily};
use pauli_core::landau::ToeplitzSpectrum;

fn toeplitz(c: &mut Criterion) {
    let profile = power_law();
    let mut group = c.benchmark_group("toeplitz_spectrum");
    for l_max in [100usize, 1000] {
        let b = basis(0, l_max);
        group.bench_with_input(BenchmarkId::from_parameter(l_max), &b, |bench, b| {
            bench.iter(|| ToeplitzSpectrum::compute(&profile, b).unwrap())
        });
    }
    group.finish();
}

fn inertia(c: &mut Criterion) {
    let mut group = c.benchmark_group("inertia_count");
    for nodes in [256usize, 2048] {
        let m = sector(2, 3, nodes, 1.0);
        group.bench_with_input(BenchmarkId::from_parameter(nodes), &m, |bench, m| bench.iter(|| m.count_below(-1e-4)));
    }
    group.finish();
}

fn families(c: &mut Criterion) {
    let fam = family(0, 40, 0.3);
    c.bench_function("sector_family_eval", |b| b.iter(|| fam.eval(probe_k()).unwrap()));
    let shape = ContourShape::Circle { center: Complex64::new(0.0, 0.02), radius: 0.01 };
    c.bench_function("gs_index_circle", |b| {
        b.iter(|| gs_index(&fam, shape, DerivativeScheme::Analytic, 1024).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = toeplitz, inertia, families
}
criterion_main!(benches);
