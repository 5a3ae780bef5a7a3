use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use displacer_bench::random_space;
use displacer_core::SearchMode;

fn knn(c: &mut Criterion) {
    let mut group = c.benchmark_group("knn");
    for n in [1_000, 10_000] {
        let space = random_space(n, 64, 7);
        space.build_index();
        let query = space.get("w0").unwrap();
        for mode in [SearchMode::Exact, SearchMode::Approximate] {
            group.bench_with_input(BenchmarkId::new(format!("{mode:?}"), n), &query, |b, q| {
                b.iter(|| space.knn(q, 10, mode).unwrap())
            });
        }
    }
    group.finish();
}

fn index_build(c: &mut Criterion) {
    c.bench_function("hnsw_build_5000x64", |b| {
        b.iter_with_setup(|| random_space(5_000, 64, 3), |space| space.build_index())
    });
}

criterion_group!(benches, knn, index_build);
criterion_main!(benches);
