use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use displacer_bench::{chain_kb, kb_text, world};
use displacer_core::kb::load_kb_str;

fn materialize(c: &mut Criterion) {
    let mut group = c.benchmark_group("materialize_chain");
    group.sample_size(20);
    for n in [50, 150] {
        let text = chain_kb(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &text, |b, text| {
            b.iter(|| load_kb_str(text).unwrap().closure_size().unwrap())
        });
    }
    group.finish();
}

fn query(c: &mut Criterion) {
    let w = world("demo", 0);
    let kb = load_kb_str(kb_text(&w)).unwrap();
    kb.freeze().unwrap();
    c.bench_function("query_bound", |b| {
        b.iter(|| kb.query_str("(capitalCity ?X Country03)").unwrap())
    });
    c.bench_function("query_join", |b| {
        b.iter(|| kb.query_str("(and (capitalCity ?C ?X) (isa ?X Country))").unwrap())
    });
}

criterion_group!(benches, materialize, query);
criterion_main!(benches);
