use criterion::{criterion_group, criterion_main, Criterion};
use displacer_bench::{stores, world};
use displacer_core::harness::CAPITAL_TEMPLATE;
use displacer_core::{PipelineConfig, QueryTemplate};

fn displace(c: &mut Criterion) {
    let w = world("capitals", 0);
    let stores = stores(&w);
    stores.kb.freeze().unwrap();
    let (text, input, answer) = CAPITAL_TEMPLATE;
    let template = QueryTemplate::parse(text, input, answer).unwrap();
    let cfg = PipelineConfig::default();
    let d = stores.displacer();
    c.bench_function("displace_single", |b| {
        b.iter(|| d.displace_single("country_27", &template, &cfg).unwrap())
    });
    c.bench_function("rank_probabilities", |b| {
        b.iter(|| d.estimate_rank_probabilities(&template, None, &cfg).unwrap())
    });
}

criterion_group!(benches, displace);
criterion_main!(benches);
