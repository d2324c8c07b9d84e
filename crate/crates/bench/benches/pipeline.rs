use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use uva_bench::corpus;
use uva_core::datagen::{generate_bundle, sample_negatives};
use uva_core::lexsim::normalize;
use uva_core::rba::build_partition;
use uva_core::{AtomId, GenConfig, RuleMode, SimIndex};

fn normalization(c: &mut Criterion) {
    let corpus = corpus(1_500);
    let terms: Vec<&str> = corpus.atoms().iter().map(|a| a.term.as_str()).collect();
    let mut g = c.benchmark_group("normalize");
    g.throughput(Throughput::Elements(terms.len() as u64));
    g.bench_function("5k_terms", |b| {
        b.iter(|| {
            for t in &terms {
                black_box(normalize(t));
            }
        })
    });
    g.finish();
}

fn index(c: &mut Criterion) {
    let mut g = c.benchmark_group("index");
    g.sample_size(10);
    for n_cuis in [1_500, 15_000] {
        let corpus = corpus(n_cuis);
        g.throughput(Throughput::Elements(corpus.len() as u64));
        g.bench_function(format!("build_{}", corpus.len()), |b| {
            b.iter(|| black_box(SimIndex::build(&corpus)))
        });
        let idx = SimIndex::build(&corpus);
        g.bench_function(format!("top10_candidates_{}", corpus.len()), |b| {
            b.iter(|| {
                for a in (0..corpus.len() as u32).step_by(10) {
                    black_box(idx.candidates(AtomId(a), Some(10)).unwrap());
                }
            })
        });
    }
    g.finish();
}

fn datagen(c: &mut Criterion) {
    let corpus = corpus(15_000);
    let idx = SimIndex::build(&corpus);
    let cfg = GenConfig::default();
    let mut g = c.benchmark_group("datagen");
    g.sample_size(10);
    g.throughput(Throughput::Elements(corpus.len() as u64));
    g.bench_function("negatives_50k", |b| {
        b.iter(|| black_box(sample_negatives(&corpus, &idx, &cfg).unwrap()))
    });
    g.bench_function("bundle_50k", |b| {
        b.iter_batched(
            || cfg.clone(),
            |cfg| black_box(generate_bundle(&corpus, &idx, &cfg).unwrap()),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

fn rba(c: &mut Criterion) {
    let corpus = corpus(15_000);
    let mut g = c.benchmark_group("rba");
    g.sample_size(10);
    g.bench_function("closure_partition_50k", |b| {
        b.iter(|| black_box(build_partition(&corpus, RuleMode::SsLsScTrans)))
    });
    g.finish();
}

criterion_group!(benches, normalization, index, datagen, rba);
criterion_main!(benches);
