use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use newsrep::harmonic::{propagate, HarmonicConfig};
use newsrep::lrmodel::{class_weights, fit, LrHyper, Problem};
use newsrep::ingest::Label;
use newsrep::synth::SynthConfig;
use newsrep::topicmodel::{GibbsSampler, LdaConfig};
use newsrep_bench::{random_corpus, seeded_graph, sparse_rows};

fn harmonic(c: &mut Criterion) {
    let (graph, seeds) = seeded_graph(&SynthConfig::default());
    let cfg = HarmonicConfig::default();
    c.bench_function("propagate/default_synth", |b| {
        b.iter(|| propagate(&graph, &seeds, &cfg).unwrap())
    });
}

fn lr(c: &mut Criterion) {
    let dim = 20_000;
    let (rows, targets) = sparse_rows(20_000, dim, 12, 1);
    let labels: Vec<Label> = targets.iter().map(|&t| Label::from_hoax(t)).collect();
    let cw = class_weights(&labels).unwrap();
    let weights: Vec<f64> = labels.iter().map(|&l| cw.of(l)).collect();
    let problem = Problem {
        examples: &rows,
        targets: &targets,
        weights: &weights,
        dimension: dim as usize,
        l2_strength: 1.0,
    };
    let hyper = LrHyper::default();
    let mut group = c.benchmark_group("lr");
    group.sample_size(10);
    group.bench_function("fit/20k_x_20k", |b| b.iter(|| fit(&problem, &hyper)));
    group.finish();
}

fn gibbs(c: &mut Criterion) {
    let corpus = random_corpus(5_000, 4_000, 20, 2);
    let cfg = LdaConfig {
        topics: 100,
        ..LdaConfig::default()
    };
    c.bench_function("lda/sweep_5k_docs_k100", |b| {
        b.iter_batched_ref(
            || GibbsSampler::new(&corpus, &cfg).unwrap(),
            |s| s.sweep(),
            BatchSize::LargeInput,
        )
    });
}

criterion_group!(benches, harmonic, lr, gibbs);
criterion_main!(benches);
