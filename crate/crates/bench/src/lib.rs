//! Fixtures shared by the benchmarks.

use std::collections::BTreeMap;

use newsrep::harmonic::LabelSeed;
use newsrep::lrmodel::SparseVector;
use newsrep::sharegraph::ShareGraph;
use newsrep::synth::{generate, SynthConfig};
use newsrep::topicmodel::{Corpus, Document};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A synthetic share graph with every item of the full ground truth seeded fake
/// and an equal number of other items seeded reliable.
pub fn seeded_graph(cfg: &SynthConfig) -> (ShareGraph, LabelSeed) {
    let corpus = generate(cfg).expect("valid synth config");
    let mut seeds = LabelSeed::default();
    let mut others = Vec::new();
    for item in corpus.graph.items() {
        if corpus.gt_full.contains(&item.site) {
            seeds.fake.insert(item.item_id.clone());
        } else {
            others.push(item.item_id.clone());
        }
    }
    let n = seeds.fake.len();
    seeds.reliable.extend(others.into_iter().step_by(3).take(n));
    (corpus.graph, seeds)
}

/// `n` random sparse rows over `dim` columns with `nnz` entries each.
pub fn sparse_rows(n: usize, dim: u32, nnz: usize, seed: u64) -> (Vec<SparseVector>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let hoax = rng.gen_bool(0.2);
        let cols = (0..nnz)
            .map(|_| {
                let c = rng.gen_range(0..dim);
                if hoax { c / 2 } else { c }
            })
            .collect();
        rows.push(SparseVector::from_columns(cols));
        targets.push(hoax);
    }
    (rows, targets)
}

/// A corpus of `docs` documents drawn from a Zipf-like vocabulary of `vocab` users.
pub fn random_corpus(docs: usize, vocab: usize, mean_len: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (1..=vocab).map(|r| 1.0 / r as f64).collect();
    let word = WeightedIndex::new(&weights).unwrap();
    let documents = (0..docs)
        .map(|d| Document {
            item_id: format!("i{d}"),
            tokens: (0..rng.gen_range(1..=2 * mean_len))
                .map(|_| word.sample(&mut rng) as u32)
                .collect(),
        })
        .collect();
    let vocabulary: BTreeMap<String, u32> = (0..vocab as u32).map(|v| (format!("u{v:06}"), v)).collect();
    Corpus {
        documents,
        vocabulary,
        min_count: 1,
        dropped: Vec::new(),
    }
}
