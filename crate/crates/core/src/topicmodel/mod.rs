//! Topic decomposition of the share graph (URLs as documents, sharing users
//! as words) and a small neural classifier over the resulting topic mixes.

mod corpus;
mod lda;
mod nn;

pub use corpus::{build_corpus, Corpus, Document};
pub use lda::{fit_lda, GibbsSampler, InferConfig, LdaConfig, TopicModel, TopicVector};
pub use nn::{train_nn, NnGrad, NnHyper, NnModel, NnTraining};

use rayon::prelude::*;

use crate::sharegraph::ShareGraph;

/// Per-document inference seed: stable under reordering of items.
pub fn document_seed(model_seed: u64, item_id: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in item_id.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ model_seed
}

impl TopicModel {
    /// Topic vectors for every item of a graph, in item-index order.
    pub fn infer_graph(&self, graph: &ShareGraph, cfg: &InferConfig) -> Vec<TopicVector> {
        let bags = corpus::bags_of(&self.vocabulary, graph);
        bags.par_iter()
            .zip(graph.items().par_iter())
            .map(|(bag, item)| self.infer_topics(bag, cfg, document_seed(self.seed, &item.item_id)))
            .collect()
    }
}
