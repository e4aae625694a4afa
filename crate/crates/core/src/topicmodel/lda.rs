//! Collapsed Gibbs sampling for LDA.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub topics: usize,
    /// Document-topic prior; `None` means 50 / K.
    pub alpha: Option<f64>,
    pub eta: f64,
    pub gibbs_iters: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            topics: 100,
            alpha: None,
            eta: 0.01,
            gibbs_iters: 200,
            seed: 0,
        }
    }
}

impl LdaConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.topics as f64)
    }
}

/// Sampler state: one topic per token plus the three count tables.
#[derive(Debug, Clone)]
pub struct GibbsSampler<'c> {
    corpus: &'c Corpus,
    k: usize,
    v: usize,
    alpha: f64,
    eta: f64,
    rng: ChaCha8Rng,
    assignments: Vec<Vec<u16>>,
    // [doc * k + topic]
    doc_topic: Vec<u32>,
    // [word * k + topic]
    word_topic: Vec<u32>,
    topic_total: Vec<u32>,
    probs: Vec<f64>,
}

impl<'c> GibbsSampler<'c> {
    /// Validates the configuration and assigns every token a uniformly random topic.
    pub fn new(corpus: &'c Corpus, cfg: &LdaConfig) -> Result<Self> {
        let k = cfg.topics;
        let v = corpus.vocab_size();
        if k < 2 {
            return Err(Error::Config(format!("need at least 2 topics, got {k}")));
        }
        if k > u16::MAX as usize {
            return Err(Error::Config(format!("too many topics: {k}")));
        }
        if k > v {
            return Err(Error::Config(format!(
                "{k} topics exceed vocabulary size {v}"
            )));
        }
        if corpus.documents.is_empty() {
            return Err(Error::EmptyDataset("corpus has no documents".into()));
        }
        let (alpha, eta) = (cfg.alpha(), cfg.eta);
        if !(alpha > 0.0 && eta > 0.0) {
            return Err(Error::Config("alpha and eta must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut doc_topic = vec![0u32; corpus.documents.len() * k];
        let mut word_topic = vec![0u32; v * k];
        let mut topic_total = vec![0u32; k];
        let assignments = corpus
            .documents
            .iter()
            .enumerate()
            .map(|(d, doc)| {
                doc.tokens
                    .iter()
                    .map(|&w| {
                        let z = rng.gen_range(0..k);
                        doc_topic[d * k + z] += 1;
                        word_topic[w as usize * k + z] += 1;
                        topic_total[z] += 1;
                        z as u16
                    })
                    .collect()
            })
            .collect();
        Ok(GibbsSampler {
            corpus,
            k,
            v,
            alpha,
            eta,
            rng,
            assignments,
            doc_topic,
            word_topic,
            topic_total,
            probs: vec![0.0; k],
        })
    }

    /// Resamples every token once, in document order.
    pub fn sweep(&mut self) {
        let k = self.k;
        let v_eta = self.v as f64 * self.eta;
        for (d, doc) in self.corpus.documents.iter().enumerate() {
            let dt = &mut self.doc_topic[d * k..(d + 1) * k];
            for (pos, &w) in doc.tokens.iter().enumerate() {
                let w = w as usize;
                let old = self.assignments[d][pos] as usize;
                let wt = &mut self.word_topic[w * k..(w + 1) * k];
                dt[old] -= 1;
                wt[old] -= 1;
                self.topic_total[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    total += (f64::from(dt[t]) + self.alpha) * (f64::from(wt[t]) + self.eta)
                        / (f64::from(self.topic_total[t]) + v_eta);
                    self.probs[t] = total;
                }
                let u = self.rng.gen::<f64>() * total;
                let new = self.probs.partition_point(|&c| c <= u).min(k - 1);

                dt[new] += 1;
                wt[new] += 1;
                self.topic_total[new] += 1;
                self.assignments[d][pos] = new as u16;
            }
        }
    }

    /// Sum of the topic totals, which always equals the corpus token count.
    pub fn assigned_tokens(&self) -> usize {
        self.topic_total.iter().map(|&c| c as usize).sum()
    }

    /// Rebuilds the three count tables from the token assignments and
    /// compares them with the incrementally maintained ones.
    pub fn counts_consistent(&self) -> bool {
        let k = self.k;
        let mut dt = vec![0u32; self.doc_topic.len()];
        let mut wt = vec![0u32; self.word_topic.len()];
        let mut tt = vec![0u32; k];
        for (d, (doc, z)) in self.corpus.documents.iter().zip(&self.assignments).enumerate() {
            if doc.tokens.len() != z.len() {
                return false;
            }
            for (&w, &t) in doc.tokens.iter().zip(z) {
                let t = t as usize;
                dt[d * k + t] += 1;
                wt[w as usize * k + t] += 1;
                tt[t] += 1;
            }
        }
        dt == self.doc_topic
            && wt == self.word_topic
            && tt == self.topic_total
            && self.assigned_tokens() == self.corpus.num_tokens()
    }

    /// Smoothed, row-normalized topic-word distribution `(n_kw + η) / (n_k + Vη)`.
    pub fn topic_word(&self) -> Vec<Vec<f64>> {
        (0..self.k)
            .map(|t| {
                let denom = f64::from(self.topic_total[t]) + self.v as f64 * self.eta;
                (0..self.v)
                    .map(|w| (f64::from(self.word_topic[w * self.k + t]) + self.eta) / denom)
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub topics: usize,
    pub alpha: f64,
    pub eta: f64,
    pub gibbs_iters: usize,
    pub seed: u64,
    /// user_id → column of `topic_word`.
    pub vocabulary: BTreeMap<String, u32>,
    /// K rows, each a distribution over the vocabulary.
    pub topic_word: Vec<Vec<f64>>,
}

pub fn fit_lda(corpus: &Corpus, cfg: &LdaConfig) -> Result<TopicModel> {
    let mut sampler = GibbsSampler::new(corpus, cfg)?;
    for _ in 0..cfg.gibbs_iters {
        sampler.sweep();
    }
    Ok(TopicModel {
        topics: cfg.topics,
        alpha: cfg.alpha(),
        eta: cfg.eta,
        gibbs_iters: cfg.gibbs_iters,
        seed: cfg.seed,
        vocabulary: corpus.vocabulary.clone(),
        topic_word: sampler.topic_word(),
    })
}

/// Length-K topic proportions summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicVector(pub Vec<f64>);

impl TopicVector {
    pub fn uniform(k: usize) -> Self {
        TopicVector(vec![1.0 / k as f64; k])
    }

    pub fn argmax(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best })
            .0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferConfig {
    pub iters: usize,
    pub burn_in: usize,
}

impl Default for InferConfig {
    fn default() -> Self {
        InferConfig {
            iters: 50,
            burn_in: 10,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TopicHeader {
    topics: usize,
    alpha: f64,
    eta: f64,
    gibbs_iters: usize,
    seed: u64,
    vocabulary: Vec<String>,
}

impl TopicModel {
    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    /// Gibbs inference of a document's topic mix with `topic_word` held
    /// fixed. Proportions `(n_dk + α) / (N + Kα)` are averaged over the
    /// post-burn-in sweeps. An empty bag yields the uniform vector.
    pub fn infer_topics(&self, bag: &[u32], cfg: &InferConfig, seed: u64) -> TopicVector {
        let k = self.topics;
        if bag.is_empty() {
            return TopicVector::uniform(k);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0u32; k];
        let mut z: Vec<usize> = bag
            .iter()
            .map(|_| {
                let t = rng.gen_range(0..k);
                counts[t] += 1;
                t
            })
            .collect();
        let mut acc = vec![0.0; k];
        let mut cum = vec![0.0; k];
        let denom = bag.len() as f64 + k as f64 * self.alpha;
        let kept = cfg.iters.saturating_sub(cfg.burn_in).max(1);
        let total_iters = cfg.burn_in + kept;
        for it in 0..total_iters {
            for (pos, &w) in bag.iter().enumerate() {
                counts[z[pos]] -= 1;
                let mut total = 0.0;
                for t in 0..k {
                    total += (f64::from(counts[t]) + self.alpha) * self.topic_word[t][w as usize];
                    cum[t] = total;
                }
                let u = rng.gen::<f64>() * total;
                let new = cum.partition_point(|&c| c <= u).min(k - 1);
                counts[new] += 1;
                z[pos] = new;
            }
            if it >= cfg.burn_in {
                for t in 0..k {
                    acc[t] += (f64::from(counts[t]) + self.alpha) / denom;
                }
            }
        }
        let sum: f64 = acc.iter().sum();
        TopicVector(acc.into_iter().map(|a| a / sum).collect())
    }

    /// Writes `<stem>.json` (header and vocabulary) and `<stem>.tsv` (K rows of V values).
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        let mut vocab = vec![String::new(); self.vocab_size()];
        for (u, &ix) in &self.vocabulary {
            vocab[ix as usize] = u.clone();
        }
        let header = TopicHeader {
            topics: self.topics,
            alpha: self.alpha,
            eta: self.eta,
            gibbs_iters: self.gibbs_iters,
            seed: self.seed,
            vocabulary: vocab,
        };
        let hp = dir.join(format!("{stem}.json"));
        std::fs::write(&hp, serde_json::to_string_pretty(&header)?).map_err(|e| Error::io(&hp, e))?;
        let mp = dir.join(format!("{stem}.tsv"));
        let body: String = self
            .topic_word
            .iter()
            .map(|row| {
                let mut line = row.iter().map(|p| format!("{p:e}")).collect::<Vec<_>>().join("\t");
                line.push('\n');
                line
            })
            .collect();
        std::fs::write(&mp, body).map_err(|e| Error::io(&mp, e))
    }

    pub fn load(dir: &Path, stem: &str) -> Result<Self> {
        let hp = dir.join(format!("{stem}.json"));
        let text = std::fs::read_to_string(&hp).map_err(|e| Error::io(&hp, e))?;
        let header: TopicHeader = serde_json::from_str(&text)?;
        let mp = dir.join(format!("{stem}.tsv"));
        let body = std::fs::read_to_string(&mp).map_err(|e| Error::io(&mp, e))?;
        let mut topic_word = Vec::with_capacity(header.topics);
        for (n, line) in body.lines().enumerate() {
            let row = line
                .split('\t')
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(&mp, n + 1, e.to_string()))?;
            if row.len() != header.vocabulary.len() {
                return Err(Error::Dimension {
                    expected: header.vocabulary.len(),
                    got: row.len(),
                });
            }
            topic_word.push(row);
        }
        if topic_word.len() != header.topics {
            return Err(Error::Dimension {
                expected: header.topics,
                got: topic_word.len(),
            });
        }
        Ok(TopicModel {
            topics: header.topics,
            alpha: header.alpha,
            eta: header.eta,
            gibbs_iters: header.gibbs_iters,
            seed: header.seed,
            vocabulary: header
                .vocabulary
                .into_iter()
                .enumerate()
                .map(|(k, u)| (u, k as u32))
                .collect(),
            topic_word,
        })
    }
}
