//! Sparse logistic regression over sharing users and article words.

mod features;
mod solver;

pub use features::{FeatureMode, FeatureSpace, SparseVector};
pub use solver::{fit, sigmoid, Fit, LrHyper, Problem};

use std::path::Path;

use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Dataset, Label, SiteAliases};
use crate::scoring::Prediction;
use crate::sharegraph::{NewsItem, ShareGraph};

/// Per-class example weights `N / (2 · N_c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub hoax: f64,
    pub nonhoax: f64,
}

impl ClassWeights {
    pub fn of(&self, label: Label) -> f64 {
        match label {
            Label::Hoax => self.hoax,
            Label::Nonhoax => self.nonhoax,
        }
    }
}

pub fn class_weights(labels: &[Label]) -> Result<ClassWeights> {
    let hoax = labels.iter().filter(|l| l.is_hoax()).count();
    let nonhoax = labels.len() - hoax;
    if hoax == 0 {
        return Err(Error::SingleClass("no hoax examples"));
    }
    if nonhoax == 0 {
        return Err(Error::SingleClass("no nonhoax examples"));
    }
    let n = labels.len() as f64;
    Ok(ClassWeights {
        hoax: n / (2.0 * hoax as f64),
        nonhoax: n / (2.0 * nonhoax as f64),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    pub feature_space: FeatureSpace,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub hyper: LrHyper,
    pub converged: bool,
    pub iterations: usize,
    #[serde(skip)]
    pub loss_trace: Vec<f64>,
}

/// Trains a class-weighted model on every item of `train`.
///
/// Examples are ordered by item id before fitting so the result does not
/// depend on the order items were inserted into the graph.
pub fn train_lr(
    train: &Dataset,
    mode: FeatureMode,
    hyper: &LrHyper,
    aliases: &SiteAliases,
) -> Result<LrModel> {
    let weights = class_weights(&train.labels)?;
    let fs = FeatureSpace::build(train, mode, aliases)?;
    let mut vectors = fs.featurize_graph(&train.graph);

    let mut order: Vec<usize> = (0..train.len()).collect();
    order.sort_by(|&a, &b| {
        train.graph.items()[a]
            .item_id
            .cmp(&train.graph.items()[b].item_id)
    });
    let examples: Vec<SparseVector> = order
        .iter()
        .map(|&k| std::mem::take(&mut vectors[k]))
        .collect();
    let targets: Vec<bool> = order.iter().map(|&k| train.labels[k].is_hoax()).collect();
    let sample_weights: Vec<f64> = order.iter().map(|&k| weights.of(train.labels[k])).collect();

    let problem = Problem {
        examples: &examples,
        targets: &targets,
        weights: &sample_weights,
        dimension: fs.dimension(),
        l2_strength: hyper.l2_strength,
    };
    let fit = fit(&problem, hyper);
    if !fit.converged {
        log::warn!(
            "{} did not converge in {} iterations (|grad|∞ = {:.3e})",
            mode.name(),
            fit.iterations,
            fit.grad_norm_inf
        );
    }
    Ok(LrModel {
        feature_space: fs,
        weights: fit.weights,
        bias: fit.bias,
        hyper: hyper.clone(),
        converged: fit.converged,
        iterations: fit.iterations,
        loss_trace: fit.loss_trace,
    })
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    mode: FeatureMode,
    dimension: usize,
    hyper: LrHyper,
    converged: bool,
    iterations: usize,
    bias: f64,
    /// Little-endian f64 array, base64 encoded.
    weights: String,
    users: Vec<(String, u32)>,
    words: Vec<(String, u32)>,
    aliases: SiteAliases,
}

impl LrModel {
    pub fn margin(&self, x: &SparseVector) -> f64 {
        x.dot(&self.weights) + self.bias
    }

    pub fn predict_vector(&self, x: &SparseVector) -> Prediction {
        Prediction::from_probability(sigmoid(self.margin(x)))
    }

    pub fn predict<'a>(
        &self,
        item: &NewsItem,
        sharers: impl IntoIterator<Item = &'a str>,
    ) -> Prediction {
        self.predict_vector(&self.feature_space.featurize(item, sharers))
    }

    /// Predictions for every item of a graph, in item-index order.
    pub fn predict_graph(&self, graph: &ShareGraph) -> Vec<Prediction> {
        self.feature_space
            .featurize_graph(graph)
            .iter()
            .map(|x| self.predict_vector(x))
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes: Vec<u8> = self.weights.iter().flat_map(|w| w.to_le_bytes()).collect();
        let file = ModelFile {
            mode: self.feature_space.mode,
            dimension: self.feature_space.dimension(),
            hyper: self.hyper.clone(),
            converged: self.converged,
            iterations: self.iterations,
            bias: self.bias,
            weights: base64::engine::general_purpose::STANDARD.encode(bytes),
            users: self.feature_space.user_index.iter().map(|(k, &v)| (k.clone(), v)).collect(),
            words: self.feature_space.word_index.iter().map(|(k, &v)| (k.clone(), v)).collect(),
            aliases: self.feature_space.aliases.clone(),
        };
        let text = serde_json::to_string_pretty(&file)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ModelFile = serde_json::from_str(&text)?;
        let bytes = base64::engine::general_purpose::STANDARD
            .decode(&file.weights)
            .map_err(|e| Error::parse(path, 0, format!("weights: {e}")))?;
        if bytes.len() != 8 * file.dimension {
            return Err(Error::Dimension {
                expected: file.dimension,
                got: bytes.len() / 8,
            });
        }
        let weights = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(LrModel {
            feature_space: FeatureSpace {
                mode: file.mode,
                user_index: file.users.into_iter().collect(),
                word_index: file.words.into_iter().collect(),
                aliases: file.aliases,
            },
            weights,
            bias: file.bias,
            hyper: file.hyper,
            converged: file.converged,
            iterations: file.iterations,
            loss_trace: Vec::new(),
        })
    }
}
