use serde::{Deserialize, Serialize};

use crate::ingest::Label;

/// A model's output for one item: a score and the label it implies.
///
/// Classifier scores are hoax probabilities in (0, 1); harmonic scores are
/// reputations in [−1, 1] where negative means hoax.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub score: f64,
    pub label: Label,
}

impl Prediction {
    /// Hoax when the probability reaches one half.
    pub fn from_probability(p: f64) -> Self {
        Prediction {
            score: p,
            label: Label::from_hoax(p >= 0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredItem {
    pub item_id: String,
    pub site: String,
    pub share_count: usize,
    pub truth: Label,
    pub score: f64,
    pub predicted: Label,
}
