use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Label;

/// Confusion counts with hoax as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
}

fn pct(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

impl Confusion {
    pub fn add(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Hoax, Label::Hoax) => self.tp += 1,
            (Label::Hoax, Label::Nonhoax) => self.fn_ += 1,
            (Label::Nonhoax, Label::Hoax) => self.fp += 1,
            (Label::Nonhoax, Label::Nonhoax) => self.tn += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fn_ + self.fp + self.tn
    }

    pub fn hoax_recall(&self) -> Option<f64> {
        pct(self.tp, self.tp + self.fn_)
    }

    pub fn nonhoax_recall(&self) -> Option<f64> {
        pct(self.tn, self.tn + self.fp)
    }

    pub fn hoax_precision(&self) -> Option<f64> {
        pct(self.tp, self.tp + self.fp)
    }
}

/// Metrics over the items shared by at least `min_shares` distinct users.
/// Undefined ratios (zero denominators) are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceMetrics {
    pub min_shares: usize,
    pub confusion: Confusion,
    pub hoax_recall: Option<f64>,
    pub nonhoax_recall: Option<f64>,
    pub hoax_precision: Option<f64>,
}

impl SliceMetrics {
    pub fn from_confusion(min_shares: usize, confusion: Confusion) -> Self {
        SliceMetrics {
            min_shares,
            hoax_recall: confusion.hoax_recall(),
            nonhoax_recall: confusion.nonhoax_recall(),
            hoax_precision: confusion.hoax_precision(),
            confusion,
        }
    }
}

pub fn score_metrics(
    labels: &[Label],
    predictions: &[Label],
    share_counts: &[usize],
    min_shares: usize,
) -> Result<SliceMetrics> {
    if labels.len() != predictions.len() || labels.len() != share_counts.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            got: predictions.len().min(share_counts.len()),
        });
    }
    let mut c = Confusion::default();
    for ((&truth, &pred), &shares) in labels.iter().zip(predictions).zip(share_counts) {
        if shares >= min_shares {
            c.add(truth, pred);
        }
    }
    Ok(SliceMetrics::from_confusion(min_shares, c))
}
