//! One-hidden-layer rectifier network with a sigmoid output neuron,
//! trained by class-weighted cross-entropy with Adam on shuffled mini-batches.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Label;
use crate::lrmodel::{class_weights, sigmoid, ClassWeights};
use crate::scoring::Prediction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnHyper {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// `None` derives weights inversely proportional to class sizes.
    pub class_weights: Option<ClassWeights>,
}

impl Default for NnHyper {
    fn default() -> Self {
        NnHyper {
            hidden: 100,
            epochs: 50,
            learning_rate: 1e-3,
            batch_size: 64,
            seed: 0,
            class_weights: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnModel {
    pub inputs: usize,
    pub hidden: usize,
    /// Row-major `hidden × inputs`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

/// Gradient with the same layout as [`NnModel::params`].
pub type NnGrad = Vec<f64>;

impl NnModel {
    /// He-uniform hidden weights, Glorot-uniform output weights, zero biases.
    pub fn init(inputs: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a1 = (6.0 / inputs as f64).sqrt();
        let a2 = (6.0 / (hidden + 1) as f64).sqrt();
        NnModel {
            inputs,
            hidden,
            w1: (0..hidden * inputs).map(|_| rng.gen_range(-a1..a1)).collect(),
            b1: vec![0.0; hidden],
            w2: (0..hidden).map(|_| rng.gen_range(-a2..a2)).collect(),
            b2: 0.0,
        }
    }

    pub fn num_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }

    /// Flattened `[w1, b1, w2, b2]`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.num_params());
        p.extend(&self.w1);
        p.extend(&self.b1);
        p.extend(&self.w2);
        p.push(self.b2);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let (a, rest) = p.split_at(self.w1.len());
        let (b, rest) = rest.split_at(self.b1.len());
        let (c, rest) = rest.split_at(self.w2.len());
        self.w1.copy_from_slice(a);
        self.b1.copy_from_slice(b);
        self.w2.copy_from_slice(c);
        self.b2 = rest[0];
    }

    fn hidden_activations(&self, x: &[f64], h: &mut [f64]) {
        for (j, hj) in h.iter_mut().enumerate() {
            let row = &self.w1[j * self.inputs..(j + 1) * self.inputs];
            let z: f64 = row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + self.b1[j];
            *hj = z.max(0.0);
        }
    }

    /// Pre-sigmoid output.
    pub fn logit(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.inputs {
            return Err(Error::Dimension {
                expected: self.inputs,
                got: x.len(),
            });
        }
        let mut h = vec![0.0; self.hidden];
        self.hidden_activations(x, &mut h);
        Ok(h.iter().zip(&self.w2).map(|(a, b)| a * b).sum::<f64>() + self.b2)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        Ok(Prediction::from_probability(sigmoid(self.logit(x)?)))
    }

    /// Mean weighted cross-entropy over the given examples and its gradient.
    pub fn loss_grad(&self, xs: &[&[f64]], ys: &[bool], ws: &[f64]) -> (f64, NnGrad) {
        let (n_in, n_h) = (self.inputs, self.hidden);
        let mut grad = vec![0.0; self.num_params()];
        let (g_w1, rest) = grad.split_at_mut(n_h * n_in);
        let (g_b1, rest) = rest.split_at_mut(n_h);
        let (g_w2, g_b2) = rest.split_at_mut(n_h);
        let mut h = vec![0.0; n_h];
        let mut loss = 0.0;
        let scale = 1.0 / xs.len().max(1) as f64;
        for ((x, &y), &s) in xs.iter().zip(ys).zip(ws) {
            self.hidden_activations(x, &mut h);
            let z: f64 = h.iter().zip(&self.w2).map(|(a, b)| a * b).sum::<f64>() + self.b2;
            // log(1 + e^{-z}) for y = 1, log(1 + e^{z}) for y = 0
            let signed = if y { -z } else { z };
            let l = if signed > 0.0 {
                signed + (-signed).exp().ln_1p()
            } else {
                signed.exp().ln_1p()
            };
            loss += s * l * scale;
            let dz = s * scale * (sigmoid(z) - if y { 1.0 } else { 0.0 });
            g_b2[0] += dz;
            for j in 0..n_h {
                g_w2[j] += dz * h[j];
                if h[j] > 0.0 {
                    let dh = dz * self.w2[j];
                    g_b1[j] += dh;
                    for (g, xi) in g_w1[j * n_in..(j + 1) * n_in].iter_mut().zip(x.iter()) {
                        *g += dh * xi;
                    }
                }
            }
        }
        (loss, grad)
    }

    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        let manifest = serde_json::json!({
            "inputs": self.inputs,
            "hidden": self.hidden,
            "layout": ["w1", "b1", "w2", "b2"],
            "shapes": [[self.hidden, self.inputs], [self.hidden], [self.hidden], [1]],
            "activation": {"hidden": "relu", "output": "sigmoid"},
        });
        let mp = dir.join(format!("{stem}.json"));
        std::fs::write(&mp, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&mp, e))?;
        let pp = dir.join(format!("{stem}.params.json"));
        std::fs::write(&pp, serde_json::to_string(&self.params())?).map_err(|e| Error::io(&pp, e))
    }

    pub fn load(dir: &Path, stem: &str) -> Result<Self> {
        let mp = dir.join(format!("{stem}.json"));
        let text = std::fs::read_to_string(&mp).map_err(|e| Error::io(&mp, e))?;
        let manifest: serde_json::Value = serde_json::from_str(&text)?;
        let dim = |key: &str| {
            manifest[key]
                .as_u64()
                .map(|v| v as usize)
                .ok_or_else(|| Error::parse(&mp, 0, format!("missing `{key}`")))
        };
        let (inputs, hidden) = (dim("inputs")?, dim("hidden")?);
        let pp = dir.join(format!("{stem}.params.json"));
        let text = std::fs::read_to_string(&pp).map_err(|e| Error::io(&pp, e))?;
        let params: Vec<f64> = serde_json::from_str(&text)?;
        let mut model = NnModel {
            inputs,
            hidden,
            w1: vec![0.0; inputs * hidden],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
        };
        if params.len() != model.num_params() {
            return Err(Error::Dimension {
                expected: model.num_params(),
                got: params.len(),
            });
        }
        model.set_params(&params);
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnTraining {
    pub model: NnModel,
    /// Mean weighted loss over the training set after each epoch.
    pub loss_trace: Vec<f64>,
}

pub fn train_nn(vectors: &[Vec<f64>], labels: &[Label], hyper: &NnHyper) -> Result<NnTraining> {
    let weights = match hyper.class_weights {
        Some(w) => w,
        None => class_weights(labels)?,
    };
    if !labels.iter().any(|l| l.is_hoax()) || labels.iter().all(|l| l.is_hoax()) {
        return Err(Error::SingleClass("network training needs both classes"));
    }
    if vectors.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            got: vectors.len(),
        });
    }
    let inputs = vectors[0].len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != inputs) {
        return Err(Error::Dimension {
            expected: inputs,
            got: bad.len(),
        });
    }
    let ys: Vec<bool> = labels.iter().map(|l| l.is_hoax()).collect();
    let ws: Vec<f64> = labels.iter().map(|&l| weights.of(l)).collect();

    let mut model = NnModel::init(inputs, hyper.hidden, hyper.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    let mut theta = model.params();
    let (mut m, mut v) = (vec![0.0; theta.len()], vec![0.0; theta.len()]);
    let (b1, b2, eps) = (0.9, 0.999, 1e-8);
    let mut step = 0i32;
    let mut trace = Vec::with_capacity(hyper.epochs);
    let batch = hyper.batch_size.max(1);

    for epoch in 0..hyper.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            let xs: Vec<&[f64]> = chunk.iter().map(|&i| vectors[i].as_slice()).collect();
            let by: Vec<bool> = chunk.iter().map(|&i| ys[i]).collect();
            let bw: Vec<f64> = chunk.iter().map(|&i| ws[i]).collect();
            let (_, g) = model.loss_grad(&xs, &by, &bw);
            step += 1;
            let (c1, c2) = (1.0 - f64::powi(b1, step), 1.0 - f64::powi(b2, step));
            for p in 0..theta.len() {
                m[p] = b1 * m[p] + (1.0 - b1) * g[p];
                v[p] = b2 * v[p] + (1.0 - b2) * g[p] * g[p];
                theta[p] -= hyper.learning_rate * (m[p] / c1) / ((v[p] / c2).sqrt() + eps);
            }
            model.set_params(&theta);
        }
        let all: Vec<&[f64]> = vectors.iter().map(Vec::as_slice).collect();
        let (loss, _) = model.loss_grad(&all, &ys, &ws);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, loss });
        }
        trace.push(loss);
    }
    Ok(NnTraining {
        model,
        loss_trace: trace,
    })
}
