//! Full-batch L-BFGS for class-weighted, L2-regularized logistic loss.
//!
//! Parameters are laid out as `[w_0, …, w_{d−1}, b]`; the bias is not
//! regularized. The loss is
//!
//! ```text
//! L(w, b) = Σ_n s_n · log(1 + exp(−y_n (w·x_n + b))) + λ/2 ‖w‖²,   y_n ∈ {−1, +1}
//! ```

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SparseVector;

const CHUNK: usize = 2048;
const HISTORY: usize = 10;
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrHyper {
    pub l2_strength: f64,
    pub max_iters: usize,
    /// Converged once every gradient component is below this.
    pub tolerance: f64,
    /// Recorded for provenance; the batch solver draws no random numbers.
    pub seed: u64,
}

impl Default for LrHyper {
    fn default() -> Self {
        LrHyper {
            l2_strength: 1.0,
            max_iters: 1000,
            tolerance: 1e-6,
            seed: 0,
        }
    }
}

type ChunkPartial = (f64, Vec<(u32, f64)>, f64);

/// Training examples with positive class `true` and per-example weights.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub examples: &'a [SparseVector],
    pub targets: &'a [bool],
    pub weights: &'a [f64],
    pub dimension: usize,
    pub l2_strength: f64,
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^z) without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl Problem<'_> {
    pub fn num_params(&self) -> usize {
        self.dimension + 1
    }

    /// Loss at `theta`; the gradient is written into `grad`.
    ///
    /// Chunks are evaluated in parallel and summed in chunk order, so the
    /// result does not depend on the thread pool.
    pub fn loss_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let d = self.dimension;
        let (w, b) = (&theta[..d], theta[d]);
        // (loss, sparse weight gradient, bias gradient) per chunk
        let partials: Vec<ChunkPartial> = self
            .examples
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(c, chunk)| {
                let base = c * CHUNK;
                let mut loss = 0.0;
                let mut dbias = 0.0;
                let mut dw = Vec::new();
                for (k, x) in chunk.iter().enumerate() {
                    let n = base + k;
                    let s = self.weights[n];
                    if s == 0.0 {
                        continue;
                    }
                    let z = x.dot(w) + b;
                    let (l, dz) = if self.targets[n] {
                        (softplus(-z), sigmoid(z) - 1.0)
                    } else {
                        (softplus(z), sigmoid(z))
                    };
                    loss += s * l;
                    dbias += s * dz;
                    dw.extend(x.columns().iter().map(|&col| (col, s * dz)));
                }
                (loss, dw, dbias)
            })
            .collect();

        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for (l, dw, db) in partials {
            loss += l;
            for (col, v) in dw {
                grad[col as usize] += v;
            }
            grad[d] += db;
        }
        let lambda = self.l2_strength;
        let mut reg = 0.0;
        for (g, &wj) in grad[..d].iter_mut().zip(w) {
            reg += wj * wj;
            *g += lambda * wj;
        }
        loss + 0.5 * lambda * reg
    }

    pub fn loss(&self, theta: &[f64]) -> f64 {
        let mut g = vec![0.0; self.num_params()];
        self.loss_grad(theta, &mut g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Loss after initialization and after each accepted step.
    pub loss_trace: Vec<f64>,
    pub grad_norm_inf: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Two-loop recursion: returns −H·g for the current inverse-Hessian estimate.
fn lbfgs_direction(g: &[f64], hist: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(hist.len());
    for (s, y, rho) in hist.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = hist.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|qi| *qi *= gamma);
    }
    for ((s, y, rho), a) in hist.iter().zip(alphas.into_iter().rev()) {
        let beta = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - beta) * si);
    }
    q.iter_mut().for_each(|qi| *qi = -*qi);
    q
}

/// Minimizes the problem's loss from the all-zero starting point.
pub fn fit(problem: &Problem<'_>, hyper: &LrHyper) -> Fit {
    let p = problem.num_params();
    let mut theta = vec![0.0; p];
    let mut grad = vec![0.0; p];
    let mut f = problem.loss_grad(&theta, &mut grad);
    let mut trace = vec![f];
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(HISTORY);
    let mut iterations = 0;
    let mut trial = vec![0.0; p];
    let mut trial_grad = vec![0.0; p];

    while iterations < hyper.max_iters && norm_inf(&grad) >= hyper.tolerance {
        let mut dir = lbfgs_direction(&grad, &hist);
        let mut slope = dot(&grad, &dir);
        if slope >= 0.0 {
            hist.clear();
            dir = grad.iter().map(|g| -g).collect();
            slope = dot(&grad, &dir);
        }
        let mut step = if hist.is_empty() {
            (1.0 / norm_inf(&grad)).min(1.0)
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..60 {
            trial
                .iter_mut()
                .zip(&theta)
                .zip(&dir)
                .for_each(|((t, x), d)| *t = x + step * d);
            let f_new = problem.loss_grad(&trial, &mut trial_grad);
            if f_new <= f + ARMIJO * step * slope {
                accepted = Some(f_new);
                break;
            }
            // Near the optimum the predicted decrease drops below rounding
            // noise in f; take any non-increasing step that shrinks the gradient.
            if f_new <= f && norm_inf(&trial_grad) < norm_inf(&grad) {
                accepted = Some(f_new);
                break;
            }
            step *= 0.5;
        }
        let Some(f_new) = accepted else {
            break;
        };

        let s: Vec<f64> = dir.iter().map(|d| step * d).collect();
        let y: Vec<f64> = trial_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() && sy > 0.0 {
            if hist.len() == HISTORY {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        std::mem::swap(&mut theta, &mut trial);
        std::mem::swap(&mut grad, &mut trial_grad);
        f = f_new;
        trace.push(f);
        iterations += 1;
    }

    let grad_norm_inf = norm_inf(&grad);
    let bias = theta.pop().expect("theta holds the bias");
    Fit {
        weights: theta,
        bias,
        converged: grad_norm_inf < hyper.tolerance,
        iterations,
        loss_trace: trace,
        grad_norm_inf,
    }
}
