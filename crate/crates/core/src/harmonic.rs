//! Harmonic boolean-label propagation over the share graph.
//!
//! Every node carries a beta-distribution pair (α, β) and a reputation
//! `q = (α − β) / (α + β)` in [−1, 1]. Seed items are clamped to q = −1
//! (fake) or q = +1 (reliable); each iteration first recomputes every user
//! from the items they shared, then every unseeded item from its sharers:
//!
//! ```text
//! α_v = c + Σ { q_w | w ∈ ∂v, q_w > 0 }
//! β_v = c − Σ { q_w | w ∈ ∂v, q_w < 0 }
//! ```
//!
//! Each half-step reads only the other side's values from the previous
//! half-step, so the result is independent of node order and thread count.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Label;
use crate::sharegraph::{ItemIx, ShareGraph, UserIx};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HarmonicConfig {
    /// Regularization added to both α and β.
    pub c: f64,
    pub iterations: usize,
    /// Reliable seeds sampled per fake seed.
    pub pos_factor: usize,
    /// Seed for the reliable-item subsample.
    pub seed: u64,
}

impl Default for HarmonicConfig {
    fn default() -> Self {
        HarmonicConfig {
            c: 0.02,
            iterations: 4,
            pos_factor: 1,
            seed: 0,
        }
    }
}

impl HarmonicConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("c must be positive, got {}", self.c)));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be ≥ 1".into()));
        }
        if self.pos_factor == 0 {
            return Err(Error::Config("pos_factor must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Ground-truth items: `fake` is I_F, `reliable` is I_N.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSeed {
    pub fake: BTreeSet<String>,
    pub reliable: BTreeSet<String>,
}

impl LabelSeed {
    /// The same seed with the two classes exchanged.
    pub fn swapped(&self) -> Self {
        LabelSeed {
            fake: self.reliable.clone(),
            reliable: self.fake.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeBelief {
    pub alpha: f64,
    pub beta: f64,
}

impl NodeBelief {
    const FAKE: NodeBelief = NodeBelief {
        alpha: 0.0,
        beta: 1.0,
    };
    const RELIABLE: NodeBelief = NodeBelief {
        alpha: 1.0,
        beta: 0.0,
    };

    fn neutral(c: f64) -> Self {
        NodeBelief { alpha: c, beta: c }
    }

    #[inline]
    pub fn q(&self) -> f64 {
        (self.alpha - self.beta) / (self.alpha + self.beta)
    }

    /// Accumulates one side of the graph into a fresh belief.
    #[inline]
    fn from_neighbors(c: f64, qs: impl Iterator<Item = f64>) -> Self {
        let mut b = NodeBelief::neutral(c);
        for q in qs {
            if q > 0.0 {
                b.alpha += q;
            } else if q < 0.0 {
                b.beta -= q;
            }
        }
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Clamp {
    Free,
    Fake,
    Reliable,
}

/// Propagation state that can be advanced one half-step at a time.
#[derive(Debug, Clone)]
pub struct Propagation<'g> {
    graph: &'g ShareGraph,
    c: f64,
    clamp: Vec<Clamp>,
    items: Vec<NodeBelief>,
    item_q: Vec<f64>,
    users: Vec<NodeBelief>,
    user_q: Vec<f64>,
}

impl<'g> Propagation<'g> {
    /// Initializes q = −1 on I_F, +1 on I_N and 0 on every other node.
    pub fn new(graph: &'g ShareGraph, seeds: &LabelSeed, c: f64) -> Result<Self> {
        if let Some(both) = seeds.fake.intersection(&seeds.reliable).next() {
            return Err(Error::Config(format!(
                "item `{both}` is seeded both fake and reliable"
            )));
        }
        let mut clamp = vec![Clamp::Free; graph.num_items()];
        for id in &seeds.fake {
            clamp[graph.item_ix(id)?.index()] = Clamp::Fake;
        }
        for id in &seeds.reliable {
            clamp[graph.item_ix(id)?.index()] = Clamp::Reliable;
        }
        let items: Vec<NodeBelief> = clamp
            .iter()
            .map(|k| match k {
                Clamp::Free => NodeBelief::neutral(c),
                Clamp::Fake => NodeBelief::FAKE,
                Clamp::Reliable => NodeBelief::RELIABLE,
            })
            .collect();
        let item_q = items.iter().map(NodeBelief::q).collect();
        let users = vec![NodeBelief::neutral(c); graph.num_users()];
        let user_q = vec![0.0; graph.num_users()];
        Ok(Propagation {
            graph,
            c,
            clamp,
            items,
            item_q,
            users,
            user_q,
        })
    }

    /// Recomputes every user from the current item reputations.
    pub fn user_step(&mut self) {
        let (graph, c, item_q) = (self.graph, self.c, &self.item_q);
        self.users = (0..graph.num_users() as u32)
            .into_par_iter()
            .map(|u| {
                NodeBelief::from_neighbors(
                    c,
                    graph.shared_items(UserIx(u)).iter().map(|i| item_q[i.index()]),
                )
            })
            .collect();
        self.user_q = self.users.par_iter().map(NodeBelief::q).collect();
    }

    /// Recomputes every unseeded item from the current user reputations.
    pub fn item_step(&mut self) {
        let (graph, c, user_q) = (self.graph, self.c, &self.user_q);
        let clamp = &self.clamp;
        let prev = &self.items;
        self.items = (0..graph.num_items() as u32)
            .into_par_iter()
            .map(|i| match clamp[i as usize] {
                Clamp::Free => NodeBelief::from_neighbors(
                    c,
                    graph.sharers(ItemIx(i)).iter().map(|u| user_q[u.index()]),
                ),
                _ => prev[i as usize],
            })
            .collect();
        self.item_q = self.items.par_iter().map(NodeBelief::q).collect();
    }

    pub fn iterate(&mut self) {
        self.user_step();
        self.item_step();
    }

    pub fn item_q(&self) -> &[f64] {
        &self.item_q
    }

    pub fn user_q(&self) -> &[f64] {
        &self.user_q
    }

    pub fn into_beliefs(self) -> Beliefs {
        Beliefs {
            items: self.items,
            users: self.users,
        }
    }
}

/// Final (α, β) of every node, indexed by the graph's dense indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Beliefs {
    pub items: Vec<NodeBelief>,
    pub users: Vec<NodeBelief>,
}

impl Beliefs {
    pub fn item_q(&self, item: ItemIx) -> f64 {
        self.items[item.index()].q()
    }

    pub fn user_q(&self, user: UserIx) -> f64 {
        self.users[user.index()].q()
    }

    /// Writes `id<TAB>q<TAB>alpha<TAB>beta` lines for items and users.
    pub fn write_tsv(&self, graph: &ShareGraph, items_path: &Path, users_path: &Path) -> Result<()> {
        let write = |path: &Path, rows: &mut dyn Iterator<Item = (&str, &NodeBelief)>| -> Result<()> {
            let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = std::io::BufWriter::new(f);
            for (id, b) in rows {
                writeln!(w, "{id}\t{}\t{}\t{}", b.q(), b.alpha, b.beta)
                    .map_err(|e| Error::io(path, e))?;
            }
            w.flush().map_err(|e| Error::io(path, e))
        };
        write(
            items_path,
            &mut graph.items().iter().map(|i| i.item_id.as_str()).zip(&self.items),
        )?;
        write(
            users_path,
            &mut graph.users().iter().map(|u| u.user_id.as_str()).zip(&self.users),
        )
    }
}

/// Runs `cfg.iterations` full user-then-item sweeps.
pub fn propagate(graph: &ShareGraph, seeds: &LabelSeed, cfg: &HarmonicConfig) -> Result<Beliefs> {
    cfg.validate()?;
    let mut state = Propagation::new(graph, seeds, cfg.c)?;
    for _ in 0..cfg.iterations {
        state.iterate();
    }
    Ok(state.into_beliefs())
}

/// Fake when q < 0, reliable otherwise (including q = 0).
pub fn classify_q(q: f64) -> Label {
    Label::from_hoax(q < 0.0)
}

pub fn classify_harmonic(graph: &ShareGraph, beliefs: &Beliefs, item_id: &str) -> Result<Label> {
    let ix = graph.item_ix(item_id)?;
    Ok(classify_q(beliefs.item_q(ix)))
}

/// Seeded uniform sample of `factor · n_negatives` candidates (all of them,
/// with a warning, if there are too few). Output is sorted.
pub fn subsample_positives(
    candidates: &BTreeSet<String>,
    n_negatives: usize,
    factor: usize,
    seed: u64,
) -> BTreeSet<String> {
    let want = n_negatives.saturating_mul(factor);
    if want >= candidates.len() {
        if want > candidates.len() {
            log::warn!(
                "positive subsample wants {want} items but only {} candidates exist; using all",
                candidates.len()
            );
        }
        return candidates.clone();
    }
    let pool: Vec<&String> = candidates.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample(&mut rng, pool.len(), want)
        .into_iter()
        .map(|k| pool[k].clone())
        .collect()
}
