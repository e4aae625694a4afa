use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::sharegraph::ShareGraph;

/// One URL as a document whose words are the users that tweeted it.
/// A user tweeting the URL twice contributes two tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub item_id: String,
    pub tokens: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub documents: Vec<Document>,
    /// user_id → token index, indices assigned in user_id order.
    pub vocabulary: BTreeMap<String, u32>,
    pub min_count: usize,
    /// Items that lost every token to the frequency filter.
    pub dropped: Vec<String>,
}

impl Corpus {
    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn num_tokens(&self) -> usize {
        self.documents.iter().map(|d| d.tokens.len()).sum()
    }

    /// Token bags of every item of `graph` under this corpus' vocabulary;
    /// unknown users are skipped.
    pub fn bags(&self, graph: &ShareGraph) -> Vec<Vec<u32>> {
        bags_of(&self.vocabulary, graph)
    }
}

pub(crate) fn bags_of(vocab: &BTreeMap<String, u32>, graph: &ShareGraph) -> Vec<Vec<u32>> {
    let user_token: Vec<Option<u32>> = graph
        .users()
        .iter()
        .map(|u| vocab.get(&u.user_id).copied())
        .collect();
    let mut bags = vec![Vec::new(); graph.num_items()];
    for e in graph.edges() {
        if let Some(t) = user_token[e.user.index()] {
            bags[e.item.index()].push(t);
        }
    }
    bags
}

/// Tweets per item, with multiplicity, as user-id lists in edge order.
fn raw_documents(graph: &ShareGraph) -> Vec<Vec<&str>> {
    let mut docs = vec![Vec::new(); graph.num_items()];
    for e in graph.edges() {
        docs[e.item.index()].push(graph.user(e.user).user_id.as_str());
    }
    docs
}

/// Pools the items of every dataset (first occurrence of an item id wins)
/// and keeps users that occur at least `min_count` times overall.
pub fn build_corpus(datasets: &[&Dataset], min_count: usize) -> Result<Corpus> {
    let mut seen = HashSet::new();
    let mut raw: Vec<(String, Vec<String>)> = Vec::new();
    for ds in datasets {
        let docs = raw_documents(&ds.graph);
        for (item, users) in ds.graph.items().iter().zip(docs) {
            if seen.insert(item.item_id.clone()) {
                raw.push((
                    item.item_id.clone(),
                    users.into_iter().map(String::from).collect(),
                ));
            }
        }
    }

    let mut counts: HashMap<&str, usize> = HashMap::new();
    for (_, users) in &raw {
        for u in users {
            *counts.entry(u.as_str()).or_default() += 1;
        }
    }
    let mut kept: Vec<&str> = counts
        .iter()
        .filter(|&(_, &c)| c >= min_count)
        .map(|(&u, _)| u)
        .collect();
    kept.sort_unstable();
    let vocabulary: BTreeMap<String, u32> = kept
        .iter()
        .enumerate()
        .map(|(k, u)| (u.to_string(), k as u32))
        .collect();

    let mut documents = Vec::new();
    let mut dropped = Vec::new();
    for (item_id, users) in &raw {
        let tokens: Vec<u32> = users
            .iter()
            .filter_map(|u| vocabulary.get(u).copied())
            .collect();
        if tokens.is_empty() {
            dropped.push(item_id.clone());
        } else {
            documents.push(Document {
                item_id: item_id.clone(),
                tokens,
            });
        }
    }
    if documents.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "no document keeps a user occurring ≥ {min_count} times"
        )));
    }
    if !dropped.is_empty() {
        log::info!("corpus: {} items dropped after min_count {min_count} filtering", dropped.len());
    }
    Ok(Corpus {
        documents,
        vocabulary,
        min_count,
        dropped,
    })
}
