use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Dataset, SiteAliases, SiteScrubber, TextCleaner};
use crate::sharegraph::{ItemIx, NewsItem, ShareGraph};

/// Which feature families a model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureMode {
    /// Sharing users only.
    #[serde(rename = "U")]
    Users,
    /// Users plus title/description words.
    #[serde(rename = "UT")]
    UsersText,
    /// Title/description words only.
    #[serde(rename = "T")]
    Text,
}

impl FeatureMode {
    pub fn uses_users(self) -> bool {
        matches!(self, FeatureMode::Users | FeatureMode::UsersText)
    }

    pub fn uses_text(self) -> bool {
        matches!(self, FeatureMode::Text | FeatureMode::UsersText)
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureMode::Users => "lr-u",
            FeatureMode::UsersText => "lr-ut",
            FeatureMode::Text => "lr-t",
        }
    }
}

/// Binary presence vector: the sorted columns whose value is 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseVector {
    columns: Vec<u32>,
}

impl SparseVector {
    /// Sorts and deduplicates the given columns.
    pub fn from_columns(mut columns: Vec<u32>) -> Self {
        columns.sort_unstable();
        columns.dedup();
        SparseVector { columns }
    }

    pub fn columns(&self) -> &[u32] {
        &self.columns
    }

    pub fn nnz(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    #[inline]
    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.columns.iter().map(|&c| dense[c as usize]).sum()
    }
}

/// Column assignment for users and words. User columns come first, each
/// family sorted by its external key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpace {
    pub mode: FeatureMode,
    pub user_index: BTreeMap<String, u32>,
    pub word_index: BTreeMap<String, u32>,
    /// Used to scrub site mentions before tokenizing.
    #[serde(default)]
    pub aliases: SiteAliases,
}

impl FeatureSpace {
    pub fn build(train: &Dataset, mode: FeatureMode, aliases: &SiteAliases) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyDataset(format!(
                "cannot build features from empty split `{}`",
                train.spec.name
            )));
        }
        let g = &train.graph;
        let mut users = BTreeSet::new();
        if mode.uses_users() {
            for i in g.item_indices() {
                for &u in g.sharers(i) {
                    users.insert(g.user(u).user_id.as_str());
                }
            }
        }
        let mut words = BTreeSet::new();
        if mode.uses_text() {
            let mut cleaner = TextCleaner::new(aliases.clone());
            for item in g.items() {
                words.extend(cleaner.item_tokens(&item.site, &item.title, &item.description));
            }
        }
        let user_index: BTreeMap<String, u32> = users
            .into_iter()
            .enumerate()
            .map(|(k, u)| (u.to_string(), k as u32))
            .collect();
        let offset = user_index.len() as u32;
        let word_index = words
            .into_iter()
            .enumerate()
            .map(|(k, w)| (w, offset + k as u32))
            .collect();
        Ok(FeatureSpace {
            mode,
            user_index,
            word_index,
            aliases: aliases.clone(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.user_index.len() + self.word_index.len()
    }

    fn vector(&self, tokens: &[String], sharers: &mut dyn Iterator<Item = &str>) -> SparseVector {
        let mut cols = Vec::new();
        if self.mode.uses_users() {
            cols.extend(sharers.filter_map(|u| self.user_index.get(u).copied()));
        }
        if self.mode.uses_text() {
            cols.extend(tokens.iter().filter_map(|t| self.word_index.get(t).copied()));
        }
        SparseVector::from_columns(cols)
    }

    fn tokens(&self, scrubber: &SiteScrubber, item: &NewsItem) -> Vec<String> {
        if !self.mode.uses_text() {
            return Vec::new();
        }
        let mut t = crate::ingest::tokenize(&scrubber.scrub(&item.title));
        t.extend(crate::ingest::tokenize(&scrubber.scrub(&item.description)));
        t
    }

    /// Feature vector of one item; unknown users and words are dropped.
    pub fn featurize<'a>(
        &self,
        item: &NewsItem,
        sharers: impl IntoIterator<Item = &'a str>,
    ) -> SparseVector {
        let scrubber = SiteScrubber::new(&item.site, self.aliases.get(&item.site));
        let tokens = self.tokens(&scrubber, item);
        self.vector(&tokens, &mut sharers.into_iter())
    }

    /// Feature vectors of every item in a graph, in item-index order.
    pub fn featurize_graph(&self, graph: &ShareGraph) -> Vec<SparseVector> {
        let mut scrubbers = std::collections::HashMap::new();
        if self.mode.uses_text() {
            for item in graph.items() {
                scrubbers
                    .entry(item.site.as_str())
                    .or_insert_with(|| SiteScrubber::new(&item.site, self.aliases.get(&item.site)));
            }
        }
        let empty = SiteScrubber::new("", &[]);
        (0..graph.num_items() as u32)
            .into_par_iter()
            .map(|i| {
                let ix = ItemIx(i);
                let item = graph.item(ix);
                let scrubber = scrubbers.get(item.site.as_str()).unwrap_or(&empty);
                let tokens = self.tokens(scrubber, item);
                let mut sharers = graph.sharers(ix).iter().map(|&u| graph.user(u).user_id.as_str());
                self.vector(&tokens, &mut sharers)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{GroundTruth, SplitSpec};
    use chrono::{NaiveDate, TimeZone, Utc};

    fn item(id: &str, site: &str, title: &str) -> NewsItem {
        NewsItem {
            item_id: id.into(),
            canonical_url: format!("https://{site}/{id}"),
            site: site.into(),
            title: title.into(),
            description: String::new(),
            first_seen: NaiveDate::from_ymd_opt(2017, 9, 1).unwrap(),
        }
    }

    fn dataset(shares: &[(NewsItem, &str)]) -> Dataset {
        let mut g = ShareGraph::new();
        let t = Utc.with_ymd_and_hms(2017, 9, 1, 0, 0, 0).unwrap();
        for (it, u) in shares {
            g.add_share(it.clone(), crate::sharegraph::UserNode::new(*u), t)
                .unwrap();
        }
        let d = NaiveDate::from_ymd_opt(2017, 9, 1).unwrap();
        Dataset::labeled(g, &GroundTruth::new("gt", ["bad.com".to_string()]), SplitSpec::new("t", d, d))
    }

    fn toy() -> Dataset {
        dataset(&[
            (item("a", "bad.com", "Fake news"), "u1"),
            (item("b", "good.com", "news today"), "u2"),
        ])
    }

    #[test]
    fn dimensions_by_mode() {
        let ds = toy();
        let none = SiteAliases::default();
        let ut = FeatureSpace::build(&ds, FeatureMode::UsersText, &none).unwrap();
        assert_eq!(ut.dimension(), 5);
        assert_eq!(ut.user_index["u1"], 0);
        assert_eq!(ut.word_index["fake"], 2);
        let u = FeatureSpace::build(&ds, FeatureMode::Users, &none).unwrap();
        assert_eq!(u.dimension(), 2);
        assert!(u.word_index.is_empty());
        let t = FeatureSpace::build(&ds, FeatureMode::Text, &none).unwrap();
        assert!(t.user_index.is_empty());
        assert_eq!(t.word_index["fake"], 0);
    }

    #[test]
    fn unseen_tokens_and_users_are_dropped() {
        let fs = FeatureSpace::build(&toy(), FeatureMode::UsersText, &SiteAliases::default()).unwrap();
        let v = fs.featurize(&item("z", "x.com", "brand new words"), ["u9"]);
        assert!(v.is_empty());
        let v = fs.featurize(&item("z", "x.com", "Fake"), ["u1"]);
        assert_eq!(v.columns(), [0, 2]);
        let v = fs.featurize(&item("z", "x.com", "fake FAKE fake"), std::iter::empty());
        assert_eq!(v.nnz(), 1);
    }

    #[test]
    fn own_site_is_scrubbed() {
        let ds = dataset(&[(item("a", "bad.com", "Only on Bad.com: bad stuff"), "u1")]);
        let fs = FeatureSpace::build(&ds, FeatureMode::Text, &SiteAliases::default()).unwrap();
        assert_eq!(fs.word_index.keys().collect::<Vec<_>>(), ["on", "only", "stuff"]);
    }

    #[test]
    fn graph_featurization_matches_single_item() {
        let ds = toy();
        let fs = FeatureSpace::build(&ds, FeatureMode::UsersText, &SiteAliases::default()).unwrap();
        let all = fs.featurize_graph(&ds.graph);
        for ix in ds.graph.item_indices() {
            let sharers = ds.graph.sharers(ix).iter().map(|&u| ds.graph.user(u).user_id.as_str());
            assert_eq!(all[ix.index()], fs.featurize(ds.graph.item(ix), sharers));
        }
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let d = NaiveDate::from_ymd_opt(2017, 9, 1).unwrap();
        let ds = Dataset::labeled(ShareGraph::new(), &GroundTruth::default(), SplitSpec::new("e", d, d));
        assert!(matches!(
            FeatureSpace::build(&ds, FeatureMode::Users, &SiteAliases::default()),
            Err(Error::EmptyDataset(_))
        ));
    }
}
