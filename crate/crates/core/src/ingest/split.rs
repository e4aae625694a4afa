//! Temporal train/test slices of a share graph.

use chrono::{DateTime, NaiveDate, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use super::GroundTruth;
use crate::error::{Error, Result};
use crate::sharegraph::{ItemIx, ShareGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Hoax,
    Nonhoax,
}

impl Label {
    pub fn is_hoax(self) -> bool {
        self == Label::Hoax
    }

    pub fn from_hoax(hoax: bool) -> Self {
        if hoax {
            Label::Hoax
        } else {
            Label::Nonhoax
        }
    }
}

/// Which items and tweets a dataset keeps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub name: String,
    /// Inclusive range of item first-seen dates.
    pub first_seen_start: NaiveDate,
    pub first_seen_end: NaiveDate,
    /// Tweets at or after this instant are dropped.
    pub tweet_cutoff: Option<DateTime<Utc>>,
    pub day_stride: u32,
    pub day_offset: u32,
    /// When set, replaces the stride rule.
    pub explicit_days: Option<Vec<NaiveDate>>,
    pub min_shares: usize,
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid calendar date")
}

fn midnight(d: NaiveDate) -> DateTime<Utc> {
    Utc.from_utc_datetime(&d.and_hms_opt(0, 0, 0).expect("midnight exists"))
}

impl SplitSpec {
    pub fn new(name: impl Into<String>, start: NaiveDate, end: NaiveDate) -> Self {
        SplitSpec {
            name: name.into(),
            first_seen_start: start,
            first_seen_end: end,
            tweet_cutoff: None,
            day_stride: 1,
            day_offset: 0,
            explicit_days: None,
            min_shares: 1,
        }
    }

    /// URLs first seen Sep 1 – Oct 20 2017 on alternating days, tweets before Oct 30.
    pub fn lr_train() -> Self {
        SplitSpec {
            tweet_cutoff: Some(midnight(date(2017, 10, 30))),
            day_stride: 2,
            ..SplitSpec::new("full", date(2017, 9, 1), date(2017, 10, 20))
        }
    }

    /// The training slice restricted to URLs shared at least twice.
    pub fn lr_train_min2() -> Self {
        SplitSpec {
            name: "min2".into(),
            min_shares: 2,
            ..SplitSpec::lr_train()
        }
    }

    /// URLs first seen Oct 31 – Nov 26 2017 on alternating days, all tweets.
    pub fn lr_test() -> Self {
        SplitSpec {
            day_stride: 2,
            ..SplitSpec::new("test", date(2017, 10, 31), date(2017, 11, 26))
        }
    }

    /// Every fourth day from Sep 1 to Oct 19 2017, URLs with at least two tweets.
    pub fn topic_train() -> Self {
        let days = (0..13)
            .map(|k| date(2017, 9, 1) + chrono::Days::new(4 * k))
            .collect();
        SplitSpec {
            explicit_days: Some(days),
            min_shares: 2,
            ..SplitSpec::new("topics", date(2017, 9, 1), date(2017, 10, 19))
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.first_seen_start > self.first_seen_end {
            return Err(Error::Config(format!(
                "split `{}`: start {} after end {}",
                self.name, self.first_seen_start, self.first_seen_end
            )));
        }
        if self.day_stride == 0 {
            return Err(Error::Config(format!("split `{}`: day_stride must be ≥ 1", self.name)));
        }
        if self.min_shares == 0 {
            return Err(Error::Config(format!("split `{}`: min_shares must be ≥ 1", self.name)));
        }
        Ok(())
    }

    /// Whether an item first seen on `day` belongs to this slice.
    pub fn selects_day(&self, day: NaiveDate) -> bool {
        if day < self.first_seen_start || day > self.first_seen_end {
            return false;
        }
        match &self.explicit_days {
            Some(days) => days.contains(&day),
            None => {
                let idx = (day - self.first_seen_start).num_days() - i64::from(self.day_offset);
                idx >= 0 && idx % i64::from(self.day_stride) == 0
            }
        }
    }
}

/// A labeled slice of the share graph.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub spec: SplitSpec,
    pub ground_truth: String,
    pub graph: ShareGraph,
    /// Indexed by the dataset graph's item indices.
    pub labels: Vec<Label>,
}

impl Dataset {
    /// Labels every item of `graph` by membership of its site in `gt`.
    pub fn labeled(graph: ShareGraph, gt: &GroundTruth, spec: SplitSpec) -> Self {
        let labels = graph
            .items()
            .iter()
            .map(|it| Label::from_hoax(gt.contains(&it.site)))
            .collect();
        Dataset {
            spec,
            ground_truth: gt.name.clone(),
            graph,
            labels,
        }
    }

    pub fn label(&self, item: ItemIx) -> Label {
        self.labels[item.index()]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let hoax = self.labels.iter().filter(|l| l.is_hoax()).count();
        (hoax, self.labels.len() - hoax)
    }

    pub fn manifest(&self) -> DatasetManifest {
        let (hoax, nonhoax) = self.class_counts();
        DatasetManifest {
            spec: self.spec.clone(),
            ground_truth: self.ground_truth.clone(),
            items: self.graph.num_items(),
            users: self.graph.num_users(),
            tweets: self.graph.edges().len(),
            hoax,
            nonhoax,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub spec: SplitSpec,
    pub ground_truth: String,
    pub items: usize,
    pub users: usize,
    pub tweets: usize,
    pub hoax: usize,
    pub nonhoax: usize,
}

/// Selects items by first-seen day, drops tweets at or after the cutoff,
/// removes items with too few distinct sharers, and labels the rest.
pub fn build_split(graph: &ShareGraph, spec: &SplitSpec, gt: &GroundTruth) -> Result<Dataset> {
    spec.validate()?;
    let keep_edge = |ts: DateTime<Utc>| spec.tweet_cutoff.is_none_or(|cut| ts < cut);

    let in_range: Vec<ItemIx> = graph
        .item_indices()
        .filter(|&i| spec.selects_day(graph.item(i).first_seen))
        .collect();
    let mut sliced = graph.restrict(&in_range, |e| keep_edge(e.timestamp));
    if spec.min_shares > 1 {
        let enough: Vec<ItemIx> = sliced
            .item_indices()
            .filter(|&i| sliced.share_count_ix(i) >= spec.min_shares)
            .collect();
        sliced = sliced.restrict(&enough, |_| true);
    }
    let dataset = Dataset::labeled(sliced, gt, spec.clone());
    if dataset.is_empty() {
        log::warn!(
            "split `{}` selected no items ({}..={}, stride {}, min_shares {})",
            spec.name,
            spec.first_seen_start,
            spec.first_seen_end,
            spec.day_stride,
            spec.min_shares
        );
    }
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sharegraph::{NewsItem, UserNode};
    use chrono::Duration;

    fn d(day: u32) -> NaiveDate {
        date(2017, 9, day)
    }

    fn graph() -> ShareGraph {
        let mut g = ShareGraph::new();
        for day in 1..=4 {
            let item = NewsItem {
                item_id: format!("i{day}"),
                canonical_url: format!("https://s{}.com/{day}", day % 2),
                site: format!("s{}.com", day % 2),
                title: String::new(),
                description: String::new(),
                first_seen: d(day),
            };
            let t = midnight(d(day));
            g.add_share(item.clone(), UserNode::new("u1"), t).unwrap();
            if day >= 3 {
                g.add_share(item, UserNode::new("u2"), t + Duration::hours(1))
                    .unwrap();
            }
        }
        g
    }

    fn gt() -> GroundTruth {
        GroundTruth::new("gt", ["s1.com".to_string()])
    }

    fn ids(ds: &Dataset) -> Vec<&str> {
        ds.graph.items().iter().map(|i| i.item_id.as_str()).collect()
    }

    #[test]
    fn stride_two() {
        let spec = SplitSpec {
            day_stride: 2,
            ..SplitSpec::new("s", d(1), d(4))
        };
        let ds = build_split(&graph(), &spec, &gt()).unwrap();
        assert_eq!(ids(&ds), ["i1", "i3"]);
        assert_eq!(ds.labels, [Label::Hoax, Label::Hoax]);
    }

    #[test]
    fn offset_shifts_days() {
        let spec = SplitSpec {
            day_stride: 2,
            day_offset: 1,
            ..SplitSpec::new("s", d(1), d(4))
        };
        let ds = build_split(&graph(), &spec, &gt()).unwrap();
        assert_eq!(ids(&ds), ["i2", "i4"]);
        assert_eq!(ds.labels, [Label::Nonhoax, Label::Nonhoax]);
    }

    #[test]
    fn min_shares_drops_singletons() {
        let spec = SplitSpec {
            min_shares: 2,
            ..SplitSpec::new("s", d(1), d(4))
        };
        let ds = build_split(&graph(), &spec, &gt()).unwrap();
        assert_eq!(ids(&ds), ["i3", "i4"]);
    }

    #[test]
    fn cutoff_is_strict() {
        // u2's share of i3 happens exactly at the cutoff
        let spec = SplitSpec {
            tweet_cutoff: Some(midnight(d(3)) + Duration::hours(1)),
            ..SplitSpec::new("s", d(3), d(3))
        };
        let ds = build_split(&graph(), &spec, &gt()).unwrap();
        assert_eq!(ds.graph.share_count("i3").unwrap(), 1);
    }

    #[test]
    fn explicit_days_override_stride() {
        let spec = SplitSpec {
            explicit_days: Some(vec![d(2), d(4)]),
            day_stride: 3,
            ..SplitSpec::new("s", d(1), d(4))
        };
        let ds = build_split(&graph(), &spec, &gt()).unwrap();
        assert_eq!(ids(&ds), ["i2", "i4"]);
    }

    #[test]
    fn identity_slice() {
        let g = graph();
        let ds = build_split(&g, &SplitSpec::new("all", d(1), d(4)), &gt()).unwrap();
        assert_eq!(ds.len(), g.num_items());
        assert_eq!(ds.graph.edges().len(), g.edges().len());
    }

    #[test]
    fn empty_result_is_not_an_error() {
        let ds = build_split(&graph(), &SplitSpec::new("s", d(20), d(21)), &gt()).unwrap();
        assert!(ds.is_empty());
    }

    #[test]
    fn invalid_specs() {
        let g = graph();
        assert!(build_split(&g, &SplitSpec::new("s", d(4), d(1)), &gt()).is_err());
        let zero = SplitSpec {
            min_shares: 0,
            ..SplitSpec::new("s", d(1), d(4))
        };
        assert!(build_split(&g, &zero, &gt()).is_err());
    }

    #[test]
    fn topic_days() {
        let spec = SplitSpec::topic_train();
        let days = spec.explicit_days.as_ref().unwrap();
        assert_eq!(days.first(), Some(&date(2017, 9, 1)));
        assert_eq!(days.last(), Some(&date(2017, 10, 19)));
        assert!(days.contains(&date(2017, 10, 3)));
    }
}
