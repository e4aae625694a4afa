//! Oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use newsrep::sharegraph::NewsItem;

pub fn item(id: &str) -> NewsItem {
    NewsItem {
        item_id: id.to_string(),
        canonical_url: format!("https://site.com/{id}"),
        site: "site.com".into(),
        title: String::new(),
        description: String::new(),
        first_seen: NaiveDate::from_ymd_opt(2017, 9, 1).unwrap(),
    }
}

/// Direct transcription of the update rule over string-keyed adjacency.
pub fn brute_harmonic(
    edges: &BTreeSet<(String, String)>,
    fake: &BTreeSet<String>,
    reliable: &BTreeSet<String>,
    c: f64,
    iters: usize,
) -> (BTreeMap<String, f64>, BTreeMap<String, f64>) {
    let mut item_q: BTreeMap<String, f64> = BTreeMap::new();
    let mut user_q: BTreeMap<String, f64> = BTreeMap::new();
    for (i, u) in edges {
        let q = if fake.contains(i) {
            -1.0
        } else if reliable.contains(i) {
            1.0
        } else {
            0.0
        };
        item_q.insert(i.clone(), q);
        user_q.insert(u.clone(), 0.0);
    }
    let belief = |qs: Vec<f64>| {
        let a = c + qs.iter().filter(|&&q| q > 0.0).sum::<f64>();
        let b = c - qs.iter().filter(|&&q| q < 0.0).sum::<f64>();
        (a - b) / (a + b)
    };
    for _ in 0..iters {
        let next_users: BTreeMap<String, f64> = user_q
            .keys()
            .map(|u| {
                let qs = edges.iter().filter(|(_, v)| v == u).map(|(i, _)| item_q[i]).collect();
                (u.clone(), belief(qs))
            })
            .collect();
        user_q = next_users;
        let next_items: BTreeMap<String, f64> = item_q
            .iter()
            .map(|(i, &q)| {
                if fake.contains(i) || reliable.contains(i) {
                    return (i.clone(), q);
                }
                let qs = edges.iter().filter(|(j, _)| j == i).map(|(_, u)| user_q[u]).collect();
                (i.clone(), belief(qs))
            })
            .collect();
        item_q = next_items;
    }
    (item_q, user_q)
}
