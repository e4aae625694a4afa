use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::sharegraph::ShareGraph;

/// Tweets per user for each site, counting every share edge.
pub struct SiteProfiles {
    profiles: BTreeMap<String, HashMap<u32, f64>>,
}

impl SiteProfiles {
    pub fn build(graph: &ShareGraph) -> Self {
        let mut profiles: BTreeMap<String, HashMap<u32, f64>> = graph
            .items()
            .iter()
            .map(|it| (it.site.clone(), HashMap::new()))
            .collect();
        for e in graph.edges() {
            let site = &graph.item(e.item).site;
            *profiles.get_mut(site).unwrap().entry(e.user.0).or_default() += 1.0;
        }
        SiteProfiles { profiles }
    }

    pub fn sites(&self) -> impl Iterator<Item = &str> {
        self.profiles.keys().map(String::as_str)
    }

    /// Cosine similarity of the two sites' user vectors; zero if either site
    /// has no tweets.
    pub fn correlation(&self, a: &str, b: &str) -> Result<f64> {
        let pa = self.profiles.get(a).ok_or_else(|| Error::not_found("site", a))?;
        let pb = self.profiles.get(b).ok_or_else(|| Error::not_found("site", b))?;
        let norm = |p: &HashMap<u32, f64>| p.values().map(|v| v * v).sum::<f64>().sqrt();
        let (na, nb) = (norm(pa), norm(pb));
        if na == 0.0 || nb == 0.0 {
            return Ok(0.0);
        }
        let (small, large) = if pa.len() <= pb.len() { (pa, pb) } else { (pb, pa) };
        let dot: f64 = small
            .iter()
            .filter_map(|(u, x)| large.get(u).map(|y| x * y))
            .sum();
        Ok(dot / (na * nb))
    }

    pub fn matrix(&self, sites: &[&str]) -> Result<Vec<Vec<f64>>> {
        let mut m = vec![vec![0.0; sites.len()]; sites.len()];
        for i in 0..sites.len() {
            for j in i..sites.len() {
                let r = self.correlation(sites[i], sites[j])?;
                m[i][j] = r;
                m[j][i] = r;
            }
        }
        Ok(m)
    }
}

pub fn site_correlation(graph: &ShareGraph, a: &str, b: &str) -> Result<f64> {
    SiteProfiles::build(graph).correlation(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sharegraph::{NewsItem, UserNode};
    use chrono::{NaiveDate, TimeZone, Utc};

    fn graph(shares: &[(&str, &str, &str)]) -> ShareGraph {
        let mut g = ShareGraph::new();
        for (k, &(item, site, user)) in shares.iter().enumerate() {
            let it = NewsItem {
                item_id: item.into(),
                canonical_url: format!("https://{site}/{item}"),
                site: site.into(),
                title: String::new(),
                description: String::new(),
                first_seen: NaiveDate::from_ymd_opt(2017, 9, 1).unwrap(),
            };
            let ts = Utc.timestamp_opt(1_504_224_000 + k as i64, 0).unwrap();
            g.add_share(it, UserNode::new(user), ts).unwrap();
        }
        g
    }

    #[test]
    fn hand_computed() {
        // a: u1=2, u2=1 ; b: u1=1, u2=0, u3=1
        let g = graph(&[
            ("i1", "a.com", "u1"),
            ("i2", "a.com", "u1"),
            ("i1", "a.com", "u2"),
            ("j1", "b.com", "u1"),
            ("j1", "b.com", "u3"),
        ]);
        let r = site_correlation(&g, "a.com", "b.com").unwrap();
        assert!((r - 2.0 / (5f64.sqrt() * 2f64.sqrt())).abs() < 1e-12);
        assert!((r - 0.632_455_532_033_675_9).abs() < 1e-12);
    }

    #[test]
    fn symmetric_unit_diagonal() {
        let g = graph(&[("i1", "a.com", "u1"), ("j1", "b.com", "u1"), ("j1", "b.com", "u2")]);
        let p = SiteProfiles::build(&g);
        let m = p.matrix(&["a.com", "b.com"]).unwrap();
        assert!((m[0][0] - 1.0).abs() < 1e-12 && (m[1][1] - 1.0).abs() < 1e-12);
        assert_eq!(m[0][1], m[1][0]);
    }

    #[test]
    fn disjoint_and_unknown() {
        let g = graph(&[("i1", "a.com", "u1"), ("j1", "b.com", "u2")]);
        assert_eq!(site_correlation(&g, "a.com", "b.com").unwrap(), 0.0);
        assert!(site_correlation(&g, "a.com", "nope.com").is_err());
    }
}
