//! Per-site flag rates and cross-ground-truth discovery.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ingest::{GroundTruth, Label};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteRow {
    pub site: String,
    pub n_urls: usize,
    pub n_flagged: usize,
    pub pct_flagged: f64,
}

fn tally<'a>(
    sites: impl Iterator<Item = &'a str>,
    predictions: &[Label],
) -> BTreeMap<&'a str, (usize, usize)> {
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (site, pred) in sites.zip(predictions) {
        let e = counts.entry(site).or_default();
        e.0 += 1;
        if pred.is_hoax() {
            e.1 += 1;
        }
    }
    counts
}

/// Share of each site's items predicted hoax, for sites with at least
/// `min_urls` items; most-represented sites first.
pub fn per_site_table(sites: &[&str], predictions: &[Label], min_urls: usize) -> Vec<SiteRow> {
    let mut rows: Vec<SiteRow> = tally(sites.iter().copied(), predictions)
        .into_iter()
        .filter(|&(_, (n, _))| n >= min_urls && n > 0)
        .map(|(site, (n, f))| SiteRow {
            site: site.to_string(),
            n_urls: n,
            n_flagged: f,
            pct_flagged: 100.0 * f as f64 / n as f64,
        })
        .collect();
    rows.sort_by(|a, b| b.n_urls.cmp(&a.n_urls).then_with(|| a.site.cmp(&b.site)));
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossGtReport {
    pub train_gt: String,
    pub other_gt: String,
    pub site_threshold_pct: f64,
    pub min_urls: usize,
    /// Items whose site is only in the other list.
    pub n_urls: usize,
    pub n_urls_flagged: usize,
    pub direct_url_pct: Option<f64>,
    /// Other-only sites with at least `min_urls` items.
    pub n_sites: usize,
    pub detected_sites: Vec<String>,
    pub site_detect_pct: Option<f64>,
    pub n_urls_in_detected_sites: usize,
    pub suspicious_url_pct: Option<f64>,
}

/// How well predictions trained against `train_gt` find the sites and URLs
/// that only `other_gt` lists. A site is detected when more than
/// `site_threshold_pct` percent of its items are flagged.
pub fn cross_gt_detect(
    train_gt: &GroundTruth,
    other_gt: &GroundTruth,
    sites: &[&str],
    predictions: &[Label],
    site_threshold_pct: f64,
    min_urls: usize,
) -> CrossGtReport {
    let other_only = |s: &str| other_gt.contains(s) && !train_gt.contains(s);
    let (idx, preds): (Vec<&str>, Vec<Label>) = sites
        .iter()
        .zip(predictions)
        .filter(|(s, _)| other_only(s))
        .map(|(s, p)| (*s, *p))
        .unzip();
    let counts = tally(idx.iter().copied(), &preds);
    let n_urls = idx.len();
    let n_urls_flagged = preds.iter().filter(|p| p.is_hoax()).count();

    let qualifying: Vec<(&str, usize, usize)> = counts
        .iter()
        .filter(|&(_, &(n, _))| n >= min_urls)
        .map(|(&s, &(n, f))| (s, n, f))
        .collect();
    let detected: Vec<(&str, usize)> = qualifying
        .iter()
        .filter(|&&(_, n, f)| 100.0 * f as f64 / n as f64 > site_threshold_pct)
        .map(|&(s, n, _)| (s, n))
        .collect();
    let n_urls_in_detected_sites = detected.iter().map(|&(_, n)| n).sum();
    let pct = |a: usize, b: usize| (b > 0).then(|| 100.0 * a as f64 / b as f64);
    if qualifying.is_empty() {
        log::warn!(
            "cross-GT {} → {}: no other-only site has ≥ {min_urls} items ({} items total)",
            train_gt.name,
            other_gt.name,
            n_urls
        );
    }
    CrossGtReport {
        train_gt: train_gt.name.clone(),
        other_gt: other_gt.name.clone(),
        site_threshold_pct,
        min_urls,
        n_urls,
        n_urls_flagged,
        direct_url_pct: pct(n_urls_flagged, n_urls),
        n_sites: qualifying.len(),
        site_detect_pct: pct(detected.len(), qualifying.len()),
        detected_sites: detected.iter().map(|&(s, _)| s.to_string()).collect(),
        n_urls_in_detected_sites,
        suspicious_url_pct: if qualifying.is_empty() {
            None
        } else {
            pct(n_urls_in_detected_sites, n_urls)
        },
    }
}
