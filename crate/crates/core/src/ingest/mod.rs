//! Share-record parsing, URL canonicalization, ground truths, text
//! scrubbing, and temporal dataset splits.

mod groundtruth;
mod split;
mod text;
mod url;

pub use groundtruth::{unreliable_types, GroundTruth};
pub use split::{build_split, Dataset, DatasetManifest, Label, SplitSpec};
pub use text::{scrub_site_mentions, tokenize, SiteAliases, SiteScrubber, TextCleaner};
pub use url::{extract_site, site_name, UrlNormalizer};

use std::collections::HashMap;
use std::io::BufRead;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::sharegraph::{NewsItem, ShareGraph, UserNode};

/// One tweet carrying a URL, with the Open Graph tags of the linked page.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRecord {
    pub tweet_id: String,
    pub user_id: String,
    #[serde(default)]
    pub username: String,
    pub timestamp: String,
    #[serde(default)]
    pub raw_url: Option<String>,
    #[serde(default)]
    pub og_url: Option<String>,
    #[serde(default)]
    pub og_title: Option<String>,
    #[serde(default)]
    pub og_description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub records: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub items: usize,
    pub users: usize,
    pub rejections: Vec<Rejection>,
}

#[derive(Debug)]
pub struct IngestOutcome {
    pub graph: ShareGraph,
    pub stats: IngestStats,
}

/// Stable item identifier derived from the canonical URL.
pub fn item_id_for(canonical_url: &str) -> String {
    Sha256::digest(canonical_url.as_bytes())
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

struct Parsed {
    url: String,
    site: String,
    user_id: String,
    username: String,
    timestamp: DateTime<Utc>,
    title: Option<String>,
    description: Option<String>,
}

fn parse_line(line: &str, normalizer: &UrlNormalizer) -> std::result::Result<Parsed, String> {
    let rec: RawRecord = serde_json::from_str(line).map_err(|e| format!("json: {e}"))?;
    if rec.user_id.is_empty() {
        return Err("empty user_id".into());
    }
    let timestamp = DateTime::parse_from_rfc3339(rec.timestamp.trim())
        .map_err(|e| format!("timestamp `{}`: {e}", rec.timestamp))?
        .with_timezone(&Utc);
    let url = normalizer.canonicalize(&rec).map_err(|e| e.to_string())?;
    let site = extract_site(&url).map_err(|e| e.to_string())?;
    let username = if rec.username.is_empty() {
        rec.user_id.clone()
    } else {
        rec.username
    };
    Ok(Parsed {
        url,
        site,
        user_id: rec.user_id,
        username,
        timestamp,
        title: rec.og_title.filter(|s| !s.trim().is_empty()),
        description: rec.og_description.filter(|s| !s.trim().is_empty()),
    })
}

/// Parses JSON-lines share records into a share graph. Malformed lines are
/// counted and reported, never fatal.
///
/// An item's first-seen date is its earliest tweet; its title and
/// description come from the earliest tweet that carried them.
pub fn ingest_records<R: BufRead>(reader: R, normalizer: &UrlNormalizer) -> Result<IngestOutcome> {
    let lines: Vec<(usize, String)> = reader
        .lines()
        .enumerate()
        .map(|(n, l)| l.map(|l| (n + 1, l)))
        .collect::<std::io::Result<_>>()
        .map_err(|e| crate::error::Error::io("<records>", e))?;
    let parsed: Vec<(usize, std::result::Result<Parsed, String>)> = lines
        .par_iter()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| (*n, parse_line(l, normalizer)))
        .collect();

    let mut stats = IngestStats {
        records: parsed.len(),
        ..IngestStats::default()
    };
    let mut good = Vec::with_capacity(parsed.len());
    for (line, p) in parsed {
        match p {
            Ok(p) => good.push(p),
            Err(reason) => stats.rejections.push(Rejection { line, reason }),
        }
    }
    stats.accepted = good.len();
    stats.rejected = stats.rejections.len();

    // Aggregate per-URL metadata before inserting items.
    let mut order: Vec<&str> = Vec::new();
    let mut meta: HashMap<&str, NewsItem> = HashMap::new();
    let mut meta_ts: HashMap<&str, (DateTime<Utc>, DateTime<Utc>)> = HashMap::new();
    for p in &good {
        let entry = meta.entry(p.url.as_str()).or_insert_with(|| {
            order.push(p.url.as_str());
            NewsItem {
                item_id: item_id_for(&p.url),
                canonical_url: p.url.clone(),
                site: p.site.clone(),
                title: String::new(),
                description: String::new(),
                first_seen: p.timestamp.date_naive(),
            }
        });
        let (title_ts, desc_ts) = meta_ts
            .entry(p.url.as_str())
            .or_insert((DateTime::<Utc>::MAX_UTC, DateTime::<Utc>::MAX_UTC));
        entry.first_seen = entry.first_seen.min(p.timestamp.date_naive());
        if let Some(t) = &p.title {
            if p.timestamp < *title_ts {
                entry.title = t.clone();
                *title_ts = p.timestamp;
            }
        }
        if let Some(d) = &p.description {
            if p.timestamp < *desc_ts {
                entry.description = d.clone();
                *desc_ts = p.timestamp;
            }
        }
    }

    let mut graph = ShareGraph::new();
    for url in order {
        graph.add_item(meta.remove(url).expect("every url has metadata"))?;
    }
    for p in good {
        let item = graph.item_ix(&item_id_for(&p.url))?;
        let user = graph.add_user(UserNode {
            user_id: p.user_id,
            username: p.username,
        });
        graph.link(item, user, p.timestamp);
    }
    stats.items = graph.num_items();
    stats.users = graph.num_users();
    Ok(IngestOutcome { graph, stats })
}
