//! Seeded synthetic share corpora with planted reliable and unreliable
//! sites, written in the same formats `ingest` reads.

mod words;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, NaiveDate, TimeZone, Utc};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{item_id_for, GroundTruth, RawRecord, SiteAliases};
use crate::sharegraph::{NewsItem, ShareGraph, UserNode};

pub const RECORDS_FILE: &str = "records.jsonl";
pub const GT_FULL_FILE: &str = "gt_full.csv";
pub const GT_LISTED_FILE: &str = "gt_listed.csv";
pub const ALIASES_FILE: &str = "aliases.json";
pub const META_FILE: &str = "synth_meta.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_sites_good: usize,
    pub n_sites_bad: usize,
    /// Bad sites left out of the listed ground truth.
    pub n_hidden_bad: usize,
    /// Recurring accounts; one-off accounts come on top.
    pub n_users: usize,
    pub items_per_good_site: usize,
    pub items_per_bad_site: usize,
    /// Per-site item counts vary uniformly by this fraction around the mean.
    pub items_jitter: f64,
    pub prone_fraction: f64,
    /// Probability that a tweet of a bad-site item comes from a hoax-prone user.
    pub p_bad: f64,
    /// Probability that a tweet of a good-site item comes from a hoax-prone user.
    pub p_good_prone: f64,
    /// Chance that a tweet comes from a one-off account outside both pools.
    pub fresh_rate: f64,
    /// Pareto shape of per-user activity.
    pub activity_shape: f64,
    pub activity_cap: f64,
    /// Exponent of the truncated zeta law for distinct sharers per item.
    pub share_exponent: f64,
    pub max_shares: usize,
    pub common_vocab: usize,
    pub class_vocab: usize,
    /// Chance that a title or description word comes from the class vocabulary.
    pub class_word_rate: f64,
    pub title_words: usize,
    pub description_words: usize,
    /// Chance that a description names its own site.
    pub site_mention_rate: f64,
    pub tracking_param_rate: f64,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub mean_delay_hours: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_sites_good: 10,
            n_sites_bad: 8,
            n_hidden_bad: 5,
            n_users: 1000,
            items_per_good_site: 1500,
            items_per_bad_site: 380,
            items_jitter: 0.25,
            prone_fraction: 0.15,
            p_bad: 0.85,
            p_good_prone: 0.003,
            fresh_rate: 0.065,
            activity_shape: 1.5,
            activity_cap: 200.0,
            share_exponent: 2.0,
            max_shares: 300,
            common_vocab: 600,
            class_vocab: 150,
            class_word_rate: 0.1,
            title_words: 8,
            description_words: 16,
            site_mention_rate: 0.2,
            tracking_param_rate: 0.3,
            start: NaiveDate::from_ymd_opt(2017, 9, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2017, 11, 26).unwrap(),
            mean_delay_hours: 8.0,
            seed: 7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        for (name, v) in [
            ("prone_fraction", self.prone_fraction),
            ("p_bad", self.p_bad),
            ("p_good_prone", self.p_good_prone),
            ("class_word_rate", self.class_word_rate),
            ("site_mention_rate", self.site_mention_rate),
            ("tracking_param_rate", self.tracking_param_rate),
            ("items_jitter", self.items_jitter),
            ("fresh_rate", self.fresh_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if self.n_users == 0 {
            return bad("n_users must be positive".into());
        }
        if self.n_sites_good + self.n_sites_bad + self.n_hidden_bad == 0 {
            return bad("no sites configured".into());
        }
        if self.end < self.start {
            return bad(format!("date range {}..{} is empty", self.start, self.end));
        }
        if self.max_shares == 0 || self.share_exponent <= 1.0 {
            return bad("share law needs max_shares ≥ 1 and exponent > 1".into());
        }
        if self.activity_shape <= 0.0 || self.activity_cap < 1.0 || self.mean_delay_hours < 0.0 {
            return bad("activity_shape, activity_cap and mean_delay_hours out of range".into());
        }
        if self.common_vocab == 0 || self.class_vocab == 0 {
            return bad("vocabularies must be non-empty".into());
        }
        let n_prone = self.n_prone();
        let has_bad = self.n_sites_bad + self.n_hidden_bad > 0;
        let needs_prone = (has_bad && self.p_bad > 0.0) || (self.n_sites_good > 0 && self.p_good_prone > 0.0);
        let needs_regular = (has_bad && self.p_bad < 1.0) || (self.n_sites_good > 0 && self.p_good_prone < 1.0);
        if needs_prone && n_prone == 0 {
            return bad("configuration routes shares to hoax-prone users but there are none".into());
        }
        if needs_regular && n_prone == self.n_users {
            return bad("configuration routes shares to regular users but there are none".into());
        }
        Ok(())
    }

    pub fn n_prone(&self) -> usize {
        (self.n_users as f64 * self.prone_fraction).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteClass {
    Good,
    ListedBad,
    HiddenBad,
}

impl SiteClass {
    pub fn is_bad(self) -> bool {
        self != SiteClass::Good
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteInfo {
    pub site: String,
    pub class: SiteClass,
    pub n_items: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthMeta {
    pub config: SynthConfig,
    pub sites: Vec<SiteInfo>,
    pub prone_users: Vec<String>,
    pub fresh_users: usize,
    pub n_records: usize,
}

impl SynthMeta {
    pub fn sites_of(&self, class: SiteClass) -> impl Iterator<Item = &str> {
        self.sites
            .iter()
            .filter(move |s| s.class == class)
            .map(|s| s.site.as_str())
    }
}

#[derive(Debug)]
pub struct SynthCorpus {
    pub graph: ShareGraph,
    /// Every bad site.
    pub gt_full: GroundTruth,
    /// Listed bad sites only.
    pub gt_listed: GroundTruth,
    pub aliases: SiteAliases,
    pub records: Vec<RawRecord>,
    pub meta: SynthMeta,
}

#[derive(Debug, Clone)]
pub struct SynthFiles {
    pub records: PathBuf,
    pub gt_full: PathBuf,
    pub gt_listed: PathBuf,
    pub aliases: PathBuf,
    pub meta: PathBuf,
}

impl SynthFiles {
    pub fn in_dir(dir: &Path) -> Self {
        SynthFiles {
            records: dir.join(RECORDS_FILE),
            gt_full: dir.join(GT_FULL_FILE),
            gt_listed: dir.join(GT_LISTED_FILE),
            aliases: dir.join(ALIASES_FILE),
            meta: dir.join(META_FILE),
        }
    }
}

impl SynthCorpus {
    pub fn write(&self, dir: &Path) -> Result<SynthFiles> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = SynthFiles::in_dir(dir);
        let mut out = std::io::BufWriter::new(
            fs::File::create(&files.records).map_err(|e| Error::io(&files.records, e))?,
        );
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n").map_err(|e| Error::io(&files.records, e))?;
        }
        out.flush().map_err(|e| Error::io(&files.records, e))?;
        self.gt_full.save(&files.gt_full, "fake")?;
        self.gt_listed.save(&files.gt_listed, "fake")?;
        let aliases = serde_json::to_string_pretty(&self.aliases)?;
        fs::write(&files.aliases, aliases).map_err(|e| Error::io(&files.aliases, e))?;
        let meta = serde_json::to_string_pretty(&self.meta)?;
        fs::write(&files.meta, meta).map_err(|e| Error::io(&files.meta, e))?;
        Ok(files)
    }
}

struct Vocab {
    common: Vec<String>,
    common_w: WeightedIndex<f64>,
    hoax: Vec<String>,
    reliable: Vec<String>,
    class_w: WeightedIndex<f64>,
}

impl Vocab {
    fn new(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> Self {
        Vocab {
            common: words::vocabulary(rng, cfg.common_vocab, ""),
            common_w: WeightedIndex::new(words::zipf_weights(cfg.common_vocab)).unwrap(),
            hoax: words::vocabulary(rng, cfg.class_vocab, "z"),
            reliable: words::vocabulary(rng, cfg.class_vocab, "h"),
            class_w: WeightedIndex::new(words::zipf_weights(cfg.class_vocab)).unwrap(),
        }
    }

    fn text(&self, rng: &mut ChaCha8Rng, n: usize, bad: bool, class_rate: f64) -> Vec<String> {
        (0..n)
            .map(|_| {
                if rng.gen_bool(class_rate) {
                    let v = if bad { &self.hoax } else { &self.reliable };
                    v[self.class_w.sample(rng)].clone()
                } else {
                    self.common[self.common_w.sample(rng)].clone()
                }
            })
            .collect()
    }
}

struct Pool {
    users: Vec<u32>,
    weights: Option<WeightedIndex<f64>>,
}

impl Pool {
    fn new(users: Vec<u32>, activity: &[f64]) -> Self {
        let weights = (!users.is_empty())
            .then(|| WeightedIndex::new(users.iter().map(|&u| activity[u as usize])).unwrap());
        Pool { users, weights }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> u32 {
        self.users[self.weights.as_ref().expect("pool checked non-empty").sample(rng)]
    }
}

struct Tweet {
    at: DateTime<Utc>,
    item: usize,
    user: u32,
    first: bool,
}

fn site_name(class: SiteClass, k: usize) -> String {
    match class {
        SiteClass::Good => format!("dailyledger{k:02}.com"),
        SiteClass::ListedBad => format!("truthwire{k:02}.com"),
        SiteClass::HiddenBad => format!("patriotbeacon{k:02}.net"),
    }
}

fn zeta_weights(exponent: f64, max: usize) -> Vec<f64> {
    (1..=max).map(|k| (k as f64).powf(-exponent)).collect()
}

/// Draws a corpus. Identical configurations give identical output.
pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vocab = Vocab::new(&mut rng, cfg);

    // users: the first n_prone indices are hoax-prone
    let n_prone = cfg.n_prone();
    let activity: Vec<f64> = (0..cfg.n_users)
        .map(|_| {
            let u: f64 = rng.gen_range(f64::EPSILON..1.0);
            u.powf(-1.0 / cfg.activity_shape).min(cfg.activity_cap)
        })
        .collect();
    let prone = Pool::new((0..n_prone as u32).collect(), &activity);
    let regular = Pool::new((n_prone as u32..cfg.n_users as u32).collect(), &activity);

    let mut sites = Vec::new();
    for (class, n, per) in [
        (SiteClass::Good, cfg.n_sites_good, cfg.items_per_good_site),
        (SiteClass::ListedBad, cfg.n_sites_bad, cfg.items_per_bad_site),
        (SiteClass::HiddenBad, cfg.n_hidden_bad, cfg.items_per_bad_site),
    ] {
        for k in 0..n {
            let lo = per as f64 * (1.0 - cfg.items_jitter);
            let hi = per as f64 * (1.0 + cfg.items_jitter);
            let n_items = if hi > lo { rng.gen_range(lo..=hi).round() as usize } else { per };
            sites.push(SiteInfo {
                site: site_name(class, k + 1),
                class,
                n_items,
            });
        }
    }

    let aliases = SiteAliases(
        sites
            .iter()
            .map(|s| {
                let stem = s.site.split('.').next().unwrap();
                (s.site.clone(), vec![format!("{stem} news")])
            })
            .collect(),
    );

    let mut next_fresh = cfg.n_users as u32;
    let share_law = WeightedIndex::new(zeta_weights(cfg.share_exponent, cfg.max_shares)).unwrap();
    let days = (cfg.end - cfg.start).num_days() + 1;
    let mut items: Vec<(NewsItem, bool, DateTime<Utc>)> = Vec::new();
    let mut tweets: Vec<Tweet> = Vec::new();
    for info in &sites {
        let bad = info.class.is_bad();
        let stem = info.site.split('.').next().unwrap().to_string();
        for k in 0..info.n_items {
            let day = cfg.start + Duration::days(rng.gen_range(0..days));
            let published = Utc.from_utc_datetime(&day.and_hms_opt(0, 0, 0).unwrap())
                + Duration::seconds(rng.gen_range(0..86_400));
            let title = vocab.text(&mut rng, cfg.title_words, bad, cfg.class_word_rate);
            let mut desc = vocab.text(&mut rng, cfg.description_words, bad, cfg.class_word_rate);
            if rng.gen_bool(cfg.site_mention_rate) {
                let mention = match rng.gen_range(0..3) {
                    0 => info.site.clone(),
                    1 => stem.clone(),
                    _ => format!("{stem} news"),
                };
                let at = rng.gen_range(0..=desc.len());
                desc.insert(at, mention);
            }
            let slug = title[..3.min(title.len())].join("-");
            let url = format!(
                "https://{}/{}/{slug}-{k}",
                info.site,
                day.format("%Y/%m/%d")
            );
            let ix = items.len();
            let n_shares = (share_law.sample(&mut rng) + 1).min(cfg.n_users);
            let p_prone = if bad { cfg.p_bad } else { cfg.p_good_prone };
            let mut chosen: Vec<u32> = Vec::with_capacity(n_shares);
            for s in 0..n_shares {
                // a few redraws within the pool keep sharers distinct; a
                // stubborn repeat becomes a second tweet by the same user
                let pool = if rng.gen_bool(p_prone) { &prone } else { &regular };
                let mut user = 0;
                if rng.gen_bool(cfg.fresh_rate) {
                    user = next_fresh;
                    next_fresh += 1;
                } else {
                    for _ in 0..20 {
                        user = pool.draw(&mut rng);
                        if !chosen.contains(&user) {
                            break;
                        }
                    }
                }
                chosen.push(user);
                let delay = if s == 0 {
                    0.0
                } else {
                    -rng.gen_range(f64::EPSILON..1.0f64).ln() * cfg.mean_delay_hours * 3600.0
                };
                tweets.push(Tweet {
                    at: published + Duration::seconds(delay as i64),
                    item: ix,
                    user,
                    first: s == 0,
                });
            }
            items.push((
                NewsItem {
                    item_id: item_id_for(&url),
                    canonical_url: url,
                    site: info.site.clone(),
                    title: title.join(" "),
                    description: desc.join(" "),
                    first_seen: day,
                },
                bad,
                published,
            ));
        }
    }
    // the first tweet of an item precedes its others; ties break stably
    tweets.sort_by(|a, b| a.at.cmp(&b.at).then(b.first.cmp(&a.first)).then(a.item.cmp(&b.item)));

    let mut graph = ShareGraph::new();
    let mut records = Vec::with_capacity(tweets.len());
    for (n, t) in tweets.iter().enumerate() {
        let (item, _, _) = &items[t.item];
        let user_id = format!("{}", 100_000 + t.user);
        let raw_url = if rng.gen_bool(cfg.tracking_param_rate) {
            format!("{}?utm_source=twitter&utm_medium=social", item.canonical_url)
        } else {
            item.canonical_url.clone()
        };
        // og tags always ride on the first tweet, sometimes on later ones
        let og = t.first || rng.gen_bool(0.5);
        records.push(RawRecord {
            tweet_id: format!("{}", 900_000_000 + n),
            user_id: user_id.clone(),
            username: format!("user{}", t.user),
            timestamp: t.at.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
            raw_url: Some(raw_url),
            og_url: og.then(|| item.canonical_url.clone()),
            og_title: og.then(|| item.title.clone()),
            og_description: og.then(|| item.description.clone()),
        });
        let i = graph.add_item(item.clone())?;
        let u = graph.add_user(UserNode {
            user_id,
            username: format!("user{}", t.user),
        });
        graph.link(i, u, t.at);
    }

    let bad_sites = |listed_only: bool| -> Vec<String> {
        sites
            .iter()
            .filter(|s| s.class == SiteClass::ListedBad || (!listed_only && s.class == SiteClass::HiddenBad))
            .map(|s| s.site.clone())
            .collect()
    };
    let gt_full = GroundTruth::new("gt_full", bad_sites(false));
    let gt_listed = GroundTruth::new("gt_listed", bad_sites(true));
    let meta = SynthMeta {
        config: cfg.clone(),
        prone_users: (0..n_prone).map(|u| format!("{}", 100_000 + u)).collect(),
        fresh_users: (next_fresh - cfg.n_users as u32) as usize,
        n_records: records.len(),
        sites,
    };
    Ok(SynthCorpus {
        graph,
        gt_full,
        gt_listed,
        aliases,
        records,
        meta,
    })
}

/// Site → class lookup for a generated corpus.
pub fn site_classes(meta: &SynthMeta) -> BTreeMap<&str, SiteClass> {
    meta.sites.iter().map(|s| (s.site.as_str(), s.class)).collect()
}
