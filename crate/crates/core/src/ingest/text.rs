//! Tokenization and site-mention scrubbing of article text.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use regex::Regex;

use super::url::site_name;
use crate::error::{Error, Result};

/// Lowercased tokens split on anything that is not a letter or digit.
/// Single-character tokens are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().nth(1).is_some())
        .map(str::to_lowercase)
        .collect()
}

/// Known alternative spellings of each site, keyed by registered domain.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct SiteAliases(pub BTreeMap<String, Vec<String>>);

impl SiteAliases {
    /// Reads a JSON object mapping each site to a list of aliases.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let map: BTreeMap<String, Vec<String>> = serde_json::from_str(&text)
            .map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
        Ok(SiteAliases(
            map.into_iter()
                .map(|(k, v)| (k.trim().to_ascii_lowercase(), v))
                .collect(),
        ))
    }

    pub fn get(&self, site: &str) -> &[String] {
        self.0.get(site).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Compiled matcher for every mention of one site.
#[derive(Debug, Clone)]
pub struct SiteScrubber {
    pattern: Option<Regex>,
}

impl SiteScrubber {
    pub fn new(site: &str, aliases: &[String]) -> Self {
        let site = site.trim().to_lowercase();
        let mut terms: Vec<String> = vec![format!("www.{site}"), site.clone()];
        terms.push(site_name(&site).to_string());
        terms.extend(aliases.iter().map(|a| a.trim().to_lowercase()));
        terms.retain(|t| !t.is_empty() && t != "www.");
        // longest first so `breitbart.com` wins over `breitbart`
        terms.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        terms.dedup();
        if terms.is_empty() {
            return SiteScrubber { pattern: None };
        }
        let alternation = terms
            .iter()
            .map(|t| regex::escape(t))
            .collect::<Vec<_>>()
            .join("|");
        let pattern = Regex::new(&format!(r"(?i)\b(?:{alternation})\b"))
            .expect("escaped alternation is a valid regex");
        SiteScrubber {
            pattern: Some(pattern),
        }
    }

    pub fn scrub(&self, text: &str) -> String {
        let mut current = text.to_string();
        if let Some(re) = &self.pattern {
            loop {
                let next = re.replace_all(&current, " ");
                if next == current {
                    break;
                }
                current = next.into_owned();
            }
        }
        current.split_whitespace().collect::<Vec<_>>().join(" ")
    }
}

/// Removes the site's domain, its name without public suffix, and every
/// alias from `text`, case-insensitively and as whole tokens.
pub fn scrub_site_mentions(text: &str, site: &str, aliases: &[String]) -> String {
    SiteScrubber::new(site, aliases).scrub(text)
}

/// Scrubs and tokenizes many texts, compiling one matcher per site.
#[derive(Debug, Default)]
pub struct TextCleaner {
    aliases: SiteAliases,
    cache: HashMap<String, SiteScrubber>,
}

impl TextCleaner {
    pub fn new(aliases: SiteAliases) -> Self {
        TextCleaner {
            aliases,
            cache: HashMap::new(),
        }
    }

    pub fn aliases(&self) -> &SiteAliases {
        &self.aliases
    }

    /// Scrubbed tokens of an item's title and description, deduplicated and sorted.
    pub fn item_tokens(&mut self, site: &str, title: &str, description: &str) -> Vec<String> {
        let aliases = &self.aliases;
        let scrubber = self
            .cache
            .entry(site.to_string())
            .or_insert_with(|| SiteScrubber::new(site, aliases.get(site)));
        let mut tokens = tokenize(&scrubber.scrub(title));
        tokens.extend(tokenize(&scrubber.scrub(description)));
        tokens.sort_unstable();
        tokens.dedup();
        tokens
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Fake News, Real Fear!"), ["fake", "news", "real", "fear"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("COVID-19 spike"), ["covid", "19", "spike"]);
        assert_eq!(tokenize("a b cd"), ["cd"]);
        assert_eq!(tokenize("Ünïcode Straße"), ["ünïcode", "straße"]);
    }

    #[test]
    fn scrub_examples() {
        let aliases = vec!["breitbart".to_string()];
        assert_eq!(
            scrub_site_mentions("Read more at Breitbart.com now", "breitbart.com", &aliases),
            "Read more at now"
        );
        assert_eq!(
            scrub_site_mentions("No mention here", "cnn.com", &[]),
            "No mention here"
        );
        assert_eq!(
            scrub_site_mentions("BREITBART exclusive", "breitbart.com", &aliases),
            "exclusive"
        );
    }

    #[test]
    fn scrub_without_alias_uses_site_name() {
        assert_eq!(
            scrub_site_mentions("via www.InfoWars.com: infowars reports", "infowars.com", &[]),
            "via : reports"
        );
    }

    #[test]
    fn scrub_respects_word_boundaries() {
        assert_eq!(
            scrub_site_mentions("cnnx and xcnn but cnn", "cnn.com", &[]),
            "cnnx and xcnn but"
        );
    }

    #[test]
    fn cleaner_dedups_tokens() {
        let mut c = TextCleaner::default();
        assert_eq!(
            c.item_tokens("x.com", "Fake fake", "FAKE news from x.com"),
            ["fake", "from", "news"]
        );
    }

    proptest! {
        #[test]
        fn scrubbed_text_never_mentions_site(
            words in prop::collection::vec(
                prop::sample::select(vec!["breitbart", "Breitbart.com", "BREITBART.COM", "news", "breit", "bart", ".", "www.breitbart.com", "x", "breitbartx"]),
                0..12),
            seps in prop::collection::vec(prop::sample::select(vec![" ", ".", "", ", ", "-"]), 12),
        ) {
            let mut text = String::new();
            for (w, s) in words.iter().zip(&seps) {
                text.push_str(w);
                text.push_str(s);
            }
            let out = scrub_site_mentions(&text, "breitbart.com", &["breitbart".into()]);
            let probe = Regex::new(r"(?i)\bbreitbart\.com\b").unwrap();
            prop_assert!(!probe.is_match(&out), "{text:?} -> {out:?}");
            let name = Regex::new(r"(?i)\bbreitbart\b").unwrap();
            prop_assert!(!name.is_match(&out), "{text:?} -> {out:?}");
        }
    }
}
