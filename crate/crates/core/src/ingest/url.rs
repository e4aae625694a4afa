//! URL canonicalization and registered-domain extraction.

use url::{Host, Url};

use super::RawRecord;
use crate::error::{Error, Result};

/// Normalizes raw share URLs into canonical form.
///
/// Query parameters matching any strip pattern are removed. A pattern ending
/// in `*` matches by prefix (`utm_*`), anything else must match exactly.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct UrlNormalizer {
    pub strip_params: Vec<String>,
}

impl Default for UrlNormalizer {
    fn default() -> Self {
        UrlNormalizer {
            strip_params: vec!["utm_*".into(), "fbclid".into(), "gclid".into()],
        }
    }
}

impl UrlNormalizer {
    fn strips(&self, key: &str) -> bool {
        self.strip_params.iter().any(|p| match p.strip_suffix('*') {
            Some(prefix) => key.starts_with(prefix),
            None => key == p,
        })
    }

    /// Lowercases scheme and host, drops the fragment and tracking
    /// parameters, and removes trailing slashes from the path.
    pub fn normalize(&self, raw: &str) -> Result<String> {
        let invalid = |reason: &str| Error::InvalidUrl {
            url: raw.to_string(),
            reason: reason.to_string(),
        };
        let mut url = Url::parse(raw.trim()).map_err(|e| invalid(&e.to_string()))?;
        if !matches!(url.scheme(), "http" | "https") {
            return Err(invalid("scheme must be http or https"));
        }
        if url.host_str().is_none_or(str::is_empty) {
            return Err(invalid("missing host"));
        }
        url.set_fragment(None);

        if let Some(query) = url.query() {
            if query.is_empty() {
                url.set_query(None);
            } else {
                let pairs: Vec<(String, String)> = url
                    .query_pairs()
                    .map(|(k, v)| (k.into_owned(), v.into_owned()))
                    .collect();
                let kept: Vec<&(String, String)> =
                    pairs.iter().filter(|(k, _)| !self.strips(k)).collect();
                if kept.is_empty() {
                    url.set_query(None);
                } else if kept.len() != pairs.len() {
                    let mut ser = url::form_urlencoded::Serializer::new(String::new());
                    for (k, v) in kept {
                        ser.append_pair(k, v);
                    }
                    url.set_query(Some(&ser.finish()));
                }
            }
        }

        let path = url.path();
        if path.len() > 1 && path.ends_with('/') {
            let trimmed = path.trim_end_matches('/').to_string();
            url.set_path(if trimmed.is_empty() { "/" } else { &trimmed });
        }

        let mut out = url.to_string();
        if url.path() == "/" && url.query().is_none() && out.ends_with('/') {
            out.pop();
        }
        Ok(out)
    }

    /// The canonical URL of a share record: `og:url` when present and valid,
    /// otherwise the raw tweeted URL.
    pub fn canonicalize(&self, record: &RawRecord) -> Result<String> {
        if let Some(og) = record.og_url.as_deref().filter(|s| !s.trim().is_empty()) {
            match self.normalize(og) {
                Ok(url) => return Ok(url),
                Err(e) if record.raw_url.is_none() => return Err(e),
                Err(_) => {}
            }
        }
        match record.raw_url.as_deref() {
            Some(raw) => self.normalize(raw),
            None => Err(Error::InvalidUrl {
                url: String::new(),
                reason: "record has neither raw_url nor og_url".into(),
            }),
        }
    }
}

/// Registered domain (public suffix + one label) of a URL's host.
/// IP-literal hosts are returned verbatim; hosts with no known suffix are
/// returned whole.
pub fn extract_site(canonical_url: &str) -> Result<String> {
    let url = Url::parse(canonical_url).map_err(|e| Error::InvalidUrl {
        url: canonical_url.to_string(),
        reason: e.to_string(),
    })?;
    match url.host() {
        Some(Host::Domain(host)) => Ok(registered_domain(host)),
        Some(Host::Ipv4(ip)) => Ok(ip.to_string()),
        Some(Host::Ipv6(ip)) => Ok(ip.to_string()),
        None => Err(Error::InvalidUrl {
            url: canonical_url.to_string(),
            reason: "missing host".into(),
        }),
    }
}

pub(crate) fn registered_domain(host: &str) -> String {
    let host = host.trim_end_matches('.').to_ascii_lowercase();
    match psl::domain_str(&host) {
        Some(d) => d.to_string(),
        None => host,
    }
}

/// The registrable label of a site with its public suffix removed
/// (`breitbart.com` → `breitbart`, `b.co.uk` → `b`).
pub fn site_name(site: &str) -> &str {
    match psl::suffix_str(site) {
        Some(suffix) if suffix.len() < site.len() => {
            site[..site.len() - suffix.len()].trim_end_matches('.')
        }
        _ => site,
    }
}
