use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use super::url::registered_domain;
use crate::error::{Error, Result};

/// A named list of sites considered unreliable.
#[derive(Debug, Clone, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct GroundTruth {
    pub name: String,
    pub sites: BTreeSet<String>,
}

impl GroundTruth {
    pub fn new(name: impl Into<String>, sites: impl IntoIterator<Item = String>) -> Self {
        GroundTruth {
            name: name.into(),
            sites: sites.into_iter().map(|s| normalize_site(&s)).collect(),
        }
    }

    pub fn contains(&self, site: &str) -> bool {
        self.sites.contains(site)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn overlap(&self, other: &GroundTruth) -> usize {
        self.sites.intersection(&other.sites).count()
    }

    pub fn union(&self, other: &GroundTruth) -> GroundTruth {
        GroundTruth {
            name: format!("{}+{}", self.name, other.name),
            sites: self.sites.union(&other.sites).cloned().collect(),
        }
    }

    /// Loads a `site,type` CSV. A header row starting with `site` is skipped.
    /// With a filter, only rows whose type is in the filter are kept.
    pub fn load(path: &Path, type_filter: Option<&HashSet<String>>) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(file);
        let mut sites = BTreeSet::new();
        for (n, row) in reader.records().enumerate() {
            let line = n + 1;
            let row = row.map_err(|e| Error::parse(path, line, e.to_string()))?;
            if row.len() == 1 && row[0].is_empty() {
                continue;
            }
            if row.len() > 2 {
                return Err(Error::parse(
                    path,
                    line,
                    format!("expected `site,type`, got {} columns", row.len()),
                ));
            }
            let site = &row[0];
            if line == 1 && site.eq_ignore_ascii_case("site") {
                continue;
            }
            if site.is_empty() {
                return Err(Error::parse(path, line, "empty site"));
            }
            if let Some(filter) = type_filter {
                let ty = row.get(1).unwrap_or("").to_ascii_lowercase();
                if !filter.contains(&ty) {
                    continue;
                }
            }
            let site = normalize_site(site);
            if site.is_empty() {
                return Err(Error::parse(path, line, "site has no host"));
            }
            sites.insert(site);
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(GroundTruth { name, sites })
    }

    /// Writes the list as `site,type` with a constant type column.
    pub fn save(&self, path: &Path, ty: &str) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["site", "type"])?;
        for site in &self.sites {
            w.write_record([site.as_str(), ty])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// The six Opensources categories kept as unreliable.
pub fn unreliable_types() -> HashSet<String> {
    ["bias", "fake", "junksci", "hate", "conspiracy", "clickbait"]
        .into_iter()
        .map(String::from)
        .collect()
}

/// Lowercases, drops scheme and path, and reduces to the registered domain.
fn normalize_site(raw: &str) -> String {
    let s = raw.trim().to_ascii_lowercase();
    let s = s.split_once("://").map_or(s.as_str(), |(_, rest)| rest);
    let host = s.split(['/', '?', '#']).next().unwrap_or("");
    let host = host.split(':').next().unwrap_or("");
    if host.is_empty() {
        return String::new();
    }
    if host.parse::<std::net::IpAddr>().is_ok() {
        return host.to_string();
    }
    registered_domain(host)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn csv_file(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn filters_by_type() {
        let f = csv_file("a.com,fake\nb.com,satire\n");
        let filter: HashSet<String> = ["fake".to_string()].into();
        let gt = GroundTruth::load(f.path(), Some(&filter)).unwrap();
        assert_eq!(gt.sites, BTreeSet::from(["a.com".to_string()]));
    }

    #[test]
    fn normalizes_and_skips_header() {
        let f = csv_file("site,type\nhttps://www.Foo.com/about,fake\nbar.co.uk\n");
        let gt = GroundTruth::load(f.path(), None).unwrap();
        assert_eq!(
            gt.sites,
            BTreeSet::from(["foo.com".to_string(), "bar.co.uk".to_string()])
        );
    }

    #[test]
    fn malformed_row_has_line_number() {
        let f = csv_file("a.com,fake\nb.com,fake,extra\n");
        match GroundTruth::load(f.path(), None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            GroundTruth::load(Path::new("/nonexistent/gt.csv"), None),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn overlap_and_union() {
        let a = GroundTruth::new("a", ["x.com".into(), "y.com".into()]);
        let b = GroundTruth::new("b", ["y.com".into(), "z.com".into()]);
        assert_eq!(a.overlap(&b), 1);
        assert_eq!(a.union(&b).len(), 3);
    }
}
