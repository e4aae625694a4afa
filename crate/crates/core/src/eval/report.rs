use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::{score_metrics, SliceMetrics};
use super::sites::{per_site_table, CrossGtReport, SiteRow};
use crate::error::{Error, Result};
use crate::ingest::Label;
use crate::scoring::ScoredItem;

/// Share-count thresholds; 0 is the unrestricted slice.
pub const SLICES: [usize; 4] = [0, 2, 5, 10];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub ground_truth: String,
    pub train_split: String,
    pub test_split: String,
    pub n_test: usize,
    pub slices: Vec<SliceMetrics>,
    pub per_site: Vec<SiteRow>,
    #[serde(default)]
    pub cross_gt: Option<CrossGtReport>,
    /// Resolved configuration and training diagnostics.
    #[serde(default)]
    pub config: serde_json::Value,
}

impl EvalReport {
    pub fn from_scored(
        method: &str,
        ground_truth: &str,
        train_split: &str,
        test_split: &str,
        scored: &[ScoredItem],
        site_min_urls: usize,
    ) -> Result<Self> {
        let truth: Vec<Label> = scored.iter().map(|s| s.truth).collect();
        let preds: Vec<Label> = scored.iter().map(|s| s.predicted).collect();
        let shares: Vec<usize> = scored.iter().map(|s| s.share_count).collect();
        let slices = SLICES
            .iter()
            .map(|&m| score_metrics(&truth, &preds, &shares, m))
            .collect::<Result<Vec<_>>>()?;
        let sites: Vec<&str> = scored.iter().map(|s| s.site.as_str()).collect();
        Ok(EvalReport {
            method: method.to_string(),
            ground_truth: ground_truth.to_string(),
            train_split: train_split.to_string(),
            test_split: test_split.to_string(),
            n_test: scored.len(),
            slices,
            per_site: per_site_table(&sites, &preds, site_min_urls),
            cross_gt: None,
            config: serde_json::Value::Null,
        })
    }

    pub fn slice(&self, min_shares: usize) -> Option<&SliceMetrics> {
        self.slices.iter().find(|s| s.min_shares == min_shares)
    }

    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.2}"));
        let mut out = String::new();
        let _ = writeln!(
            out,
            "method {}  gt {}  train {}  test {}  items {}",
            self.method, self.ground_truth, self.train_split, self.test_split, self.n_test
        );
        let _ = writeln!(
            out,
            "\n{:<8} {:>7} {:>6} {:>6} {:>6} {:>6} {:>11} {:>14} {:>14}",
            "slice", "items", "tp", "fn", "fp", "tn", "hoax_recall", "nonhoax_recall", "hoax_precision"
        );
        for s in &self.slices {
            let c = &s.confusion;
            let _ = writeln!(
                out,
                "{:<8} {:>7} {:>6} {:>6} {:>6} {:>6} {:>11} {:>14} {:>14}",
                if s.min_shares <= 1 { "all".to_string() } else { format!(">={}", s.min_shares) },
                c.total(),
                c.tp,
                c.fn_,
                c.fp,
                c.tn,
                opt(s.hoax_recall),
                opt(s.nonhoax_recall),
                opt(s.hoax_precision)
            );
        }
        if !self.per_site.is_empty() {
            let w = self.per_site.iter().map(|r| r.site.len()).max().unwrap_or(4).max(4);
            let _ = writeln!(out, "\n{:<w$} {:>7} {:>8} {:>8}", "site", "urls", "flagged", "pct");
            for r in &self.per_site {
                let _ = writeln!(
                    out,
                    "{:<w$} {:>7} {:>8} {:>8.2}",
                    r.site, r.n_urls, r.n_flagged, r.pct_flagged
                );
            }
        }
        if let Some(x) = &self.cross_gt {
            let _ = writeln!(
                out,
                "\ncross-gt {} -> {} (threshold {}%, min {} urls)",
                x.train_gt, x.other_gt, x.site_threshold_pct, x.min_urls
            );
            let _ = writeln!(out, "  direct url    {:>7}  ({}/{})", opt(x.direct_url_pct), x.n_urls_flagged, x.n_urls);
            let _ = writeln!(
                out,
                "  site detect   {:>7}  ({}/{})",
                opt(x.site_detect_pct),
                x.detected_sites.len(),
                x.n_sites
            );
            let _ = writeln!(
                out,
                "  suspicious    {:>7}  ({}/{})",
                opt(x.suspicious_url_pct),
                x.n_urls_in_detected_sites,
                x.n_urls
            );
        }
        out
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let s = serde_json::to_string_pretty(self)?;
        fs::write(path, s + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&s)?)
    }

    pub fn write_text(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    /// One row per site: site, method, gt, pct, n_urls, n_flagged.
    pub fn write_site_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["site", "method", "gt", "pct", "n_urls", "n_flagged"])?;
        for r in &self.per_site {
            w.write_record([
                r.site.as_str(),
                &self.method,
                &self.ground_truth,
                &format!("{:.2}", r.pct_flagged),
                &r.n_urls.to_string(),
                &r.n_flagged.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

pub fn write_predictions(scored: &[ScoredItem], path: &Path) -> Result<()> {
    let mut out = String::from("item_id\tsite\tshare_count\ttruth\tscore\tpredicted\n");
    let name = |l: Label| if l.is_hoax() { "hoax" } else { "nonhoax" };
    for s in scored {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            s.item_id,
            s.site,
            s.share_count,
            name(s.truth),
            s.score,
            name(s.predicted)
        );
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
