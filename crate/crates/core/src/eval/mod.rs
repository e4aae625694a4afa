//! Recall/precision over share-count slices, per-site flag rates,
//! cross-ground-truth discovery and site correlation.

mod correlation;
mod metrics;
mod report;
mod sites;

pub use correlation::{site_correlation, SiteProfiles};
pub use metrics::{score_metrics, Confusion, SliceMetrics};
pub use report::{write_predictions, EvalReport, SLICES};
pub use sites::{cross_gt_detect, per_site_table, CrossGtReport, SiteRow};
