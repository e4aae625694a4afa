//! One method, end to end: split, train or propagate, score the test
//! split, evaluate.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::eval::{cross_gt_detect, write_predictions, EvalReport};
use crate::harmonic::{classify_q, propagate, subsample_positives, Beliefs, HarmonicConfig, LabelSeed};
use crate::ingest::{build_split, Dataset, GroundTruth, SiteAliases, SplitSpec};
use crate::lrmodel::{train_lr, FeatureMode, LrHyper, LrModel};
use crate::scoring::{Prediction, ScoredItem};
use crate::sharegraph::{ItemIx, ShareGraph};
use crate::topicmodel::{build_corpus, fit_lda, train_nn, InferConfig, LdaConfig, NnHyper, NnModel, TopicModel};

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TEXT: &str = "report.txt";
pub const PER_SITE_CSV: &str = "per_site.csv";
pub const PREDICTIONS_TSV: &str = "predictions.tsv";
pub const Q_ITEMS_TSV: &str = "q_items.tsv";
pub const Q_USERS_TSV: &str = "q_users.tsv";
pub const LR_MODEL_JSON: &str = "model.json";
pub const TRAIN_MANIFEST: &str = "train_manifest.json";
pub const TEST_MANIFEST: &str = "test_manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "lr-u")]
    LrU,
    #[serde(rename = "lr-ut")]
    LrUt,
    #[serde(rename = "lr-t")]
    LrT,
    #[serde(rename = "topics")]
    Topics,
    #[serde(rename = "harmonic")]
    Harmonic,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::LrU, Method::LrUt, Method::LrT, Method::Topics, Method::Harmonic];

    pub fn name(self) -> &'static str {
        match self {
            Method::LrU => "lr-u",
            Method::LrUt => "lr-ut",
            Method::LrT => "lr-t",
            Method::Topics => "topics",
            Method::Harmonic => "harmonic",
        }
    }

    fn feature_mode(self) -> Option<FeatureMode> {
        match self {
            Method::LrU => Some(FeatureMode::Users),
            Method::LrUt => Some(FeatureMode::UsersText),
            Method::LrT => Some(FeatureMode::Text),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::Config(format!("unknown method `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub method: Method,
    pub train: SplitSpec,
    pub test: SplitSpec,
    pub lr: LrHyper,
    pub harmonic: HarmonicConfig,
    pub lda: LdaConfig,
    pub infer: InferConfig,
    pub nn: NnHyper,
    /// Users seen fewer times than this are dropped from the topic corpus.
    pub corpus_min_count: usize,
    pub site_min_urls: usize,
    pub cross_threshold_pct: f64,
    pub cross_min_urls: usize,
}

impl RunConfig {
    /// Default splits for the method, with every component seeded from `seed`.
    pub fn new(method: Method, seed: u64) -> Self {
        RunConfig {
            method,
            train: if method == Method::Topics {
                SplitSpec::topic_train()
            } else {
                SplitSpec::lr_train()
            },
            test: SplitSpec::lr_test(),
            lr: LrHyper {
                seed,
                ..LrHyper::default()
            },
            harmonic: HarmonicConfig {
                seed,
                ..HarmonicConfig::default()
            },
            lda: LdaConfig {
                seed,
                ..LdaConfig::default()
            },
            infer: InferConfig::default(),
            nn: NnHyper {
                seed,
                ..NnHyper::default()
            },
            corpus_min_count: 5,
            site_min_urls: 20,
            cross_threshold_pct: 5.0,
            cross_min_urls: 20,
        }
    }
}

pub struct RunInputs<'a> {
    pub graph: &'a ShareGraph,
    pub gt: &'a GroundTruth,
    /// Second list for cross-ground-truth evaluation.
    pub gt2: Option<&'a GroundTruth>,
    pub aliases: &'a SiteAliases,
}

pub enum Artifacts {
    Lr(Box<LrModel>),
    Topics { lda: Box<TopicModel>, nn: Box<NnModel> },
    Harmonic { beliefs: Beliefs, seeds: LabelSeed },
}

pub struct RunOutput {
    pub report: EvalReport,
    pub scored: Vec<ScoredItem>,
    pub train: Dataset,
    pub test: Dataset,
    pub artifacts: Artifacts,
}

/// Drops items whose site only the second list names: their label under
/// the first list is unreliable, so they neither train nor seed.
fn without_other_only(ds: Dataset, gt: &GroundTruth, gt2: Option<&GroundTruth>) -> Dataset {
    let Some(gt2) = gt2 else { return ds };
    let keep: Vec<ItemIx> = ds
        .graph
        .item_indices()
        .filter(|&i| {
            let site = &ds.graph.item(i).site;
            !(gt2.contains(site) && !gt.contains(site))
        })
        .collect();
    if keep.len() == ds.len() {
        return ds;
    }
    log::info!(
        "training split `{}`: set aside {} items from sites only `{}` lists",
        ds.spec.name,
        ds.len() - keep.len(),
        gt2.name
    );
    let graph = ds.graph.restrict(&keep, |_| true);
    Dataset::labeled(graph, gt, ds.spec)
}

fn score(test: &Dataset, predictions: &[Prediction]) -> Vec<ScoredItem> {
    test.graph
        .item_indices()
        .zip(predictions)
        .map(|(i, p)| {
            let item = test.graph.item(i);
            ScoredItem {
                item_id: item.item_id.clone(),
                site: item.site.clone(),
                share_count: test.graph.share_count_ix(i),
                truth: test.label(i),
                score: p.score,
                predicted: p.label,
            }
        })
        .collect()
}

pub fn run(inputs: &RunInputs<'_>, cfg: &RunConfig) -> Result<RunOutput> {
    let train = build_split(inputs.graph, &cfg.train, inputs.gt)?;
    let train = without_other_only(train, inputs.gt, inputs.gt2);
    let test = build_split(inputs.graph, &cfg.test, inputs.gt)?;
    if train.is_empty() {
        return Err(Error::EmptyDataset(format!("training split `{}`", cfg.train.name)));
    }
    if test.is_empty() {
        return Err(Error::EmptyDataset(format!("test split `{}`", cfg.test.name)));
    }

    let (predictions, artifacts, training) = match cfg.method {
        Method::LrU | Method::LrUt | Method::LrT => {
            let mode = cfg.method.feature_mode().unwrap();
            let model = train_lr(&train, mode, &cfg.lr, inputs.aliases)?;
            let preds = model.predict_graph(&test.graph);
            let info = json!({
                "dimension": model.feature_space.dimension(),
                "converged": model.converged,
                "iterations": model.iterations,
                "final_loss": model.loss_trace.last(),
            });
            (preds, Artifacts::Lr(Box::new(model)), info)
        }
        Method::Topics => {
            let corpus = build_corpus(&[&train, &test], cfg.corpus_min_count)?;
            let lda = fit_lda(&corpus, &cfg.lda)?;
            let to_vecs = |g: &ShareGraph| -> Vec<Vec<f64>> {
                lda.infer_graph(g, &cfg.infer).into_iter().map(|v| v.0).collect()
            };
            let train_vecs = to_vecs(&train.graph);
            let nn = train_nn(&train_vecs, &train.labels, &cfg.nn)?;
            let preds = to_vecs(&test.graph)
                .iter()
                .map(|v| nn.model.predict(v))
                .collect::<Result<Vec<_>>>()?;
            let info = json!({
                "vocabulary": corpus.vocab_size(),
                "documents": corpus.documents.len(),
                "dropped_documents": corpus.dropped.len(),
                "tokens": corpus.num_tokens(),
                "final_loss": nn.loss_trace.last(),
            });
            let artifacts = Artifacts::Topics {
                lda: Box::new(lda),
                nn: Box::new(nn.model),
            };
            (preds, artifacts, info)
        }
        Method::Harmonic => {
            let fake: BTreeSet<String> = train
                .graph
                .items()
                .iter()
                .zip(&train.labels)
                .filter(|(_, l)| l.is_hoax())
                .map(|(it, _)| it.item_id.clone())
                .collect();
            let candidates: BTreeSet<String> = train
                .graph
                .items()
                .iter()
                .filter(|it| !inputs.gt.contains(&it.site) && !inputs.gt2.is_some_and(|g| g.contains(&it.site)))
                .map(|it| it.item_id.clone())
                .collect();
            if fake.is_empty() || candidates.is_empty() {
                return Err(Error::SingleClass("harmonic seeding needs fake and reliable training items"));
            }
            let reliable = subsample_positives(&candidates, fake.len(), cfg.harmonic.pos_factor, cfg.harmonic.seed);
            let seeds = LabelSeed { fake, reliable };
            let beliefs = propagate(inputs.graph, &seeds, &cfg.harmonic)?;
            let preds = test
                .graph
                .items()
                .iter()
                .map(|it| {
                    let q = beliefs.item_q(inputs.graph.item_ix(&it.item_id)?);
                    Ok(Prediction {
                        score: q,
                        label: classify_q(q),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let info = json!({
                "fake_seeds": seeds.fake.len(),
                "reliable_seeds": seeds.reliable.len(),
                "graph_items": inputs.graph.num_items(),
                "graph_users": inputs.graph.num_users(),
            });
            (preds, Artifacts::Harmonic { beliefs, seeds }, info)
        }
    };

    let scored = score(&test, &predictions);
    let mut report = EvalReport::from_scored(
        cfg.method.name(),
        &inputs.gt.name,
        &cfg.train.name,
        &cfg.test.name,
        &scored,
        cfg.site_min_urls,
    )?;
    if let Some(gt2) = inputs.gt2 {
        let sites: Vec<&str> = scored.iter().map(|s| s.site.as_str()).collect();
        let preds: Vec<_> = scored.iter().map(|s| s.predicted).collect();
        report.cross_gt = Some(cross_gt_detect(
            inputs.gt,
            gt2,
            &sites,
            &preds,
            cfg.cross_threshold_pct,
            cfg.cross_min_urls,
        ));
    }
    report.config = json!({
        "run": cfg,
        "ground_truth": inputs.gt.name,
        "ground_truth_2": inputs.gt2.map(|g| g.name.clone()),
        "train": train.manifest(),
        "test": test.manifest(),
        "training": training,
    });
    Ok(RunOutput {
        report,
        scored,
        train,
        test,
        artifacts,
    })
}

impl RunOutput {
    /// Writes reports, predictions, manifests and the method's artifacts
    /// under `dir` with fixed file names.
    pub fn write(&self, dir: &Path, graph: &ShareGraph) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.report.write_json(&dir.join(REPORT_JSON))?;
        self.report.write_text(&dir.join(REPORT_TEXT))?;
        self.report.write_site_csv(&dir.join(PER_SITE_CSV))?;
        write_predictions(&self.scored, &dir.join(PREDICTIONS_TSV))?;
        for (name, ds) in [(TRAIN_MANIFEST, &self.train), (TEST_MANIFEST, &self.test)] {
            let p = dir.join(name);
            let text = serde_json::to_string_pretty(&ds.manifest())?;
            fs::write(&p, text + "\n").map_err(|e| Error::io(&p, e))?;
        }
        match &self.artifacts {
            Artifacts::Lr(model) => model.save(&dir.join(LR_MODEL_JSON))?,
            Artifacts::Topics { lda, nn } => {
                lda.save(dir, "lda")?;
                nn.save(dir, "nn")?;
            }
            Artifacts::Harmonic { beliefs, .. } => {
                beliefs.write_tsv(graph, &dir.join(Q_ITEMS_TSV), &dir.join(Q_USERS_TSV))?
            }
        }
        Ok(())
    }
}
