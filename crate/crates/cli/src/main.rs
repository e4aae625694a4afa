use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use newsrep::eval::SiteProfiles;
use newsrep::ingest::{build_split, ingest_records, GroundTruth, SiteAliases, SplitSpec, UrlNormalizer};
use newsrep::pipeline::{run, Method, RunConfig, RunInputs};
use newsrep::sharegraph::{read_snapshot, write_snapshot, ShareGraph};
use newsrep::synth::{generate, SynthConfig};

const INGEST_MANIFEST: &str = "ingest_manifest.json";
const SPLIT_MANIFEST: &str = "manifest.json";
const CORRELATION_CSV: &str = "correlation.csv";

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "newsrep", version, about = "Reputation of news URLs from who shares them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse JSON-lines share records into a graph snapshot.
    Ingest(IngestArgs),
    /// Cut a labeled dataset out of a snapshot.
    Split(SplitArgs),
    /// Train or propagate, score the test split, write reports.
    Run(RunArgs),
    /// Site-by-site correlation of sharing users.
    Correlate(CorrelateArgs),
    /// Write a synthetic corpus in the ingest formats.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SplitName {
    Full,
    Min2,
    Test,
    Topics,
}

impl SplitName {
    fn spec(self) -> SplitSpec {
        match self {
            SplitName::Full => SplitSpec::lr_train(),
            SplitName::Min2 => SplitSpec::lr_train_min2(),
            SplitName::Test => SplitSpec::lr_test(),
            SplitName::Topics => SplitSpec::topic_train(),
        }
    }
}

#[derive(Debug, Args)]
struct GraphSource {
    /// Snapshot directory written by `ingest`.
    #[arg(long, conflicts_with = "records", required_unless_present = "records")]
    snapshot: Option<PathBuf>,
    /// Raw records, ingested on the fly.
    #[arg(long)]
    records: Option<PathBuf>,
}

impl GraphSource {
    fn load(&self) -> anyhow::Result<ShareGraph> {
        if let Some(dir) = &self.snapshot {
            return read_snapshot(dir).with_context(|| format!("reading snapshot {}", dir.display()));
        }
        let path = self.records.as_ref().expect("clap requires one source");
        ingest_file(path).map(|(g, _)| g)
    }
}

#[derive(Debug, Args)]
struct GtArgs {
    /// Ground-truth CSV (site,type).
    #[arg(long)]
    gt: PathBuf,
    /// Keep only rows of these types (comma separated); default keeps all.
    #[arg(long, value_delimiter = ',')]
    gt_types: Vec<String>,
}

impl GtArgs {
    fn load(&self, path: &Path) -> anyhow::Result<GroundTruth> {
        let filter: Option<std::collections::HashSet<String>> =
            (!self.gt_types.is_empty()).then(|| self.gt_types.iter().cloned().collect());
        GroundTruth::load(path, filter.as_ref()).with_context(|| format!("loading {}", path.display()))
    }
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[command(flatten)]
    source: GraphSource,
    #[command(flatten)]
    gt: GtArgs,
    #[arg(long, value_enum, default_value = "full")]
    split: SplitName,
    #[arg(long)]
    min_shares: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    source: GraphSource,
    #[command(flatten)]
    gt: GtArgs,
    /// Second list: enables the cross-ground-truth block.
    #[arg(long)]
    gt2: Option<PathBuf>,
    #[arg(long)]
    aliases: Option<PathBuf>,
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// Training split; the test split is fixed.
    #[arg(long, value_enum)]
    split: Option<SplitName>,
    #[arg(long)]
    min_shares: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    pos_factor: Option<usize>,
    #[arg(long)]
    topics_k: Option<usize>,
    /// Minimum items for a site to enter the per-site table.
    #[arg(long, default_value_t = 20)]
    site_min_urls: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CorrelateArgs {
    #[command(flatten)]
    source: GraphSource,
    /// Sites to compare (comma separated).
    #[arg(long, value_delimiter = ',', required_unless_present = "top")]
    sites: Vec<String>,
    /// Compare the N most tweeted sites instead.
    #[arg(long, conflicts_with = "sites")]
    top: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// JSON file overriding any SynthConfig field.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: newsrep::Error| e.to_string())
}

enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

fn ingest_file(path: &Path) -> anyhow::Result<(ShareGraph, newsrep::ingest::IngestStats)> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let out = ingest_records(BufReader::new(file), &UrlNormalizer::default())?;
    for r in out.stats.rejections.iter().take(20) {
        log::warn!("{}:{}: {}", path.display(), r.line, r.reason);
    }
    if out.stats.rejected > 0 {
        log::warn!("rejected {} of {} records", out.stats.rejected, out.stats.records);
    }
    if out.stats.accepted == 0 {
        bail!("{} holds no usable records", path.display());
    }
    Ok((out.graph, out.stats))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn cmd_ingest(args: &IngestArgs) -> Result<(), Failure> {
    let (graph, stats) = ingest_file(&args.records)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_snapshot(&graph, &args.out).map_err(anyhow::Error::from)?;
    write_json(&args.out.join(INGEST_MANIFEST), &stats)?;
    println!(
        "records {}  accepted {}  rejected {}  items {}  users {}",
        stats.records, stats.accepted, stats.rejected, stats.items, stats.users
    );
    Ok(())
}

fn cmd_split(args: &SplitArgs) -> Result<(), Failure> {
    let graph = args.source.load()?;
    let gt = args.gt.load(&args.gt.gt)?;
    let mut spec = args.split.spec();
    if let Some(m) = args.min_shares {
        spec.min_shares = m;
    }
    let ds = build_split(&graph, &spec, &gt).map_err(anyhow::Error::from)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_snapshot(&ds.graph, &args.out).map_err(anyhow::Error::from)?;
    let manifest = ds.manifest();
    write_json(&args.out.join(SPLIT_MANIFEST), &manifest)?;
    println!(
        "split {}  items {}  users {}  tweets {}  hoax {}  nonhoax {}",
        manifest.spec.name, manifest.items, manifest.users, manifest.tweets, manifest.hoax, manifest.nonhoax
    );
    Ok(())
}

fn run_config(args: &RunArgs) -> Result<RunConfig, Failure> {
    let harmonic_only = [
        ("--c", args.c.is_some()),
        ("--iters", args.iters.is_some()),
        ("--pos-factor", args.pos_factor.is_some()),
    ];
    if args.method != Method::Harmonic {
        if let Some((flag, _)) = harmonic_only.iter().find(|(_, set)| *set) {
            return Err(Failure::Usage(format!("{flag} only applies to --method harmonic")));
        }
    }
    if args.method != Method::Topics && args.topics_k.is_some() {
        return Err(Failure::Usage("--topics-k only applies to --method topics".into()));
    }
    let mut cfg = RunConfig::new(args.method, args.seed);
    if let Some(split) = args.split {
        if split == SplitName::Test {
            return Err(Failure::Usage("--split test is the evaluation split, not a training split".into()));
        }
        cfg.train = split.spec();
    }
    if let Some(m) = args.min_shares {
        cfg.train.min_shares = m;
    }
    if let Some(c) = args.c {
        cfg.harmonic.c = c;
    }
    if let Some(n) = args.iters {
        cfg.harmonic.iterations = n;
    }
    if let Some(f) = args.pos_factor {
        cfg.harmonic.pos_factor = f;
    }
    if let Some(k) = args.topics_k {
        cfg.lda.topics = k;
    }
    cfg.site_min_urls = args.site_min_urls;
    cfg.harmonic.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let cfg = run_config(args)?;
    let graph = args.source.load()?;
    let gt = args.gt.load(&args.gt.gt)?;
    let gt2 = args.gt2.as_ref().map(|p| args.gt.load(p)).transpose()?;
    let aliases = match &args.aliases {
        Some(p) => SiteAliases::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => SiteAliases::default(),
    };
    let inputs = RunInputs {
        graph: &graph,
        gt: &gt,
        gt2: gt2.as_ref(),
        aliases: &aliases,
    };
    let out = run(&inputs, &cfg).map_err(anyhow::Error::from)?;
    out.write(&args.out, &graph).map_err(anyhow::Error::from)?;
    print!("{}", out.report.to_text());
    Ok(())
}

fn cmd_correlate(args: &CorrelateArgs) -> Result<(), Failure> {
    let graph = args.source.load()?;
    let profiles = SiteProfiles::build(&graph);
    let sites: Vec<String> = match args.top {
        Some(n) => {
            let mut tweets: std::collections::BTreeMap<&str, usize> = std::collections::BTreeMap::new();
            for e in graph.edges() {
                *tweets.entry(graph.item(e.item).site.as_str()).or_default() += 1;
            }
            let mut ranked: Vec<(&str, usize)> = tweets.into_iter().collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
            ranked.into_iter().take(n).map(|(s, _)| s.to_string()).collect()
        }
        None => args.sites.clone(),
    };
    if sites.is_empty() {
        return Err(Failure::Usage("no sites to correlate".into()));
    }
    let names: Vec<&str> = sites.iter().map(String::as_str).collect();
    let m = profiles.matrix(&names).map_err(anyhow::Error::from)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut csv = String::from("site");
    for s in &names {
        csv.push(',');
        csv.push_str(s);
    }
    csv.push('\n');
    for (s, row) in names.iter().zip(&m) {
        csv.push_str(s);
        for v in row {
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
    }
    let path = args.out.join(CORRELATION_CSV);
    fs::write(&path, &csv).with_context(|| format!("writing {}", path.display()))?;
    print!("{csv}");
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<(), Failure> {
    let mut cfg: SynthConfig = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => SynthConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let corpus = generate(&cfg).map_err(anyhow::Error::from)?;
    let files = corpus.write(&args.out).map_err(anyhow::Error::from)?;
    println!(
        "items {}  users {}  records {}  -> {}",
        corpus.graph.num_items(),
        corpus.graph.num_users(),
        corpus.records.len(),
        files.records.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Split(a) => cmd_split(a),
        Command::Run(a) => cmd_run(a),
        Command::Correlate(a) => cmd_correlate(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("newsrep: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(e)) => {
            eprintln!("newsrep: {e:#}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
