//! Flags, the optional TOML config file and their merge.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use harness::{RunConfig, SplitSpec, VotingMode};
use serde::Deserialize;
use sslart::{Mapping, SearchDepth};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "sslart", version, about = "Semi-supervised ART classifiers: train, evaluate, extract rules, sweep parameters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model (or one per repetition) and save it.
    Train(TrainArgs),
    /// Evaluate saved models, or run the train/test protocol from scratch.
    Eval(EvalArgs),
    /// List the fuzzy If-Then rules of a saved model.
    Rules(RulesArgs),
    /// Sweep a parameter grid and write one metrics row per run.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct SourceArgs {
    /// Key-value TOML file with the same keys as the long flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Delimited data file.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Schema file; defaults to `<stem>.schema.toml` next to the data.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Generated data instead of a file: two-gaussians, rings or xor.
    #[arg(long, conflicts_with = "data")]
    pub synthetic: Option<String>,
    /// Size of a generated set.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Input vigilance.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Choice parameter.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Learning rate; 1 is fast learning.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Match-tracking increment (one-to-one mapping).
    #[arg(long)]
    pub delta: Option<f64>,
    /// otm (one-to-many) or oto (one-to-one).
    #[arg(long)]
    pub mapping: Option<String>,
    /// weighted, majority or single.
    #[arg(long)]
    pub voting: Option<String>,
    /// Ensemble size.
    #[arg(long)]
    pub members: Option<usize>,
    /// Prototypes inspected at prediction time: an integer or `all`.
    #[arg(long)]
    pub search_depth: Option<String>,
    /// Share of each member's labeled pool held out for class weights.
    #[arg(long)]
    pub validation_frac: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProtocolArgs {
    /// Share of the data held out for testing.
    #[arg(long)]
    pub test_frac: Option<f64>,
    /// Share of the training part that keeps its labels; the rest is unlabeled.
    #[arg(long)]
    pub labeled_frac: Option<f64>,
    /// Share of labeled samples whose class is flipped.
    #[arg(long)]
    pub label_noise: Option<f64>,
    /// Share of training samples given Gaussian feature noise.
    #[arg(long)]
    pub feature_noise: Option<f64>,
    /// Signal-to-noise ratio of the feature noise.
    #[arg(long)]
    pub snr: Option<f64>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of repetitions.
    #[arg(long)]
    pub reps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Model file; with several repetitions `-r<k>` is added before the extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    /// The held-out test pool of the training split.
    Test,
    /// The labeled training pool, with its original labels.
    Labeled,
    /// Every row of the data.
    All,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Saved model files; without any the full protocol is run.
    #[arg(long, num_args = 1..)]
    pub model: Vec<PathBuf>,
    /// Rows of the data to score a saved model on.
    #[arg(long, value_enum)]
    pub subset: Option<Subset>,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub model_args: ModelArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Metrics table destination; stdout by default.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RulesFormat {
    Text,
    Csv,
}

#[derive(Debug, Args)]
pub struct RulesArgs {
    /// Saved model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Number of linguistic levels.
    #[arg(long, short = 'q')]
    pub quantization: Option<usize>,
    /// TOML file with optional `features`, `classes` and `levels` name lists.
    #[arg(long)]
    pub names: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: RulesFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Comma-separated vigilance values.
    #[arg(long, value_delimiter = ',')]
    pub rho: Vec<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub mapping: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub voting: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub members: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub search_depth: Vec<String>,
    #[arg(long)]
    pub validation_frac: Option<f64>,
    #[arg(long)]
    pub test_frac: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub labeled_frac: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub label_noise: Vec<f64>,
    #[arg(long)]
    pub feature_noise: Option<f64>,
    #[arg(long)]
    pub snr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }

    fn single(&self, key: &str) -> CliResult<T> {
        match self {
            OneOrMany::One(v) => Ok(v.clone()),
            OneOrMany::Many(v) if v.len() == 1 => Ok(v[0].clone()),
            OneOrMany::Many(_) => Err(CliError::Usage(format!("config key `{key}` takes a single value here"))),
        }
    }
}

/// `search-depth = 3` or `search-depth = "all"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DepthValue {
    Count(usize),
    Word(String),
}

impl DepthValue {
    pub fn as_string(&self) -> String {
        match self {
            DepthValue::Count(n) => n.to_string(),
            DepthValue::Word(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub data: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    pub synthetic: Option<String>,
    pub n: Option<usize>,
    pub rho: Option<OneOrMany<f64>>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub mapping: Option<OneOrMany<String>>,
    pub voting: Option<OneOrMany<String>>,
    pub members: Option<OneOrMany<usize>>,
    pub search_depth: Option<OneOrMany<DepthValue>>,
    pub validation_frac: Option<f64>,
    pub quantization: Option<usize>,
    pub test_frac: Option<f64>,
    pub labeled_frac: Option<OneOrMany<f64>>,
    pub label_noise: Option<OneOrMany<f64>>,
    pub feature_noise: Option<f64>,
    pub snr: Option<f64>,
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub out: Option<PathBuf>,
    pub subset: Option<Subset>,
}

impl FileConfig {
    /// Reads `path`; relative data and schema paths resolve against the
    /// config file's directory.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        let mut cfg: Self = toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.data, &mut cfg.schema].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

pub fn parse_mapping(s: &str) -> CliResult<Mapping> {
    s.parse().map_err(|e: sslart::ArtError| CliError::Usage(e.to_string()))
}

pub fn parse_voting(s: &str) -> CliResult<VotingMode> {
    s.parse().map_err(|e: harness::HarnessError| CliError::Usage(e.to_string()))
}

pub fn parse_depth(s: &str) -> CliResult<SearchDepth> {
    s.parse().map_err(|e: sslart::ArtError| CliError::Usage(e.to_string()))
}

fn pick<T: Clone>(flag: Option<T>, file: Option<&OneOrMany<T>>, key: &str) -> CliResult<Option<T>> {
    match (flag, file) {
        (Some(v), _) => Ok(Some(v)),
        (None, Some(f)) => f.single(key).map(Some),
        (None, None) => Ok(None),
    }
}

/// Run settings from defaults, then the config file, then flags.
pub fn resolve_run(m: &ModelArgs, p: &ProtocolArgs, file: &FileConfig) -> CliResult<RunConfig> {
    let d = RunConfig::default();
    let mut cfg = d;
    cfg.rho = pick(m.rho, file.rho.as_ref(), "rho")?.unwrap_or(d.rho);
    cfg.alpha = m.alpha.or(file.alpha).unwrap_or(d.alpha);
    cfg.beta = m.beta.or(file.beta).unwrap_or(d.beta);
    cfg.delta = m.delta.or(file.delta).unwrap_or(d.delta);
    if let Some(s) = pick(m.mapping.clone(), file.mapping.as_ref(), "mapping")? {
        cfg.mapping = parse_mapping(&s)?;
    }
    if let Some(s) = pick(m.voting.clone(), file.voting.as_ref(), "voting")? {
        cfg.voting = parse_voting(&s)?;
    }
    cfg.members = pick(m.members, file.members.as_ref(), "members")?.unwrap_or(d.members);
    let depth = match (&m.search_depth, &file.search_depth) {
        (Some(s), _) => Some(s.clone()),
        (None, Some(f)) => Some(f.single("search-depth")?.as_string()),
        _ => None,
    };
    if let Some(s) = depth {
        cfg.search_depth = parse_depth(&s)?;
    }
    cfg.validation_frac = m.validation_frac.or(file.validation_frac).unwrap_or(d.validation_frac);
    let labeled = pick(p.labeled_frac, file.labeled_frac.as_ref(), "labeled-frac")?.unwrap_or(d.split.labeled_frac);
    cfg.split = SplitSpec::with_labeled(p.test_frac.or(file.test_frac).unwrap_or(d.split.test_frac), labeled, 0);
    cfg.label_noise = pick(p.label_noise, file.label_noise.as_ref(), "label-noise")?.unwrap_or(d.label_noise);
    cfg.feature_noise = p.feature_noise.or(file.feature_noise).unwrap_or(d.feature_noise);
    cfg.snr = p.snr.or(file.snr).unwrap_or(d.snr);
    cfg.validate()?;
    Ok(cfg)
}

pub fn seed_and_reps(p: &ProtocolArgs, file: &FileConfig, default_reps: usize) -> CliResult<(u64, usize)> {
    let reps = p.reps.or(file.reps).unwrap_or(default_reps);
    if reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    Ok((p.seed.or(file.seed).unwrap_or(0), reps))
}
