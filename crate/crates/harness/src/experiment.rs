//! Repeated hold-out runs, parameter sweeps and the metrics table.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use sslart::art::ArtParams;
use sslart::ensemble::{train_ensemble, train_member, EnsembleConfig, Voting};
use sslart::mapfield::{ArtmapModel, DEFAULT_DELTA, DEFAULT_RHO_AB};
use sslart::persist::StoredModel;
use sslart::seed::derive_seed;
use sslart::ssl::SslArtModel;
use sslart::{Mapping, Member, SearchDepth};

use crate::bootstrap::{bootstrap_ci, Interval, DEFAULT_RESAMPLES};
use crate::dataset::Dataset;
use crate::error::{HarnessError, Result};
use crate::metrics::{evaluate, Metrics};
use crate::noise::{inject_feature_noise, inject_label_noise};
use crate::split::{split, Split, SplitSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VotingMode {
    Single,
    Weighted,
    Majority,
}

impl VotingMode {
    pub fn ensemble_voting(self) -> Option<Voting> {
        match self {
            VotingMode::Single => None,
            VotingMode::Weighted => Some(Voting::Weighted),
            VotingMode::Majority => Some(Voting::Majority),
        }
    }
}

impl fmt::Display for VotingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VotingMode::Single => "single",
            VotingMode::Weighted => "weighted",
            VotingMode::Majority => "majority",
        })
    }
}

impl FromStr for VotingMode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" | "none" => Ok(VotingMode::Single),
            "weighted" => Ok(VotingMode::Weighted),
            "majority" => Ok(VotingMode::Majority),
            _ => Err(HarnessError::Config(format!("unknown voting `{s}` (weighted, majority, single)"))),
        }
    }
}

/// Everything one repetition needs besides the data and its seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Match-tracking increment, one-to-one mapping only.
    pub delta: f64,
    pub mapping: Mapping,
    pub voting: VotingMode,
    /// Ignored when `voting` is single.
    pub members: usize,
    pub search_depth: SearchDepth,
    /// The seed field is replaced per repetition.
    pub split: SplitSpec,
    pub label_noise: f64,
    pub feature_noise: f64,
    pub snr: f64,
    pub validation_frac: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            rho: 0.9,
            alpha: sslart::art::DEFAULT_ALPHA,
            beta: 1.0,
            delta: DEFAULT_DELTA,
            mapping: Mapping::Otm,
            voting: VotingMode::Weighted,
            members: 7,
            search_depth: SearchDepth::All,
            split: SplitSpec::default(),
            label_noise: 0.0,
            feature_noise: 0.0,
            snr: 10.0,
            validation_frac: sslart::ensemble::DEFAULT_VALIDATION_FRAC,
        }
    }
}

impl RunConfig {
    pub fn params(&self) -> sslart::Result<ArtParams<f64>> {
        ArtParams::new(self.rho, self.alpha, self.beta)
    }

    pub fn member_count(&self) -> usize {
        if self.voting == VotingMode::Single {
            1
        } else {
            self.members
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.split.validate()?;
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(HarnessError::Config(format!("delta {} must lie in (0, 1)", self.delta)));
        }
        if self.voting != VotingMode::Single && self.members == 0 {
            return Err(HarnessError::Config("an ensemble needs at least one member".into()));
        }
        for (what, v) in [("label noise", self.label_noise), ("feature noise", self.feature_noise)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(HarnessError::Config(format!("{what} fraction {v} out of [0, 1]")));
            }
        }
        if !(self.snr > 0.0) {
            return Err(HarnessError::Config(format!("snr {} must be positive", self.snr)));
        }
        if !(0.0..1.0).contains(&self.validation_frac) {
            return Err(HarnessError::Config(format!("validation fraction {} must lie in [0, 1)", self.validation_frac)));
        }
        Ok(())
    }

    pub fn make_member(&self, dim: usize, n_classes: usize) -> sslart::Result<Member<f64>> {
        let params = self.params()?;
        Ok(match self.mapping {
            Mapping::Otm => Member::Otm(SslArtModel::new(dim, params, n_classes)?),
            Mapping::Oto => Member::Oto(ArtmapModel::with_map_field(dim, params, n_classes, DEFAULT_RHO_AB, self.delta)?),
        })
    }
}

/// Seed of repetition `rep` under `master`.
pub fn rep_seed(master: u64, rep: usize) -> u64 {
    derive_seed(master, rep as u64)
}

/// Split settings of the repetition seeded with `seed`.
pub fn split_spec(cfg: &RunConfig, seed: u64) -> SplitSpec {
    SplitSpec { seed: derive_seed(seed, 0), ..cfg.split }
}

/// The split of one repetition, with noise applied to the training pools.
pub fn prepare(ds: &Dataset, cfg: &RunConfig, seed: u64) -> Result<Split> {
    let mut s = split(ds, &split_spec(cfg, seed))?;
    if cfg.label_noise > 0.0 {
        inject_label_noise(&mut s.labeled, ds.n_classes(), cfg.label_noise, derive_seed(seed, 1))?;
    }
    if cfg.feature_noise > 0.0 {
        let mut xs: Vec<Vec<f64>> = s.labeled.iter().map(|p| p.0.clone()).collect();
        inject_feature_noise(&mut xs, cfg.feature_noise, cfg.snr, derive_seed(seed, 2))?;
        for (pair, x) in s.labeled.iter_mut().zip(xs) {
            pair.0 = x;
        }
        inject_feature_noise(&mut s.unlabeled, cfg.feature_noise, cfg.snr, derive_seed(seed, 3))?;
    }
    Ok(s)
}

/// Trains a single model or an ensemble on prepared pools.
pub fn train(
    dim: usize,
    n_classes: usize,
    labeled: &[(Vec<f64>, usize)],
    unlabeled: &[Vec<f64>],
    cfg: &RunConfig,
    seed: u64,
) -> Result<StoredModel<f64>> {
    match cfg.voting.ensemble_voting() {
        None => {
            let (member, _) = train_member(cfg.make_member(dim, n_classes)?, labeled, unlabeled, 0.0, cfg.search_depth, seed)?;
            Ok(StoredModel::Single { member })
        }
        Some(voting) => {
            let ens = EnsembleConfig {
                members: cfg.members,
                voting,
                validation_frac: cfg.validation_frac,
                search_depth: cfg.search_depth,
                diversify: true,
            };
            let ensemble = train_ensemble(labeled, unlabeled, &ens, seed, || cfg.make_member(dim, n_classes))?;
            Ok(StoredModel::Ensemble { ensemble })
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub rep: usize,
    pub seed: u64,
    pub split: Split,
    pub model: StoredModel<f64>,
    pub metrics: Metrics,
    pub wall: Duration,
}

/// One repetition: split, noise, training and test-set evaluation.
pub fn run_once(ds: &Dataset, cfg: &RunConfig, rep: usize, seed: u64) -> Result<RunOutcome> {
    cfg.validate()?;
    let start = Instant::now();
    let s = prepare(ds, cfg, seed)?;
    let model = train(ds.dim(), ds.n_classes(), &s.labeled, &s.unlabeled, cfg, derive_seed(seed, 4))?;
    let metrics = evaluate(&model, &s.test, ds.n_classes())?;
    Ok(RunOutcome { rep, seed, split: s, model, metrics, wall: start.elapsed() })
}

/// `reps` repetitions with seeds derived from `master`, run in parallel and
/// returned in repetition order.
pub fn run_reps(ds: &Dataset, cfg: &RunConfig, master: u64, reps: usize) -> Result<Vec<RunOutcome>> {
    (0..reps).into_par_iter().map(|r| run_once(ds, cfg, r, rep_seed(master, r))).collect()
}

/// One line of the metrics table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub run_id: String,
    pub seed: u64,
    pub rho: f64,
    #[serde(rename = "M")]
    pub members: usize,
    pub mapping: String,
    pub voting: String,
    #[serde(rename = "T")]
    pub search_depth: String,
    pub labeled_frac: f64,
    pub label_noise: f64,
    pub feature_noise: f64,
    pub coverage: Option<f64>,
    pub correctness: Option<f64>,
    pub accuracy: Option<f64>,
    /// `NA` for multi-class tasks.
    pub sensitivity: String,
    pub specificity: String,
    pub nodes_stage1: Option<f64>,
    pub nodes_stage2: Option<f64>,
    pub nodes_labeled: Option<f64>,
    pub wall_ms: f64,
    pub error: String,
}

fn na(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

impl MetricsRow {
    fn base(run_id: String, seed: u64, cfg: &RunConfig) -> Self {
        Self {
            run_id,
            seed,
            rho: cfg.rho,
            members: cfg.member_count(),
            mapping: cfg.mapping.to_string(),
            voting: cfg.voting.to_string(),
            search_depth: cfg.search_depth.to_string(),
            labeled_frac: cfg.split.labeled_frac,
            label_noise: cfg.label_noise,
            feature_noise: cfg.feature_noise,
            coverage: None,
            correctness: None,
            accuracy: None,
            sensitivity: "NA".into(),
            specificity: "NA".into(),
            nodes_stage1: None,
            nodes_stage2: None,
            nodes_labeled: None,
            wall_ms: 0.0,
            error: String::new(),
        }
    }

    pub fn from_metrics(run_id: String, seed: u64, cfg: &RunConfig, m: &Metrics, wall: Duration) -> Self {
        Self {
            coverage: Some(m.coverage),
            correctness: Some(m.correctness),
            accuracy: Some(m.accuracy),
            sensitivity: na(m.sensitivity),
            specificity: na(m.specificity),
            nodes_stage1: Some(m.nodes.stage1),
            nodes_stage2: Some(m.nodes.stage2),
            nodes_labeled: Some(m.nodes.labeled),
            wall_ms: wall.as_secs_f64() * 1e3,
            ..Self::base(run_id, seed, cfg)
        }
    }

    pub fn failed(run_id: String, seed: u64, cfg: &RunConfig, err: &HarnessError) -> Self {
        Self { error: err.to_string(), ..Self::base(run_id, seed, cfg) }
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[MetricsRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Mean and 95% interval of one metric across repetitions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub statistic: String,
    pub runs: usize,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

pub fn summarize(rows: &[MetricsRow], seed: u64) -> Result<Vec<SummaryRow>> {
    type Getter = fn(&MetricsRow) -> Option<f64>;
    let stats: [(&str, Getter); 3] =
        [("accuracy", |r| r.accuracy), ("coverage", |r| r.coverage), ("correctness", |r| r.correctness)];
    let mut out = Vec::new();
    for (name, get) in stats {
        let values: Vec<f64> = rows.iter().filter_map(get).collect();
        let Interval { mean, lo, hi } = bootstrap_ci(&values, 0.95, DEFAULT_RESAMPLES, seed)?;
        out.push(SummaryRow { statistic: name.into(), runs: values.len(), mean, ci_lo: lo, ci_hi: hi });
    }
    Ok(out)
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Values swept by [`bench`]; every combination is run `reps` times.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchGrid {
    pub rhos: Vec<f64>,
    pub members: Vec<usize>,
    pub mappings: Vec<Mapping>,
    pub votings: Vec<VotingMode>,
    pub depths: Vec<SearchDepth>,
    pub labeled_fracs: Vec<f64>,
    pub label_noises: Vec<f64>,
    pub reps: usize,
}

impl BenchGrid {
    /// A one-cell grid holding the settings of `cfg`.
    pub fn from_config(cfg: &RunConfig, reps: usize) -> Self {
        Self {
            rhos: vec![cfg.rho],
            members: vec![cfg.members],
            mappings: vec![cfg.mapping],
            votings: vec![cfg.voting],
            depths: vec![cfg.search_depth],
            labeled_fracs: vec![cfg.split.labeled_frac],
            label_noises: vec![cfg.label_noise],
            reps,
        }
    }

    /// Cell configurations in row-major order, rho varying slowest.
    pub fn cells(&self, base: &RunConfig) -> Vec<RunConfig> {
        let mut cells = Vec::new();
        for &rho in &self.rhos {
            for &members in &self.members {
                for &mapping in &self.mappings {
                    for &voting in &self.votings {
                        for &search_depth in &self.depths {
                            for &lf in &self.labeled_fracs {
                                for &label_noise in &self.label_noises {
                                    let split = SplitSpec { labeled_frac: lf, unlabeled_frac: 1.0 - lf, ..base.split };
                                    cells.push(RunConfig { rho, members, mapping, voting, search_depth, split, label_noise, ..*base });
                                }
                            }
                        }
                    }
                }
            }
        }
        cells
    }
}

/// Runs every grid cell and repetition. Repetition `r` uses the same seed in
/// every cell, so cells are compared on identical splits. Failed runs are
/// kept as rows carrying the error.
pub fn bench(ds: &Dataset, base: &RunConfig, grid: &BenchGrid, master: u64) -> Vec<MetricsRow> {
    let cells = grid.cells(base);
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..grid.reps).map(move |r| (c, r))).collect();
    jobs.par_iter()
        .map(|&(c, r)| {
            let cfg = &cells[c];
            let seed = rep_seed(master, r);
            let id = format!("c{c}-r{r}");
            match run_once(ds, cfg, r, seed) {
                Ok(o) => MetricsRow::from_metrics(id, seed, cfg, &o.metrics, o.wall),
                Err(e) => MetricsRow::failed(id, seed, cfg, &e),
            }
        })
        .collect()
}
