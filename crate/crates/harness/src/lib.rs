//! Experiment plumbing for the semi-supervised ART classifiers: delimited
//! datasets, seeded splits, noise injection, metrics, bootstrap intervals,
//! synthetic sets and repeated runs.

pub mod bootstrap;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod noise;
pub mod split;
pub mod synthetic;

pub use bootstrap::{bootstrap_ci, Interval};
pub use dataset::{load_and_normalize, Dataset, Schema};
pub use error::{HarnessError, Result};
pub use experiment::{bench, run_once, run_reps, BenchGrid, MetricsRow, RunConfig, RunOutcome, VotingMode};
pub use metrics::{evaluate, Classifier, Metrics, NodeCounts};
pub use split::{split, Split, SplitSpec};
pub use synthetic::{make_synthetic, SyntheticKind, SyntheticParams};
