//! Coverage, correctness, accuracy and binary sensitivity/specificity.

use serde::Serialize;
use sslart::ensemble::EnsembleModel;
use sslart::mapfield::ArtmapModel;
use sslart::persist::StoredModel;
use sslart::ssl::SslArtModel;
use sslart::{Member, NodeStats, SemiSupervised};

use crate::error::{HarnessError, Result};

/// Anything that labels a sample or abstains.
pub trait Classifier {
    fn classify(&self, x: &[f64]) -> sslart::Result<Option<usize>>;
    /// Node counts, averaged over members for ensembles.
    fn nodes(&self) -> NodeCounts;
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct NodeCounts {
    pub stage1: f64,
    pub stage2: f64,
    pub labeled: f64,
}

impl From<NodeStats> for NodeCounts {
    fn from(s: NodeStats) -> Self {
        Self { stage1: s.stage1 as f64, stage2: s.stage2 as f64, labeled: s.labeled as f64 }
    }
}

fn mean_counts(stats: &[NodeStats]) -> NodeCounts {
    let n = stats.len().max(1) as f64;
    NodeCounts {
        stage1: stats.iter().map(|s| s.stage1 as f64).sum::<f64>() / n,
        stage2: stats.iter().map(|s| s.stage2 as f64).sum::<f64>() / n,
        labeled: stats.iter().map(|s| s.labeled as f64).sum::<f64>() / n,
    }
}

macro_rules! single_classifier {
    ($($t:ty),*) => {$(
        impl Classifier for $t {
            fn classify(&self, x: &[f64]) -> sslart::Result<Option<usize>> {
                Ok(self.predict(x)?.label)
            }
            fn nodes(&self) -> NodeCounts {
                self.node_stats().into()
            }
        }
    )*};
}

single_classifier!(Member<f64>, SslArtModel<f64>, ArtmapModel<f64>);

impl<M: SemiSupervised<f64>> Classifier for EnsembleModel<f64, M> {
    fn classify(&self, x: &[f64]) -> sslart::Result<Option<usize>> {
        self.predict(x)
    }
    fn nodes(&self) -> NodeCounts {
        mean_counts(&self.node_stats())
    }
}

impl Classifier for StoredModel<f64> {
    fn classify(&self, x: &[f64]) -> sslart::Result<Option<usize>> {
        match self {
            StoredModel::Single { member } => member.classify(x),
            StoredModel::Ensemble { ensemble } => ensemble.classify(x),
        }
    }
    fn nodes(&self) -> NodeCounts {
        match self {
            StoredModel::Single { member } => member.nodes(),
            StoredModel::Ensemble { ensemble } => ensemble.nodes(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub n_test: usize,
    pub coverage: f64,
    /// Correct over predicted; 0 when nothing was predicted.
    pub correctness: f64,
    /// Correct over all test samples, abstentions counted as errors.
    pub accuracy: f64,
    /// Binary tasks only, class 1 positive, over predicted samples.
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub nodes: NodeCounts,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Metrics from predictions against ground truth.
pub fn score(predictions: &[Option<usize>], truth: &[usize], n_classes: usize, nodes: NodeCounts) -> Result<Metrics> {
    if truth.is_empty() {
        return Err(HarnessError::Data("empty test set".into()));
    }
    if predictions.len() != truth.len() {
        return Err(HarnessError::Data(format!("{} predictions for {} samples", predictions.len(), truth.len())));
    }
    let predicted = predictions.iter().filter(|p| p.is_some()).count();
    let correct = predictions.iter().zip(truth).filter(|(p, &t)| **p == Some(t)).count();
    let (sensitivity, specificity) = if n_classes == 2 {
        let (mut tp, mut fn_, mut tn, mut fp) = (0, 0, 0, 0);
        for (p, &t) in predictions.iter().zip(truth) {
            match (p, t) {
                (Some(1), 1) => tp += 1,
                (Some(_), 1) => fn_ += 1,
                (Some(0), _) => tn += 1,
                (Some(_), _) => fp += 1,
                (None, _) => {}
            }
        }
        (Some(ratio(tp, tp + fn_)), Some(ratio(tn, tn + fp)))
    } else {
        (None, None)
    };
    Ok(Metrics {
        n_test: truth.len(),
        coverage: ratio(predicted, truth.len()),
        correctness: ratio(correct, predicted),
        accuracy: ratio(correct, truth.len()),
        sensitivity,
        specificity,
        nodes,
    })
}

pub fn evaluate<C: Classifier + ?Sized>(model: &C, test: &[(Vec<f64>, usize)], n_classes: usize) -> Result<Metrics> {
    let predictions = test.iter().map(|(x, _)| model.classify(x)).collect::<sslart::Result<Vec<_>>>()?;
    let truth: Vec<usize> = test.iter().map(|s| s.1).collect();
    score(&predictions, &truth, n_classes, model.nodes())
}
