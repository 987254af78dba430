//! Two-stage semi-supervised ART with one-to-many class association.
//!
//! Stage 1 runs plain fuzzy ART over unlabeled samples. Stage 2 runs the same
//! search cycle for each labeled sample (no map-field veto, no match tracking),
//! resonates the class in a one-hot class dictionary and increments the
//! association count between the two winners. [`SslArtModel::finalize_labels`]
//! then labels every prototype with its most frequent class.

use serde::{Deserialize, Serialize};

use crate::art::{ArtNetwork, ArtParams};
use crate::error::{ArtError, Result};
use crate::learner::{NodeStats, SearchDepth, SemiSupervised};
use crate::mapfield::ClassDictionary;
use crate::scalar::Scalar;

/// Association counts between input prototypes (rows) and class nodes
/// (columns), plus the labels fixed by argmax.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OtmTable {
    counts: Vec<Vec<u64>>,
    final_label: Vec<Option<usize>>,
}

impl OtmTable {
    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row(&self, j: usize) -> &[u64] {
        self.counts.get(j).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn final_label(&self, j: usize) -> Option<usize> {
        self.final_label.get(j).copied().flatten()
    }

    pub fn final_labels(&self) -> &[Option<usize>] {
        &self.final_label
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    fn increment(&mut self, j: usize, k: usize) {
        if self.counts.len() <= j {
            self.counts.resize_with(j + 1, Vec::new);
        }
        let row = &mut self.counts[j];
        if row.len() <= k {
            row.resize(k + 1, 0);
        }
        row[k] += 1;
    }

    /// Argmax per row; ties go to the lowest class id (`class_of` maps a
    /// column to its class). Zero rows stay unlabeled.
    fn finalize(&mut self, class_of: impl Fn(usize) -> usize) {
        self.final_label = self
            .counts
            .iter()
            .map(|row| {
                let mut best: Option<(u64, usize)> = None;
                for (k, &n) in row.iter().enumerate() {
                    if n == 0 {
                        continue;
                    }
                    let c = class_of(k);
                    best = match best {
                        Some((bn, bc)) if bn > n || (bn == n && bc < c) => Some((bn, bc)),
                        _ => Some((n, c)),
                    };
                }
                best.map(|(_, c)| c)
            })
            .collect();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SslArtModel<T> {
    art_a: ArtNetwork<T>,
    art_b: ClassDictionary<T>,
    otm: OtmTable,
    search_depth: SearchDepth,
    stage1_nodes: usize,
}

impl<T: Scalar> SslArtModel<T> {
    pub fn new(dim: usize, params: ArtParams<T>, n_classes: usize) -> Result<Self> {
        Ok(Self {
            art_a: ArtNetwork::new(dim, params)?,
            art_b: ClassDictionary::new(n_classes, params.alpha)?,
            otm: OtmTable::default(),
            search_depth: SearchDepth::All,
            stage1_nodes: 0,
        })
    }

    pub fn with_search_depth(mut self, depth: SearchDepth) -> Self {
        self.search_depth = depth;
        self
    }

    pub fn art_a(&self) -> &ArtNetwork<T> {
        &self.art_a
    }

    pub fn art_b(&self) -> &ClassDictionary<T> {
        &self.art_b
    }

    pub fn otm(&self) -> &OtmTable {
        &self.otm
    }

    /// Stage 1 over a batch of unlabeled samples, in order.
    pub fn pretrain_unsupervised(&mut self, unlabeled: &[Vec<T>]) -> Result<()> {
        for x in unlabeled {
            if x.len() != self.art_a.dim() {
                return Err(ArtError::DimensionMismatch { expected: self.art_a.dim(), found: x.len() });
            }
        }
        SemiSupervised::pretrain(self, unlabeled)
    }

    /// Stage 2 for one labeled pair.
    pub fn learn_labeled(&mut self, x: &[T], y: usize) -> Result<usize> {
        let a = self.art_a.code(x)?;
        let k = self.art_b.resonate(y)?;
        let j = self.art_a.learn_sample(&a)?;
        self.otm.increment(j, k);
        Ok(j)
    }

    pub fn finalize_labels(&mut self) {
        let art_b = &self.art_b;
        self.otm.finalize(|k| art_b.class_of(k).expect("column has a class node"));
    }
}

impl<T: Scalar> SemiSupervised<T> for SslArtModel<T> {
    fn dim(&self) -> usize {
        self.art_a.dim()
    }

    fn n_classes(&self) -> usize {
        self.art_b.n_classes()
    }

    fn input_network(&self) -> &ArtNetwork<T> {
        &self.art_a
    }

    fn pretrain_sample(&mut self, x: &[T]) -> Result<usize> {
        let j = self.art_a.learn(x)?;
        self.stage1_nodes = self.art_a.committed_count();
        Ok(j)
    }

    fn train_labeled(&mut self, x: &[T], y: usize) -> Result<usize> {
        self.learn_labeled(x, y)
    }

    fn finalize(&mut self) {
        self.finalize_labels()
    }

    fn search_depth(&self) -> SearchDepth {
        self.search_depth
    }

    fn set_search_depth(&mut self, depth: SearchDepth) {
        self.search_depth = depth;
    }

    fn node_label(&self, j: usize) -> Option<usize> {
        self.otm.final_label(j)
    }

    fn class_evidence(&self, j: usize) -> Vec<u64> {
        let mut evidence = vec![0; self.n_classes()];
        for (k, &n) in self.otm.row(j).iter().enumerate() {
            if let Some(c) = self.art_b.class_of(k) {
                evidence[c] += n;
            }
        }
        evidence
    }

    fn node_stats(&self) -> NodeStats {
        NodeStats {
            stage1: self.stage1_nodes,
            stage2: self.art_a.committed_count(),
            labeled: self.labeled_count(),
        }
    }
}
