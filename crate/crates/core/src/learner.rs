//! Behaviour shared by the one-to-one and one-to-many models, so ensembles,
//! rule extraction and the harness can treat them uniformly.

use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::art::ArtNetwork;
use crate::error::{ArtError, Result};
use crate::mapfield::ArtmapModel;
use crate::scalar::Scalar;
use crate::ssl::SslArtModel;

/// How many of the best-ranked prototypes prediction may walk before it
/// abstains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchDepth {
    /// Keep walking until a labeled node is found.
    #[default]
    All,
    Top(NonZeroUsize),
}

impl SearchDepth {
    pub fn top(t: usize) -> Result<Self> {
        NonZeroUsize::new(t)
            .map(SearchDepth::Top)
            .ok_or_else(|| ArtError::InvalidParameter("search depth must be at least 1".into()))
    }

    pub fn limit(self) -> usize {
        match self {
            SearchDepth::All => usize::MAX,
            SearchDepth::Top(t) => t.get(),
        }
    }
}

impl fmt::Display for SearchDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchDepth::All => f.write_str("all"),
            SearchDepth::Top(t) => write!(f, "{t}"),
        }
    }
}

impl FromStr for SearchDepth {
    type Err = ArtError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(SearchDepth::All);
        }
        let t: usize = s
            .parse()
            .map_err(|_| ArtError::InvalidParameter(format!("search depth `{s}` is neither an integer nor `all`")))?;
        SearchDepth::top(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mapping {
    /// One-to-many association counts finalised by argmax.
    Otm,
    /// Classic map field with match tracking.
    Oto,
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mapping::Otm => "otm",
            Mapping::Oto => "oto",
        })
    }
}

impl FromStr for Mapping {
    type Err = ArtError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "otm" => Ok(Mapping::Otm),
            "oto" => Ok(Mapping::Oto),
            other => Err(ArtError::InvalidParameter(format!("unknown mapping `{other}` (expected otm or oto)"))),
        }
    }
}

/// Outcome of a T-best prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    /// `None` when none of the walked nodes carries a label.
    pub label: Option<usize>,
    /// 1-based rank of the node that produced the label.
    pub winner_rank: Option<usize>,
    pub winner_index: Option<usize>,
}

impl Prediction {
    pub fn abstain() -> Self {
        Self { label: None, winner_rank: None, winner_index: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NodeStats {
    /// Committed input prototypes after unsupervised pretraining.
    pub stage1: usize,
    /// Committed input prototypes after supervised association.
    pub stage2: usize,
    /// Prototypes carrying a class label.
    pub labeled: usize,
}

/// A two-stage semi-supervised ART classifier.
pub trait SemiSupervised<T: Scalar> {
    fn dim(&self) -> usize;

    fn n_classes(&self) -> usize;

    fn input_network(&self) -> &ArtNetwork<T>;

    /// Stage 1: unsupervised learning of one unlabeled sample.
    fn pretrain_sample(&mut self, x: &[T]) -> Result<usize>;

    /// Stage 2: supervised learning of one labeled pair. Returns the input
    /// prototype that learned it.
    fn train_labeled(&mut self, x: &[T], y: usize) -> Result<usize>;

    /// Fixes node labels from the accumulated evidence. Idempotent.
    fn finalize(&mut self);

    fn search_depth(&self) -> SearchDepth;

    fn set_search_depth(&mut self, depth: SearchDepth);

    /// Label of input prototype `j`, if any.
    fn node_label(&self, j: usize) -> Option<usize>;

    /// Per-class association evidence of prototype `j`, indexed by class id.
    fn class_evidence(&self, j: usize) -> Vec<u64>;

    fn node_stats(&self) -> NodeStats;

    fn pretrain(&mut self, unlabeled: &[Vec<T>]) -> Result<()> {
        for x in unlabeled {
            self.pretrain_sample(x)?;
        }
        Ok(())
    }

    fn train_all(&mut self, labeled: &[(Vec<T>, usize)]) -> Result<()> {
        for (x, y) in labeled {
            self.train_labeled(x, *y)?;
        }
        Ok(())
    }

    fn labeled_count(&self) -> usize {
        (0..self.input_network().len()).filter(|&j| self.node_label(j).is_some()).count()
    }

    /// Ranks committed prototypes by choice value and returns the label of the
    /// first labeled one within `depth`. No vigilance gate applies.
    fn predict_with_depth(&self, x: &[T], depth: SearchDepth) -> Result<Prediction> {
        let net = self.input_network();
        let a = net.code(x)?;
        if net.is_empty() {
            return Err(ArtError::Untrained);
        }
        for (rank, (j, _)) in net.rank_committed(&a).into_iter().take(depth.limit()).enumerate() {
            if let Some(label) = self.node_label(j) {
                return Ok(Prediction { label: Some(label), winner_rank: Some(rank + 1), winner_index: Some(j) });
            }
        }
        Ok(Prediction::abstain())
    }

    fn predict(&self, x: &[T]) -> Result<Prediction> {
        self.predict_with_depth(x, self.search_depth())
    }
}

/// Either kind of model, for ensembles and documents that mix mappings at
/// run time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", tag = "mapping", rename_all = "lowercase")]
pub enum Member<T> {
    Otm(SslArtModel<T>),
    Oto(ArtmapModel<T>),
}

impl<T: Scalar> Member<T> {
    pub fn new(mapping: Mapping, dim: usize, params: crate::art::ArtParams<T>, n_classes: usize) -> Result<Self> {
        Ok(match mapping {
            Mapping::Otm => Member::Otm(SslArtModel::new(dim, params, n_classes)?),
            Mapping::Oto => Member::Oto(ArtmapModel::new(dim, params, n_classes)?),
        })
    }

    pub fn mapping(&self) -> Mapping {
        match self {
            Member::Otm(_) => Mapping::Otm,
            Member::Oto(_) => Mapping::Oto,
        }
    }

    fn inner(&self) -> &dyn SemiSupervised<T> {
        match self {
            Member::Otm(m) => m,
            Member::Oto(m) => m,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn SemiSupervised<T> {
        match self {
            Member::Otm(m) => m,
            Member::Oto(m) => m,
        }
    }
}

impl<T: Scalar> SemiSupervised<T> for Member<T> {
    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn n_classes(&self) -> usize {
        self.inner().n_classes()
    }

    fn input_network(&self) -> &ArtNetwork<T> {
        self.inner().input_network()
    }

    fn pretrain_sample(&mut self, x: &[T]) -> Result<usize> {
        self.inner_mut().pretrain_sample(x)
    }

    fn train_labeled(&mut self, x: &[T], y: usize) -> Result<usize> {
        self.inner_mut().train_labeled(x, y)
    }

    fn finalize(&mut self) {
        self.inner_mut().finalize()
    }

    fn search_depth(&self) -> SearchDepth {
        self.inner().search_depth()
    }

    fn set_search_depth(&mut self, depth: SearchDepth) {
        self.inner_mut().set_search_depth(depth)
    }

    fn node_label(&self, j: usize) -> Option<usize> {
        self.inner().node_label(j)
    }

    fn class_evidence(&self, j: usize) -> Vec<u64> {
        self.inner().class_evidence(j)
    }

    fn node_stats(&self) -> NodeStats {
        self.inner().node_stats()
    }
}
