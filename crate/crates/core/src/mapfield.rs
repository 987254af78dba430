//! Fuzzy ARTMAP with a one-to-one map field.
//!
//! The input layer (ART_a) learns complement-coded features, the class layer
//! (ART_b) learns one-hot class codes under full vigilance so it acts as a
//! class dictionary, and the map field binds every committed input prototype
//! to exactly one class node. When the map field rejects a winner, match
//! tracking raises the input vigilance just above the winner's match ratio
//! and the search resumes.

use serde::{Deserialize, Serialize};

use crate::art::{self, ArtNetwork, ArtParams, CodedSample};
use crate::error::{ArtError, Result};
use crate::learner::{NodeStats, SearchDepth, SemiSupervised};
use crate::scalar::Scalar;

pub const DEFAULT_DELTA: f64 = 0.001;
pub const DEFAULT_RHO_AB: f64 = 0.9;

/// `Y^b`: one at the winning class node `k`, zero elsewhere.
pub fn one_hot_output<T: Scalar>(k: usize, n_b: usize) -> Result<Vec<T>> {
    if k >= n_b {
        return Err(ArtError::IndexOutOfRange { index: k, len: n_b });
    }
    let mut y = vec![T::zero(); n_b];
    y[k] = T::one();
    Ok(y)
}

/// Map-field vigilance `|Y^b ^ W^ab_J| / |Y^b| > rho_ab`.
pub fn map_field_check<T: Scalar>(y_b: &[T], row: &[T], rho_ab: T) -> bool {
    let denom = art::norm(y_b);
    if denom <= T::zero() || y_b.len() != row.len() {
        return false;
    }
    art::passes(art::and_norm(y_b, row) / denom, rho_ab)
}

/// Raised input vigilance after a map-field mismatch:
/// `|A ^ W_J| / |A| + delta`.
pub fn match_track<T: Scalar>(a: &[T], w: &[T], delta: T) -> T {
    art::match_ratio(a, w) + delta
}

/// One-hot class codes learned by a fuzzy ART layer with `rho_b = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ClassDictionary<T> {
    n_classes: usize,
    net: ArtNetwork<T>,
    /// Class id encoded by each committed node.
    class_of: Vec<usize>,
}

impl<T: Scalar> ClassDictionary<T> {
    pub fn new(n_classes: usize, alpha: T) -> Result<Self> {
        if n_classes == 0 {
            return Err(ArtError::InvalidParameter("label alphabet must contain at least one class".into()));
        }
        let params = ArtParams::new(T::one(), alpha, T::one())?;
        Ok(Self { n_classes, net: ArtNetwork::new(n_classes, params)?, class_of: Vec::new() })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn network(&self) -> &ArtNetwork<T> {
        &self.net
    }

    /// Number of committed class nodes (`N_b`).
    pub fn len(&self) -> usize {
        self.net.committed_count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn class_of(&self, k: usize) -> Option<usize> {
        self.class_of.get(k).copied()
    }

    /// Runs the class through ART_b and returns its node `K`.
    pub fn resonate(&mut self, class: usize) -> Result<usize> {
        if class >= self.n_classes {
            return Err(ArtError::UnknownClass { class, classes: self.n_classes });
        }
        let target = one_hot_output::<T>(class, self.n_classes)?;
        let k = self.net.learn(&target)?;
        if k == self.class_of.len() {
            self.class_of.push(class);
        }
        debug_assert_eq!(self.class_of[k], class);
        Ok(k)
    }
}

/// Links from input prototypes to class nodes. An unlinked row behaves as the
/// all-ones weight vector and accepts any class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MapField<T> {
    links: Vec<Option<usize>>,
    pub rho_ab: T,
    pub delta: T,
}

impl<T: Scalar> MapField<T> {
    pub fn new(rho_ab: T, delta: T) -> Result<Self> {
        if !(rho_ab >= T::zero() && rho_ab <= T::one()) {
            return Err(ArtError::InvalidParameter(format!("map-field vigilance {rho_ab} must lie in [0, 1]")));
        }
        if !(delta > T::zero()) {
            return Err(ArtError::InvalidParameter(format!("match-tracking delta {delta} must be > 0")));
        }
        Ok(Self { links: Vec::new(), rho_ab, delta })
    }

    pub fn link(&self, j: usize) -> Option<usize> {
        self.links.get(j).copied().flatten()
    }

    /// `W^ab_j` as a dense row of length `n_b`.
    pub fn row(&self, j: usize, n_b: usize) -> Vec<T> {
        match self.link(j) {
            Some(k) => one_hot_output(k, n_b).unwrap_or_else(|_| vec![T::zero(); n_b]),
            None => vec![T::one(); n_b],
        }
    }

    fn set(&mut self, j: usize, k: usize) {
        if self.links.len() <= j {
            self.links.resize(j + 1, None);
        }
        self.links[j] = Some(k);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ArtmapModel<T> {
    art_a: ArtNetwork<T>,
    art_b: ClassDictionary<T>,
    map: MapField<T>,
    /// Labeled pairs absorbed by each input prototype.
    hits: Vec<u64>,
    search_depth: SearchDepth,
    stage1_nodes: usize,
}

impl<T: Scalar> ArtmapModel<T> {
    pub fn new(dim: usize, params: ArtParams<T>, n_classes: usize) -> Result<Self> {
        Self::with_map_field(dim, params, n_classes, T::of(DEFAULT_RHO_AB), T::of(DEFAULT_DELTA))
    }

    pub fn with_map_field(dim: usize, params: ArtParams<T>, n_classes: usize, rho_ab: T, delta: T) -> Result<Self> {
        Ok(Self {
            art_a: ArtNetwork::new(dim, params)?,
            art_b: ClassDictionary::new(n_classes, params.alpha)?,
            map: MapField::new(rho_ab, delta)?,
            hits: Vec::new(),
            search_depth: SearchDepth::All,
            stage1_nodes: 0,
        })
    }

    pub fn art_a(&self) -> &ArtNetwork<T> {
        &self.art_a
    }

    pub fn art_b(&self) -> &ClassDictionary<T> {
        &self.art_b
    }

    pub fn map_field(&self) -> &MapField<T> {
        &self.map
    }

    /// Learns one labeled pair with map-field vigilance and match tracking.
    pub fn train_pair_oto(&mut self, x: &[T], y: usize) -> Result<usize> {
        let a = self.art_a.code(x)?;
        let k = self.art_b.resonate(y)?;
        let j = self.resonate_consistent(&a, k)?;
        self.art_a.learn_at(j, &a)?;
        self.map.set(j, k);
        if self.hits.len() <= j {
            self.hits.resize(j + 1, 0);
        }
        self.hits[j] += 1;
        Ok(j)
    }

    /// Search for an input prototype the map field accepts for class node `k`.
    /// Vigilance only rises within the cycle and resets for the next sample.
    fn resonate_consistent(&self, a: &CodedSample<T>, k: usize) -> Result<usize> {
        let n_b = self.art_b.len();
        let y_b = one_hot_output::<T>(k, n_b)?;
        let mut rho = self.art_a.params().rho;
        let mut deactivated = Vec::new();
        loop {
            let j = self.art_a.search(a, rho, &mut deactivated);
            if j == self.art_a.uncommitted_index() {
                return Ok(j);
            }
            if map_field_check(&y_b, &self.map.row(j, n_b), self.map.rho_ab) {
                return Ok(j);
            }
            let w = &self.art_a.nodes()[j].weight;
            let raised = match_track(a.as_slice(), w, self.map.delta);
            debug_assert!(raised > rho);
            rho = raised;
            deactivated[j] = true;
        }
    }

    /// Class of the best-matching linked prototype.
    pub fn predict_oto(&self, x: &[T]) -> Result<usize> {
        self.predict_with_depth(x, SearchDepth::All)?.label.ok_or(ArtError::Untrained)
    }
}

impl<T: Scalar> SemiSupervised<T> for ArtmapModel<T> {
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
        self.train_pair_oto(x, y)
    }

    fn finalize(&mut self) {}

    fn search_depth(&self) -> SearchDepth {
        self.search_depth
    }

    fn set_search_depth(&mut self, depth: SearchDepth) {
        self.search_depth = depth;
    }

    fn node_label(&self, j: usize) -> Option<usize> {
        self.map.link(j).and_then(|k| self.art_b.class_of(k))
    }

    fn class_evidence(&self, j: usize) -> Vec<u64> {
        let mut evidence = vec![0; self.n_classes()];
        if let Some(c) = self.node_label(j) {
            evidence[c] = self.hits.get(j).copied().unwrap_or(0).max(1);
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
