//! Weighted-voting and majority-voting ensembles of semi-supervised ART
//! members.
//!
//! Members differ only in the order in which they see the training samples.
//! For weighted voting each member scores itself per class on a held-out
//! validation slice of the labeled pool (`We_c = NCS_c / TNS_c`, the member's
//! recall on class `c`), votes `We_c` for the class it predicts, and the class
//! with the highest summed score wins.

use std::fmt;
use std::marker::PhantomData;
use std::str::FromStr;

use log::warn;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{ArtError, Result};
use crate::learner::{NodeStats, SearchDepth, SemiSupervised};
use crate::scalar::Scalar;
use crate::seed::{derive_seed, rng_from};

pub const DEFAULT_VALIDATION_FRAC: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Voting {
    Weighted,
    Majority,
}

impl fmt::Display for Voting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Voting::Weighted => "weighted",
            Voting::Majority => "majority",
        })
    }
}

impl FromStr for Voting {
    type Err = ArtError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "weighted" => Ok(Voting::Weighted),
            "majority" => Ok(Voting::Majority),
            other => Err(ArtError::InvalidParameter(format!("unknown voting rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub members: usize,
    pub voting: Voting,
    /// Fraction of the labeled pool each member holds out for its class
    /// weights. Zero scores members on the full labeled pool instead.
    pub validation_frac: f64,
    pub search_depth: SearchDepth,
    /// When false every member uses the master seed, so all are identical.
    pub diversify: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            members: 7,
            voting: Voting::Weighted,
            validation_frac: DEFAULT_VALIDATION_FRAC,
            search_depth: SearchDepth::All,
            diversify: true,
        }
    }
}

/// Per-class recall of `member` on `validation`. A class with no validation
/// samples gets weight zero.
pub fn compute_class_weights<T, M>(member: &M, validation: &[(Vec<T>, usize)], n_classes: usize) -> Result<Vec<T>>
where
    T: Scalar,
    M: SemiSupervised<T> + ?Sized,
{
    let mut total = vec![0usize; n_classes];
    let mut correct = vec![0usize; n_classes];
    for (x, y) in validation {
        if *y >= n_classes {
            return Err(ArtError::UnknownClass { class: *y, classes: n_classes });
        }
        total[*y] += 1;
        if member.predict(x)?.label == Some(*y) {
            correct[*y] += 1;
        }
    }
    Ok((0..n_classes)
        .map(|c| {
            if total[c] == 0 {
                warn!("class {c} has no validation samples; its ensemble weight is 0");
                T::zero()
            } else {
                T::of(correct[c] as f64 / total[c] as f64)
            }
        })
        .collect())
}

/// `We_c` at the predicted class, zero elsewhere; all zero on abstention.
pub fn member_vote<T: Scalar>(prediction: Option<usize>, weights: &[T]) -> Vec<T> {
    let mut vote = vec![T::zero(); weights.len()];
    if let Some(c) = prediction {
        if let Some(slot) = vote.get_mut(c) {
            *slot = weights[c];
        }
    }
    vote
}

/// Sums the weighted votes (prediction scores).
pub fn prediction_scores<T: Scalar>(votes: &[Vec<T>], n_classes: usize) -> Vec<T> {
    let mut ps = vec![T::zero(); n_classes];
    for vote in votes {
        for (acc, &v) in ps.iter_mut().zip(vote) {
            *acc = *acc + v;
        }
    }
    ps
}

/// Combines member outputs. Only classes some member predicted are
/// candidates; ties go to the lowest class index; `None` when every member
/// abstains.
pub fn aggregate<T: Scalar>(predictions: &[Option<usize>], votes: &[Vec<T>], n_classes: usize, voting: Voting) -> Option<usize> {
    let mut candidates = vec![false; n_classes];
    for c in predictions.iter().flatten() {
        if *c < n_classes {
            candidates[*c] = true;
        }
    }
    let score: Vec<T> = match voting {
        Voting::Weighted => prediction_scores(votes, n_classes),
        Voting::Majority => {
            let mut counts = vec![T::zero(); n_classes];
            for c in predictions.iter().flatten() {
                if *c < n_classes {
                    counts[*c] = counts[*c] + T::one();
                }
            }
            counts
        }
    };
    let mut best: Option<(usize, T)> = None;
    for c in (0..n_classes).filter(|&c| candidates[c]) {
        match best {
            Some((_, s)) if !(score[c] > s) => {}
            _ => best = Some((c, score[c])),
        }
    }
    best.map(|(c, _)| c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar, M: Serialize", deserialize = "T: Scalar, M: DeserializeOwned"))]
pub struct EnsembleModel<T, M> {
    members: Vec<M>,
    /// `class_weights[m][c]`.
    class_weights: Vec<Vec<T>>,
    voting: Voting,
    n_classes: usize,
    #[serde(skip)]
    _scalar: PhantomData<T>,
}

impl<T: Scalar, M: SemiSupervised<T>> EnsembleModel<T, M> {
    pub fn from_parts(members: Vec<M>, class_weights: Vec<Vec<T>>, voting: Voting) -> Result<Self> {
        let first = members.first().ok_or_else(|| ArtError::InvalidParameter("ensemble needs at least one member".into()))?;
        let n_classes = first.n_classes();
        if class_weights.len() != members.len() {
            return Err(ArtError::DimensionMismatch { expected: members.len(), found: class_weights.len() });
        }
        for row in &class_weights {
            if row.len() != n_classes {
                return Err(ArtError::DimensionMismatch { expected: n_classes, found: row.len() });
            }
            if row.iter().any(|w| !(*w >= T::zero() && *w <= T::one())) {
                return Err(ArtError::InvalidParameter("class weights must lie in [0, 1]".into()));
            }
        }
        Ok(Self { members, class_weights, voting, n_classes, _scalar: PhantomData })
    }

    pub fn members(&self) -> &[M] {
        &self.members
    }

    pub fn class_weights(&self) -> &[Vec<T>] {
        &self.class_weights
    }

    pub fn voting(&self) -> Voting {
        self.voting
    }

    pub fn set_voting(&mut self, voting: Voting) {
        self.voting = voting;
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn set_search_depth(&mut self, depth: SearchDepth) {
        for m in &mut self.members {
            m.set_search_depth(depth);
        }
    }

    pub fn node_stats(&self) -> Vec<NodeStats> {
        self.members.iter().map(|m| m.node_stats()).collect()
    }

    pub fn member_predictions(&self, x: &[T]) -> Result<Vec<Option<usize>>> {
        self.members.iter().map(|m| m.predict(x).map(|p| p.label)).collect()
    }

    /// Prediction score of every class for `x`.
    pub fn scores(&self, x: &[T]) -> Result<Vec<T>> {
        let predictions = self.member_predictions(x)?;
        Ok(prediction_scores(&self.votes(&predictions), self.n_classes))
    }

    pub fn predict(&self, x: &[T]) -> Result<Option<usize>> {
        let predictions = self.member_predictions(x)?;
        let votes = self.votes(&predictions);
        Ok(aggregate(&predictions, &votes, self.n_classes, self.voting))
    }

    fn votes(&self, predictions: &[Option<usize>]) -> Vec<Vec<T>> {
        predictions.iter().zip(&self.class_weights).map(|(p, w)| member_vote(*p, w)).collect()
    }
}

/// Stratified hold-out of roughly `frac` of each class. Classes with a single
/// sample stay entirely in training.
fn holdout<T: Clone, R: rand::Rng>(
    labeled: &[(Vec<T>, usize)],
    n_classes: usize,
    frac: f64,
    rng: &mut R,
) -> (Vec<(Vec<T>, usize)>, Vec<(Vec<T>, usize)>) {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, (_, y)) in labeled.iter().enumerate() {
        if *y < n_classes {
            by_class[*y].push(i);
        }
    }
    let mut is_validation = vec![false; labeled.len()];
    for idx in &mut by_class {
        idx.shuffle(rng);
        let n = idx.len();
        if n < 2 {
            continue;
        }
        let take = ((frac * n as f64).round() as usize).clamp(1, n - 1);
        for &i in &idx[..take] {
            is_validation[i] = true;
        }
    }
    let mut train = Vec::new();
    let mut validation = Vec::new();
    for (i, pair) in labeled.iter().enumerate() {
        if is_validation[i] {
            validation.push(pair.clone());
        } else {
            train.push(pair.clone());
        }
    }
    (train, validation)
}

/// Trains one member on its own shuffled sample order and scores it.
pub fn train_member<T, M>(
    mut member: M,
    labeled: &[(Vec<T>, usize)],
    unlabeled: &[Vec<T>],
    validation_frac: f64,
    depth: SearchDepth,
    seed: u64,
) -> Result<(M, Vec<T>)>
where
    T: Scalar,
    M: SemiSupervised<T>,
{
    let n_classes = member.n_classes();
    let mut rng = rng_from(seed);
    let mut order: Vec<&Vec<T>> = unlabeled.iter().collect();
    order.shuffle(&mut rng);
    for x in order {
        member.pretrain_sample(x)?;
    }
    let (mut train, validation) = if validation_frac > 0.0 {
        holdout(labeled, n_classes, validation_frac, &mut rng)
    } else {
        (labeled.to_vec(), labeled.to_vec())
    };
    train.shuffle(&mut rng);
    member.train_all(&train)?;
    member.finalize();
    member.set_search_depth(depth);
    let weights = compute_class_weights(&member, &validation, n_classes)?;
    Ok((member, weights))
}

/// Trains `config.members` members in parallel. Member `m` draws its sample
/// order from a seed derived from `master_seed` and `m`, so the result does
/// not depend on scheduling.
pub fn train_ensemble<T, M, F>(
    labeled: &[(Vec<T>, usize)],
    unlabeled: &[Vec<T>],
    config: &EnsembleConfig,
    master_seed: u64,
    make_member: F,
) -> Result<EnsembleModel<T, M>>
where
    T: Scalar,
    M: SemiSupervised<T> + Send,
    F: Fn() -> Result<M> + Sync,
{
    if config.members == 0 {
        return Err(ArtError::InvalidParameter("ensemble needs at least one member".into()));
    }
    if !(0.0..1.0).contains(&config.validation_frac) {
        return Err(ArtError::InvalidParameter(format!("validation fraction {} must lie in [0, 1)", config.validation_frac)));
    }
    let trained: Vec<(M, Vec<T>)> = (0..config.members)
        .into_par_iter()
        .map(|m| {
            let seed = if config.diversify { derive_seed(master_seed, m as u64) } else { master_seed };
            train_member(make_member()?, labeled, unlabeled, config.validation_frac, config.search_depth, seed)
        })
        .collect::<Result<_>>()?;
    let (members, weights): (Vec<M>, Vec<Vec<T>>) = trained.into_iter().unzip();
    EnsembleModel::from_parts(members, weights, config.voting)
}
