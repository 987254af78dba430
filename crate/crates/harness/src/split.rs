//! Seeded labeled / unlabeled / test partitions.

use log::warn;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sslart::seed::rng_from;

use crate::dataset::Dataset;
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_frac: f64,
    /// Share of the training part that keeps its labels.
    pub labeled_frac: f64,
    /// Share of the training part used without labels.
    pub unlabeled_frac: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { test_frac: 0.2, labeled_frac: 0.25, unlabeled_frac: 0.75, seed: 0 }
    }
}

impl SplitSpec {
    /// The labeled pool takes whatever the unlabeled pool leaves.
    pub fn with_labeled(test_frac: f64, labeled_frac: f64, seed: u64) -> Self {
        Self { test_frac, labeled_frac, unlabeled_frac: 1.0 - labeled_frac, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| HarnessError::Config(format!("{what} fraction {v} out of range"));
        if !(0.0..1.0).contains(&self.test_frac) {
            return Err(bad("test", self.test_frac));
        }
        if !(self.labeled_frac > 0.0 && self.labeled_frac <= 1.0) {
            return Err(bad("labeled", self.labeled_frac));
        }
        if !(0.0..=1.0).contains(&self.unlabeled_frac) {
            return Err(bad("unlabeled", self.unlabeled_frac));
        }
        if self.labeled_frac + self.unlabeled_frac > 1.0 + 1e-9 {
            return Err(HarnessError::Config(format!(
                "labeled ({}) and unlabeled ({}) fractions exceed the training set",
                self.labeled_frac, self.unlabeled_frac
            )));
        }
        Ok(())
    }

    /// `(labeled, unlabeled, test)` sizes for `n` samples.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let test = ((self.test_frac * n as f64).round() as usize).min(n);
        let train = n - test;
        let labeled = ((self.labeled_frac * train as f64).round() as usize).min(train);
        let unlabeled = ((self.unlabeled_frac * train as f64).round() as usize).min(train - labeled);
        (labeled, unlabeled, test)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub labeled: Vec<(Vec<f64>, usize)>,
    pub unlabeled: Vec<Vec<f64>>,
    pub test: Vec<(Vec<f64>, usize)>,
    /// Dataset rows behind each pool, in pool order.
    pub labeled_idx: Vec<usize>,
    pub unlabeled_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
}

/// Shuffles the row order with `spec.seed`, then takes the test pool, the
/// labeled pool and the unlabeled pool in that order.
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<Split> {
    spec.validate()?;
    let (n_lab, n_unl, n_test) = spec.sizes(ds.len());
    if n_lab == 0 {
        return Err(HarnessError::Config(format!("labeled pool is empty for {} samples", ds.len())));
    }
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.shuffle(&mut rng_from(spec.seed));
    let test_idx = order[..n_test].to_vec();
    let labeled_idx = order[n_test..n_test + n_lab].to_vec();
    let unlabeled_idx = order[n_test + n_lab..n_test + n_lab + n_unl].to_vec();

    let mut seen = vec![false; ds.n_classes()];
    for &i in &labeled_idx {
        seen[ds.labels[i]] = true;
    }
    for (c, present) in seen.iter().enumerate() {
        if !present {
            warn!("class `{}` has no labeled sample; it cannot be predicted", ds.class_names[c]);
        }
    }
    Ok(Split {
        labeled: labeled_idx.iter().map(|&i| ds.sample(i)).collect(),
        unlabeled: unlabeled_idx.iter().map(|&i| ds.features[i].clone()).collect(),
        test: test_idx.iter().map(|&i| ds.sample(i)).collect(),
        labeled_idx,
        unlabeled_idx,
        test_idx,
    })
}
