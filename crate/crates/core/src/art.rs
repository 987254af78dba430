//! Fuzzy set primitives and the unsupervised fuzzy ART network.
//!
//! A raw sample `x` in `[0, 1]^D` is complement coded into `A = (x, 1 - x)`,
//! so `|A| = D` for every input. Each prototype holds a weight vector of
//! length `2D` which, read as `(u, 1 - v)`, is the hyperbox `[u, v]`.
//!
//! Learning runs the usual search cycle: rank nodes by the choice function
//! `T_j = |A ^ W_j| / (alpha + |W_j|)`, test the winner against the vigilance
//! `|A ^ W_J| / |A| > rho`, deactivate on mismatch and repeat. When every node
//! has been rejected the trailing uncommitted node encodes the sample and a
//! fresh uncommitted node is appended.

use serde::{Deserialize, Serialize};

use crate::error::{ArtError, Result};
use crate::scalar::Scalar;

pub const DEFAULT_ALPHA: f64 = 0.001;

/// Complement-coded sample `(x, 1 - x)` of length `2D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CodedSample<T> {
    coded: Vec<T>,
}

impl<T: Scalar> CodedSample<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.coded
    }

    /// Number of raw features `D`.
    pub fn dim(&self) -> usize {
        self.coded.len() / 2
    }

    pub fn norm(&self) -> T {
        norm(&self.coded)
    }

    /// The raw half `x`.
    pub fn features(&self) -> &[T] {
        &self.coded[..self.dim()]
    }

    pub fn into_vec(self) -> Vec<T> {
        self.coded
    }
}

impl<T> AsRef<[T]> for CodedSample<T> {
    fn as_ref(&self) -> &[T] {
        &self.coded
    }
}

pub fn complement_code<T: Scalar>(x: &[T]) -> Result<CodedSample<T>> {
    let mut coded = Vec::with_capacity(2 * x.len());
    for (index, &v) in x.iter().enumerate() {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(ArtError::InputDomain { index, value: v.as_f64() });
        }
        coded.push(v);
    }
    coded.extend(x.iter().map(|&v| T::one() - v));
    Ok(CodedSample { coded })
}

/// Componentwise minimum.
pub fn fuzzy_and<T: Scalar>(a: &[T], b: &[T]) -> Result<Vec<T>> {
    check_len(a.len(), b.len())?;
    Ok(a.iter().zip(b).map(|(&x, &y)| x.min(y)).collect())
}

/// City-block norm `sum |p_i|`.
pub fn norm<T: Scalar>(p: &[T]) -> T {
    p.iter().fold(T::zero(), |acc, &v| acc + v.abs())
}

/// `|x ^ y|` without allocating.
pub fn and_norm<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x.min(y).abs())
}

/// Degree to which `y` is a fuzzy subset of `x`: `|x ^ y| / |y|`.
pub fn subsethood<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    check_len(x.len(), y.len())?;
    let denom = norm(y);
    if denom <= T::zero() {
        return Err(ArtError::DegenerateWeight);
    }
    Ok(and_norm(x, y) / denom)
}

/// Choice function `|A ^ W| / (alpha + |W|)`.
pub fn choice<T: Scalar>(a: &[T], w: &[T], alpha: T) -> T {
    and_norm(a, w) / (alpha + norm(w))
}

/// Index of the largest activation among nodes not yet deactivated.
/// Ties go to the lowest index.
pub fn select_winner<T: Scalar>(activations: &[T], deactivated: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (j, &t) in activations.iter().enumerate() {
        if deactivated.get(j).copied().unwrap_or(false) {
            continue;
        }
        match best {
            Some((_, bt)) if !(t > bt) => {}
            _ => best = Some((j, t)),
        }
    }
    best.map(|(j, _)| j)
}

/// Match ratio `|A ^ W| / |A|`.
pub fn match_ratio<T: Scalar>(a: &[T], w: &[T]) -> T {
    and_norm(a, w) / norm(a)
}

/// Strict vigilance comparison `ratio > rho`. At the ceiling `rho = 1` a
/// perfect match (`ratio = 1`) still resonates; otherwise no node could ever
/// pass and a class dictionary with `rho_b = 1` would grow without bound.
pub fn passes<T: Scalar>(ratio: T, rho: T) -> bool {
    ratio > rho || (rho == T::one() && ratio == T::one())
}

pub fn vigilance_check<T: Scalar>(a: &[T], w: &[T], rho: T) -> bool {
    passes(match_ratio(a, w), rho)
}

/// `beta (A ^ W) + (1 - beta) W`.
pub fn update_weight<T: Scalar>(a: &[T], w: &[T], beta: T) -> Vec<T> {
    debug_assert_eq!(a.len(), w.len());
    if beta == T::one() {
        return a.iter().zip(w).map(|(&x, &y)| x.min(y)).collect();
    }
    let keep = T::one() - beta;
    a.iter()
        .zip(w)
        .map(|(&x, &y)| {
            let updated = beta * x.min(y) + keep * y;
            // rounding must never push a component above its old value
            updated.min(y)
        })
        .collect()
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(ArtError::DimensionMismatch { expected, found });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ArtParams<T> {
    /// Vigilance.
    pub rho: T,
    /// Choice parameter.
    pub alpha: T,
    /// Learning rate.
    pub beta: T,
}

impl<T: Scalar> ArtParams<T> {
    pub fn new(rho: T, alpha: T, beta: T) -> Result<Self> {
        let params = Self { rho, alpha, beta };
        params.validate()?;
        Ok(params)
    }

    /// Fast learning (`beta = 1`) with the default choice parameter.
    pub fn fast(rho: T) -> Result<Self> {
        Self::new(rho, T::of(DEFAULT_ALPHA), T::one())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho >= T::zero() && self.rho <= T::one()) {
            return Err(ArtError::InvalidParameter(format!("vigilance rho = {} must lie in [0, 1]", self.rho)));
        }
        if !(self.alpha > T::zero()) || !self.alpha.is_finite() {
            return Err(ArtError::InvalidParameter(format!("choice parameter alpha = {} must be > 0", self.alpha)));
        }
        if !(self.beta > T::zero() && self.beta <= T::one()) {
            return Err(ArtError::InvalidParameter(format!("learning rate beta = {} must lie in (0, 1]", self.beta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PrototypeNode<T> {
    pub weight: Vec<T>,
    pub committed: bool,
}

impl<T: Scalar> PrototypeNode<T> {
    pub fn uncommitted(dim: usize) -> Self {
        Self { weight: vec![T::one(); 2 * dim], committed: false }
    }

    pub fn norm(&self) -> T {
        norm(&self.weight)
    }
}

/// Growable fuzzy ART layer. Node indices are creation order and never change;
/// the last node is always the single uncommitted one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ArtNetwork<T> {
    dim: usize,
    params: ArtParams<T>,
    nodes: Vec<PrototypeNode<T>>,
}

impl<T: Scalar> ArtNetwork<T> {
    pub fn new(dim: usize, params: ArtParams<T>) -> Result<Self> {
        params.validate()?;
        if dim == 0 {
            return Err(ArtError::InvalidParameter("input dimension must be positive".into()));
        }
        Ok(Self { dim, params, nodes: vec![PrototypeNode::uncommitted(dim)] })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &ArtParams<T> {
        &self.params
    }

    pub fn nodes(&self) -> &[PrototypeNode<T>] {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> Option<&PrototypeNode<T>> {
        self.nodes.get(j)
    }

    /// Total node count including the trailing uncommitted node.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.committed_count() == 0
    }

    pub fn committed_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn uncommitted_index(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn code(&self, x: &[T]) -> Result<CodedSample<T>> {
        check_len(self.dim, x.len())?;
        complement_code(x)
    }

    pub fn check_coded(&self, a: &CodedSample<T>) -> Result<()> {
        check_len(2 * self.dim, a.as_slice().len())
    }

    /// Choice value of every node, uncommitted one included.
    pub fn activations(&self, a: &CodedSample<T>) -> Vec<T> {
        self.nodes.iter().map(|n| choice(a.as_slice(), &n.weight, self.params.alpha)).collect()
    }

    /// Search cycle under vigilance `rho`, skipping nodes already marked in
    /// `deactivated` and marking every node it rejects. Returns the resonating
    /// node, or the uncommitted node once the search is exhausted.
    pub fn search(&self, a: &CodedSample<T>, rho: T, deactivated: &mut Vec<bool>) -> usize {
        deactivated.resize(self.nodes.len(), false);
        let activations = self.activations(a);
        while let Some(j) = select_winner(&activations, deactivated) {
            if vigilance_check(a.as_slice(), &self.nodes[j].weight, rho) {
                return j;
            }
            deactivated[j] = true;
        }
        self.uncommitted_index()
    }

    /// Applies the learning rule to node `j`. Learning on the uncommitted node
    /// commits it and appends a fresh one.
    pub fn learn_at(&mut self, j: usize, a: &CodedSample<T>) -> Result<usize> {
        self.check_coded(a)?;
        let len = self.nodes.len();
        let node = self.nodes.get_mut(j).ok_or(ArtError::IndexOutOfRange { index: j, len })?;
        node.weight = update_weight(a.as_slice(), &node.weight, self.params.beta);
        if !node.committed {
            node.committed = true;
            self.nodes.push(PrototypeNode::uncommitted(self.dim));
        }
        Ok(j)
    }

    /// One full search-and-learn cycle with the base vigilance.
    pub fn learn_sample(&mut self, a: &CodedSample<T>) -> Result<usize> {
        self.check_coded(a)?;
        let mut deactivated = Vec::new();
        let j = self.search(a, self.params.rho, &mut deactivated);
        self.learn_at(j, a)
    }

    pub fn learn(&mut self, x: &[T]) -> Result<usize> {
        let a = self.code(x)?;
        self.learn_sample(&a)
    }

    /// Committed nodes ordered by descending choice value, ties by index.
    pub fn rank_committed(&self, a: &CodedSample<T>) -> Vec<(usize, T)> {
        let mut ranked: Vec<(usize, T)> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.committed)
            .map(|(j, n)| (j, choice(a.as_slice(), &n.weight, self.params.alpha)))
            .collect();
        ranked.sort_by(|l, r| r.1.partial_cmp(&l.1).unwrap_or(std::cmp::Ordering::Equal));
        ranked
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    // Independent oracle: plain loops, no shared helpers.
    fn oracle_norm(v: &[f64]) -> f64 {
        let mut s = 0.0;
        for x in v {
            s += if *x < 0.0 { -*x } else { *x };
        }
        s
    }

    fn oracle_min_sum(a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..a.len() {
            s += if a[i] < b[i] { a[i] } else { b[i] };
        }
        s
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < EPS)
    }

    #[test]
    fn complement_code_examples() {
        let a = complement_code(&[0.2, 0.7]).unwrap();
        assert!(close(a.as_slice(), &[0.2, 0.7, 0.8, 0.3]));
        let a = complement_code(&[0.0, 1.0]).unwrap();
        assert_eq!(a.as_slice(), &[0.0, 1.0, 1.0, 0.0]);
        let a = complement_code(&[0.5, 0.5, 0.5]).unwrap();
        assert_eq!(a.as_slice(), &[0.5; 6]);
        assert_eq!(a.norm(), 3.0);
    }

    #[test]
    fn complement_code_rejects_out_of_domain() {
        assert!(matches!(complement_code(&[0.2, 1.5]), Err(ArtError::InputDomain { index: 1, .. })));
        assert!(matches!(complement_code(&[-0.1]), Err(ArtError::InputDomain { index: 0, .. })));
        assert!(complement_code(&[f64::NAN]).is_err());
    }

    #[test]
    fn fuzzy_and_examples() {
        assert!(close(&fuzzy_and(&[0.2, 0.8], &[0.5, 0.3]).unwrap(), &[0.2, 0.3]));
        let a = [0.1, 0.9, 0.4];
        assert_eq!(fuzzy_and(&a, &a).unwrap(), a.to_vec());
        assert_eq!(fuzzy_and(&a, &[1.0; 3]).unwrap(), a.to_vec());
        assert!(matches!(fuzzy_and(&a, &[1.0; 2]), Err(ArtError::DimensionMismatch { .. })));
    }

    #[test]
    fn norm_examples() {
        assert!((norm::<f64>(&[0.2, 0.7, 0.8, 0.3]) - 2.0).abs() < EPS);
        assert_eq!(norm::<f64>(&[]), 0.0);
        let p: [f64; 4] = [0.1, 0.5, 0.6, 0.3];
        assert!((norm(&p) - 1.5).abs() < EPS);
        assert!((norm(&p) - oracle_norm(&p)).abs() < EPS);
    }

    #[test]
    fn subsethood_examples() {
        let a = complement_code(&[0.3, 0.6]).unwrap();
        assert!((subsethood::<f64>(a.as_slice(), a.as_slice()).unwrap() - 1.0).abs() < EPS);
        let w: [f64; 4] = [0.1, 0.5, 0.6, 0.3];
        assert!((subsethood(&[1.0; 4], &w).unwrap() - 1.0).abs() < EPS);
        let x = [0.2, 0.7, 0.8, 0.3];
        let expected = oracle_min_sum(&x, &w) / oracle_norm(&w);
        assert!((expected - 1.0).abs() < EPS);
        assert!((subsethood(&x, &w).unwrap() - expected).abs() < EPS);
        assert!(matches!(subsethood(&x, &[0.0; 4]), Err(ArtError::DegenerateWeight)));
    }

    #[test]
    fn choice_examples() {
        let a = complement_code(&[0.2, 0.7]).unwrap();
        let t: f64 = choice(a.as_slice(), &[1.0; 4], 0.001);
        assert!((t - 2.0 / 4.001).abs() < EPS);
        assert!((t - 0.49988).abs() < 1e-5);

        let w: [f64; 4] = [0.1, 0.5, 0.6, 0.3];
        let t = choice(a.as_slice(), &w, 0.001);
        let expected = oracle_min_sum(a.as_slice(), &w) / (0.001 + oracle_norm(&w));
        assert!((t - expected).abs() < EPS);
        assert!((t - 0.99933).abs() < 1e-5);

        // conservative limit approaches subsethood of W in A
        let t0 = choice(a.as_slice(), &w, 1e-9);
        assert!((t0 - subsethood(a.as_slice(), &w).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn choice_is_finite_for_zero_weight() {
        let a = complement_code(&[0.2, 0.7]).unwrap();
        assert_eq!(choice(a.as_slice(), &[0.0; 4], 0.001), 0.0);
    }

    #[test]
    fn select_winner_examples() {
        assert_eq!(select_winner(&[0.3, 0.9, 0.5], &[]), Some(1));
        assert_eq!(select_winner(&[0.9, 0.9], &[false, false]), Some(0));
        assert_eq!(select_winner(&[0.3, 0.9], &[true, true]), None);
        assert_eq!(select_winner(&[0.3, 0.9, 0.5], &[false, true, false]), Some(2));
    }

    #[test]
    fn vigilance_examples() {
        let a = complement_code(&[0.2, 0.7]).unwrap();
        assert!(vigilance_check(a.as_slice(), &[1.0; 4], 0.99));
        let w: [f64; 4] = [0.1, 0.5, 0.6, 0.3];
        let ratio = oracle_min_sum(a.as_slice(), &w) / oracle_norm(a.as_slice());
        assert!((ratio - 0.75).abs() < EPS);
        assert!(vigilance_check(a.as_slice(), &w, 0.7));
        assert!(!vigilance_check(a.as_slice(), &w, 0.75));
    }

    #[test]
    fn vigilance_ceiling_accepts_only_perfect_match() {
        let a = complement_code(&[0.2, 0.7]).unwrap();
        assert!(vigilance_check(a.as_slice(), a.as_slice(), 1.0));
        assert!(!vigilance_check(a.as_slice(), a.as_slice(), 1.001));
        assert!(!vigilance_check(a.as_slice(), &[0.1, 0.5, 0.6, 0.3], 1.0));
    }

    #[test]
    fn update_weight_examples() {
        let a = [0.2, 0.7, 0.8, 0.3];
        let w = [0.4, 0.6, 1.0, 0.3];
        assert_eq!(update_weight(&a, &w, 1.0), fuzzy_and(&a, &w).unwrap());
        assert_eq!(update_weight(&a, &[1.0; 4], 1.0), a.to_vec());
        // oracle: 0.5 * min + 0.5 * w, computed elementwise by hand
        let mut expected = [0.0; 4];
        for i in 0..4 {
            let m = if a[i] < w[i] { a[i] } else { w[i] };
            expected[i] = 0.5 * m + 0.5 * w[i];
        }
        assert!(close(&expected, &[0.3, 0.6, 0.9, 0.3]));
        assert!(close(&update_weight(&a, &w, 0.5), &expected));
    }

    #[test]
    fn params_validation() {
        assert!(ArtParams::new(0.9, 0.001, 1.0).is_ok());
        assert!(ArtParams::new(1.1, 0.001, 1.0).is_err());
        assert!(ArtParams::new(0.5, 0.0, 1.0).is_err());
        assert!(ArtParams::new(0.5, 0.001, 0.0).is_err());
        assert!(ArtParams::new(0.5, 0.001, 1.5).is_err());
    }

    #[test]
    fn first_sample_commits_node_zero() {
        let mut net = ArtNetwork::new(2, ArtParams::fast(0.5).unwrap()).unwrap();
        assert_eq!(net.len(), 1);
        assert!(net.is_empty());
        let a = complement_code(&[0.3, 0.8]).unwrap();
        assert_eq!(net.learn_sample(&a).unwrap(), 0);
        assert_eq!(net.len(), 2);
        assert_eq!(net.nodes()[0].weight, a.as_slice().to_vec());
        assert!(net.nodes()[0].committed);
        assert!(!net.nodes()[1].committed);
    }

    #[test]
    fn repeated_sample_is_stable() {
        let mut net = ArtNetwork::new(2, ArtParams::fast(0.9).unwrap()).unwrap();
        net.learn(&[0.3, 0.8]).unwrap();
        let before = net.clone();
        assert_eq!(net.learn(&[0.3, 0.8]).unwrap(), 0);
        assert_eq!(net, before);
    }

    #[test]
    fn separated_samples_get_separate_nodes() {
        let x1 = complement_code(&[0.1, 0.1]).unwrap();
        let x2 = complement_code(&[0.9, 0.9]).unwrap();
        // oracle check of the fixture: cross match ratio below rho
        assert!(oracle_min_sum(x1.as_slice(), x2.as_slice()) / 2.0 < 0.9);
        let mut net = ArtNetwork::new(2, ArtParams::fast(0.9).unwrap()).unwrap();
        assert_eq!(net.learn_sample(&x1).unwrap(), 0);
        assert_eq!(net.learn_sample(&x2).unwrap(), 1);
        assert_eq!(net.committed_count(), 2);
    }

    #[test]
    fn memorization_mode_at_full_vigilance() {
        let mut net = ArtNetwork::new(1, ArtParams::fast(1.0).unwrap()).unwrap();
        for x in [0.1, 0.2, 0.1, 0.3, 0.2] {
            net.learn(&[x]).unwrap();
        }
        assert_eq!(net.committed_count(), 3);
    }

    #[test]
    fn learn_rejects_wrong_dimension() {
        let mut net = ArtNetwork::new(3, ArtParams::fast(0.5).unwrap()).unwrap();
        assert!(matches!(net.learn(&[0.1, 0.2]), Err(ArtError::DimensionMismatch { .. })));
    }

    #[test]
    fn rank_committed_orders_by_choice() {
        let mut net = ArtNetwork::new(1, ArtParams::fast(0.95).unwrap()).unwrap();
        net.learn(&[0.1]).unwrap();
        net.learn(&[0.9]).unwrap();
        net.learn(&[0.5]).unwrap();
        let a = net.code(&[0.8]).unwrap();
        let order: Vec<usize> = net.rank_committed(&a).into_iter().map(|(j, _)| j).collect();
        assert_eq!(order, vec![1, 2, 0]);
    }
}
