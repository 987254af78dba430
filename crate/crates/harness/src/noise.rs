//! Label flips and additive Gaussian feature noise.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use sslart::seed::rng_from;

use crate::error::{HarnessError, Result};

fn chosen(n: usize, frac: f64, rng: &mut impl Rng) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&frac) {
        return Err(HarnessError::Config(format!("noise fraction {frac} out of [0, 1]")));
    }
    let k = (frac * n as f64).floor() as usize;
    let mut idx = sample(rng, n, k.min(n)).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// Replaces the label of `floor(frac * n)` distinct samples with a uniformly
/// drawn different class. Returns the flipped positions.
pub fn inject_label_noise(pool: &mut [(Vec<f64>, usize)], n_classes: usize, frac: f64, seed: u64) -> Result<Vec<usize>> {
    if n_classes < 2 {
        return Err(HarnessError::Config("label noise needs at least two classes".into()));
    }
    let mut rng = rng_from(seed);
    let idx = chosen(pool.len(), frac, &mut rng)?;
    for &i in &idx {
        let old = pool[i].1;
        let shift = rng.random_range(1..n_classes);
        pool[i].1 = (old + shift) % n_classes;
    }
    Ok(idx)
}

/// Mean of squared values per feature.
pub fn signal_power(pool: &[Vec<f64>]) -> Vec<f64> {
    let d = pool.first().map_or(0, Vec::len);
    let mut p = vec![0.0; d];
    for x in pool {
        for (acc, v) in p.iter_mut().zip(x) {
            *acc += v * v;
        }
    }
    let n = pool.len().max(1) as f64;
    p.iter_mut().for_each(|v| *v /= n);
    p
}

/// Adds zero-mean Gaussian noise with per-feature variance `power / snr` to
/// `floor(frac * n)` distinct samples and clamps them back into `[0, 1]`.
/// Returns the perturbed positions.
pub fn inject_feature_noise(pool: &mut [Vec<f64>], frac: f64, snr: f64, seed: u64) -> Result<Vec<usize>> {
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(HarnessError::Config(format!("signal-to-noise ratio must be positive, got {snr}")));
    }
    let mut rng = rng_from(seed);
    let idx = chosen(pool.len(), frac, &mut rng)?;
    if idx.is_empty() {
        return Ok(idx);
    }
    let noise: Vec<Normal<f64>> = signal_power(pool)
        .into_iter()
        .map(|p| Normal::new(0.0, (p / snr).sqrt()).expect("finite non-negative std"))
        .collect();
    for &i in &idx {
        for (v, dist) in pool[i].iter_mut().zip(&noise) {
            *v = (*v + dist.sample(&mut rng)).clamp(0.0, 1.0);
        }
    }
    Ok(idx)
}
