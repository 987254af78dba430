use rand::Rng;
use serde::Serialize;
use sslart::seed::rng_from;

use crate::error::{HarnessError, Result};

pub const DEFAULT_RESAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Percentile bootstrap interval for the mean.
pub fn bootstrap_ci(values: &[f64], level: f64, resamples: usize, seed: u64) -> Result<Interval> {
    if values.len() < 2 {
        return Err(HarnessError::Data(format!("bootstrap needs at least 2 values, got {}", values.len())));
    }
    if !(level > 0.0 && level < 1.0) || resamples == 0 {
        return Err(HarnessError::Config(format!("bad bootstrap settings: level {level}, {resamples} resamples")));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut rng = rng_from(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let at = |q: f64| means[((q * resamples as f64).floor() as usize).min(resamples - 1)];
    // resampled means of a constant list can differ from `mean` in the last ulp
    Ok(Interval { mean, lo: at(tail).min(mean), hi: at(1.0 - tail).max(mean) })
}
