//! Small two-dimensional benchmark sets.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use sslart::seed::rng_from;

use crate::dataset::{normalize, Dataset};
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// Two unit-variance blobs whose centres lie `separation` standard
    /// deviations apart, each truncated to its own side of the midline.
    TwoGaussians,
    /// Concentric rings of radius 1 and 2 with Gaussian radial jitter.
    Rings,
    /// Uniform points in the unit square labeled by quadrant parity, with
    /// Gaussian jitter added after labeling.
    Xor,
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SyntheticKind::TwoGaussians => "two-gaussians",
            SyntheticKind::Rings => "rings",
            SyntheticKind::Xor => "xor",
        })
    }
}

impl FromStr for SyntheticKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-gaussians" | "gaussians" => Ok(SyntheticKind::TwoGaussians),
            "rings" => Ok(SyntheticKind::Rings),
            "xor" => Ok(SyntheticKind::Xor),
            _ => Err(HarnessError::Config(format!("unknown synthetic set `{s}` (two-gaussians, rings, xor)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticParams {
    /// Distance between Gaussian centres in standard deviations.
    pub separation: f64,
    /// Jitter standard deviation for rings and xor.
    pub noise: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self { separation: 3.0, noise: 0.05 }
    }
}

/// `n` samples, classes alternating, normalized to the unit square.
pub fn make_synthetic(kind: SyntheticKind, n: usize, params: SyntheticParams, seed: u64) -> Result<Dataset> {
    if n < 4 {
        return Err(HarnessError::Config(format!("synthetic sets need n >= 4, got {n}")));
    }
    if !(params.noise >= 0.0 && params.noise.is_finite()) || !(params.separation > 0.0 && params.separation.is_finite()) {
        return Err(HarnessError::Config(format!("bad synthetic parameters {params:?}")));
    }
    let mut rng = rng_from(seed);
    let jitter = Normal::new(0.0, params.noise).expect("finite non-negative std");
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 2;
        let point = match kind {
            SyntheticKind::TwoGaussians => {
                let side = if c == 0 { -1.0 } else { 1.0 };
                let centre = side * params.separation / 2.0;
                let x = loop {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    let x = centre + z;
                    if x * side > 0.0 {
                        break x;
                    }
                };
                let y: f64 = StandardNormal.sample(&mut rng);
                vec![x, y]
            }
            SyntheticKind::Rings => {
                let r = (1.0 + c as f64) + jitter.sample(&mut rng);
                let t = rng.random_range(0.0..TAU);
                vec![r * t.cos(), r * t.sin()]
            }
            SyntheticKind::Xor => {
                let (x, y) = loop {
                    let x: f64 = rng.random();
                    let y: f64 = rng.random();
                    if usize::from((x > 0.5) != (y > 0.5)) == c {
                        break (x, y);
                    }
                };
                vec![x + jitter.sample(&mut rng), y + jitter.sample(&mut rng)]
            }
        };
        features.push(point);
        labels.push(c);
    }
    let ranges = normalize(&mut features);
    Ok(Dataset {
        name: kind.to_string(),
        feature_names: vec!["x1".into(), "x2".into()],
        class_names: vec!["class_0".into(), "class_1".into()],
        features,
        labels,
        ranges,
    })
}
