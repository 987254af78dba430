//! Versioned JSON model documents.
//!
//! A document records the input dimension, class and feature names, the
//! feature ranges used for min-max scaling and either a single model or an
//! ensemble. Floats are written in shortest round-trip form, so saving and
//! loading reproduces every weight bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleModel;
use crate::error::{ArtError, Result};
use crate::learner::{Member, SemiSupervised};
use crate::scalar::Scalar;

pub const FORMAT: &str = "sslart-model";
pub const VERSION: u32 = 1;

/// Per-feature `[min, max]` of the data the model was fitted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanges {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", tag = "kind", rename_all = "lowercase")]
pub enum StoredModel<T> {
    Single { member: Member<T> },
    Ensemble { ensemble: EnsembleModel<T, Member<T>> },
}

impl<T: Scalar> StoredModel<T> {
    pub fn dim(&self) -> usize {
        match self {
            StoredModel::Single { member } => member.dim(),
            StoredModel::Ensemble { ensemble } => ensemble.dim(),
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            StoredModel::Single { member } => member.n_classes(),
            StoredModel::Ensemble { ensemble } => ensemble.n_classes(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ModelDocument<T> {
    pub format: String,
    pub version: u32,
    pub dim: usize,
    pub class_names: Vec<String>,
    pub feature_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_ranges: Option<FeatureRanges>,
    /// Free-form run metadata (seed, split fractions, dataset name, ...).
    #[serde(default)]
    pub provenance: BTreeMap<String, String>,
    pub model: StoredModel<T>,
}

impl<T: Scalar> ModelDocument<T> {
    pub fn new(model: StoredModel<T>, class_names: Vec<String>, feature_names: Vec<String>) -> Result<Self> {
        let doc = Self {
            format: FORMAT.to_string(),
            version: VERSION,
            dim: model.dim(),
            class_names,
            feature_names,
            feature_ranges: None,
            provenance: BTreeMap::new(),
            model,
        };
        doc.validate()?;
        Ok(doc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != FORMAT {
            return Err(ArtError::Document(format!("unexpected format `{}`", self.format)));
        }
        if self.version != VERSION {
            return Err(ArtError::Document(format!("unsupported version {} (this build reads {VERSION})", self.version)));
        }
        if self.model.dim() != self.dim {
            return Err(ArtError::Document(format!("header dimension {} but model dimension {}", self.dim, self.model.dim())));
        }
        if self.feature_names.len() != self.dim {
            return Err(ArtError::Document(format!("{} feature names for dimension {}", self.feature_names.len(), self.dim)));
        }
        if self.class_names.len() != self.model.n_classes() {
            return Err(ArtError::Document(format!(
                "{} class names for {} classes",
                self.class_names.len(),
                self.model.n_classes()
            )));
        }
        if let Some(r) = &self.feature_ranges {
            if r.min.len() != self.dim || r.max.len() != self.dim {
                return Err(ArtError::Document("feature ranges do not match the dimension".into()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
