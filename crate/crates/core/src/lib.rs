//! Incremental semi-supervised classification with adaptive resonance theory.
//!
//! The crate is organised bottom-up:
//!
//! * [`art`]: complement coding, fuzzy set primitives and the unsupervised
//!   fuzzy ART network.
//! * [`mapfield`]: fuzzy ARTMAP with a one-to-one map field and match tracking.
//! * [`ssl`]: the two-stage semi-supervised model with a one-to-many
//!   association table and T-best prediction.
//! * [`ensemble`]: weighted and majority voting over independently ordered
//!   members.
//! * [`rules`]: fuzzy If-Then rule extraction from labeled prototypes.
//! * [`persist`]: versioned JSON model documents.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! below fix the scalar to `f64`, which is what the harness and CLI use.

pub mod art;
pub mod ensemble;
pub mod error;
pub mod learner;
pub mod mapfield;
pub mod persist;
pub mod rules;
pub mod scalar;
pub mod seed;
pub mod ssl;

pub use error::{ArtError, Result};
pub use learner::{Mapping, Member, NodeStats, Prediction, SearchDepth, SemiSupervised};
pub use scalar::Scalar;

pub type CodedSample = art::CodedSample<f64>;
pub type PrototypeNode = art::PrototypeNode<f64>;
pub type ArtParams = art::ArtParams<f64>;
pub type ArtNetwork = art::ArtNetwork<f64>;
pub type ArtmapModel = mapfield::ArtmapModel<f64>;
pub type SslArtModel = ssl::SslArtModel<f64>;
pub type EnsembleModel = ensemble::EnsembleModel<f64, Member<f64>>;
pub type ModelDocument = persist::ModelDocument<f64>;
pub type FuzzyRule = rules::FuzzyRule;

pub type ArtNetwork32 = art::ArtNetwork<f32>;
pub type SslArtModel32 = ssl::SslArtModel<f32>;
