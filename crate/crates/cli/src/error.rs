use std::fmt;

use harness::HarnessError;
use sslart::ArtError;

/// A failure with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration; exit 1.
    Usage(String),
    /// Unreadable or incompatible data or model files; exit 2.
    Data(String),
    /// A model broke one of its own invariants; exit 3.
    Invariant(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Invariant(m) => write!(f, "internal invariant violated: {m}"),
        }
    }
}

impl From<ArtError> for CliError {
    fn from(e: ArtError) -> Self {
        let m = e.to_string();
        match e {
            ArtError::InvalidParameter(_) | ArtError::Configuration(_) => CliError::Usage(m),
            ArtError::CorruptedWeight { .. } | ArtError::DegenerateWeight | ArtError::IndexOutOfRange { .. } | ArtError::Untrained => {
                CliError::Invariant(m)
            }
            _ => CliError::Data(m),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Art(a) => a.into(),
            HarnessError::Config(_) | HarnessError::Schema(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
