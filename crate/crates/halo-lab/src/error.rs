use thiserror::Error;

use halo_core::HaloError;

pub type LabResult<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config invalid: {0}")]
    Config(String),
    #[error("{stage} failed: {source}")]
    Compute { stage: &'static str, source: HaloError },
    #[error("operator entry bound violated: {0}")]
    EntryBound(HaloError),
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Check(CheckFailure),
}

/// A mathematical assertion that failed after the report was written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CheckFailure {
    #[error("lambda bound violated")]
    Lambda,
    #[error("factorization residual is not zero")]
    Residual,
    #[error("slope lists disagree across points")]
    SlopeAgreement,
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Compute { .. } => 3,
            LabError::Io { .. } => 4,
            LabError::EntryBound(_) => 11,
            LabError::Check(CheckFailure::Lambda) => 10,
            LabError::Check(CheckFailure::Residual) => 12,
            LabError::Check(CheckFailure::SlopeAgreement) => 13,
        }
    }
}

pub(crate) fn at(stage: &'static str) -> impl Fn(HaloError) -> LabError {
    move |source| LabError::Compute { stage, source }
}
