use thiserror::Error;

use crate::ring::RingTag;

pub type Result<T> = std::result::Result<T, HaloError>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HaloError {
    #[error("invalid prime {0}: p must be an odd prime")]
    InvalidPrime(u64),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("not a unit: {0}")]
    NonUnit(String),
    #[error("ring mismatch: {0:?} vs {1:?}")]
    RingMismatch(RingTag, RingTag),
    #[error("X-exponent {exponent} falls outside the window [{n_min}, {n_max}]")]
    WindowOverflow { exponent: i64, n_min: i64, n_max: i64 },
    #[error("point outside the domain of specialization: {0}")]
    PointOutsideDomain(String),
    #[error("precision loss: {0}")]
    PrecisionLoss(String),
    #[error("residue is zero mod p")]
    ZeroResidue,
    #[error("argument is not congruent to 1 mod p")]
    NotOneUnit,
    #[error("argument is not a p-adic unit")]
    NonUnitArgument,
    #[error("radius order violated: {0}")]
    RadiusOrder(String),
    #[error("truncation mismatch: {0}")]
    TruncationMismatch(String),
    #[error("transformed argument leaves pZp at sample {0}")]
    DomainEscape(usize),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("entry ({row}, {col}) has ON-valuation {found} below the proven bound {bound}")]
    NormViolation { row: usize, col: usize, found: i64, bound: i64 },
    #[error("block index {0} out of range for {1} blocks")]
    BlockIndexOutOfRange(usize, usize),
    #[error("invalid operator spec: {0}")]
    InvalidSpec(String),
    #[error("uncertified input: {0}")]
    UncertifiedInput(String),
    #[error("precision target unreachable: {0}")]
    PrecisionTargetUnreachable(String),
    #[error("coefficient {0} could lie below the hull but its valuation is not certified")]
    UncertifiedVertexCandidate(usize),
    #[error("no polygon vertex separates slopes <= {0}")]
    NoSeparatingVertex(String),
    #[error("kernel has dimension {found}, expected {expected}")]
    KernelDimensionMismatch { expected: usize, found: usize },
    #[error("uncertified value: {0}")]
    Uncertified(String),
}
