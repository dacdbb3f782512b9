//! Coefficient rings: truncated Q_p, Z_p[[X]], the boundary annulus ring and
//! F_p((X)), with Gauss valuations and tracked precision.

mod config;
mod point;
mod scalar;
mod series;
mod special;
mod valuation;

pub use config::{is_prime, PrimeConfig};
pub use point::WeightPoint;
pub use scalar::PadicScalar;
pub use series::{arith, gauss_valuation, specialize, ArithOp, BoundarySeriesElem, RingTag};
pub use special::{binomials, plog, teichmuller};
pub(crate) use special::ilog;
pub use valuation::ValuationResult;
