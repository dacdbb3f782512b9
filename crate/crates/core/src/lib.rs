//! Exact p-adic linear algebra for slope experiments near the boundary of
//! weight space: coefficient rings, weight characters, distribution modules,
//! monoid actions and Fredholm determinants.

pub mod distributions;
pub mod error;
pub mod fredholm;
pub mod iwahori;
pub mod ring;
pub mod weights;

pub use error::{HaloError, Result};
