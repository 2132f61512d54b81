//! Exact computations with δ-discretized subsets of `[0,1]`.
//!
//! Sets live on the dyadic grid `2^{-q}·Z` as sorted integer indices, so
//! every count is exact. Constants that involve `r^s` are returned as
//! [`Surd`]s and compared exactly.

pub mod branching;
pub mod constructions;
pub mod error;
pub mod exact;
pub mod extraction;
pub mod gridset;
pub mod prooftrace;
pub mod regularity;
pub mod sumproduct;

pub use error::{Error, Result};
pub use exact::{parse_rational, Rational, Surd};
pub use gridset::{DyadicInterval, GridSet, PairSet, ScaleParams};
