//! Numerics for Carleson measures of Bergman spaces and uniformly discrete
//! sequences, with the unit ball of `ℂⁿ` as the exactly computable model.
//!
//! Volumes are normalized so that the unit ball has measure one.

pub mod ball;
pub mod bergman;
pub mod domains;
pub mod error;
pub mod integrate;
pub mod invariant;
pub mod measures;
pub mod point;
pub mod report;
pub mod sequences;

pub use error::{Error, Result};
pub use point::Point;
pub use report::{CheckReport, Verdict};
