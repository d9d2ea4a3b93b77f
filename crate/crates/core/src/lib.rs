//! Online no-substitution k-means for arbitrary arrival order.
//!
//! Points arrive one at a time and each must be irrevocably taken or skipped
//! as a center before the next point is seen. This crate implements the
//! online selection algorithm (offline solve, cluster merge, mass-weighted
//! sampling), the order-complexity machinery built on (alpha, k)-sequences,
//! exact small-instance oracles used to validate it, synthetic data
//! generators, and a seeded experiment harness.

pub mod datagen;
pub mod diameter;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod metric;
pub mod online;
pub mod oracle;
pub mod point;
pub mod sequence;
pub mod solver;
pub mod tol;

pub use error::{Error, Result};
pub use point::{Dataset, Point};
