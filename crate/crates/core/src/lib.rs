//! Bichromatic rectangular visibility in the comparison model.
//!
//! Given red and blue points in the plane with distinct coordinates, two
//! points of different colors *see* each other when the open axis-aligned
//! rectangle they span is empty. This crate reports the points that see some
//! opposite-color point, and the visible red/blue pairs, with several
//! interchangeable solvers:
//!
//! - [`oracle`]: brute-force ground truth;
//! - [`baseline`]: `O(n log n)` sweeps;
//! - [`optimal`]: a pruning algorithm whose comparison count adapts to the
//!   structural entropy of the input, backed by [`crosstree`];
//! - [`adversary`]: an adversary that answers comparisons lazily and extracts
//!   a bad input permutation.
//!
//! Solvers access coordinates only through a [`compare::CoordOracle`], so the
//! number of comparisons they perform is measured exactly.

pub mod adversary;
pub mod baseline;
pub mod compare;
pub mod coord;
pub mod crosstree;
pub mod entropy;
pub mod error;
pub mod fixtures;
pub mod gen;
pub mod geom;
pub mod instance;
pub mod kdtree;
pub mod optimal;
pub mod oracle;
#[cfg(test)]
mod testutil;

pub use compare::{CoordOracle, CountingOracle, RawOracle};
pub use error::{Error, Result};
pub use geom::{Axis, Bound, Color, Orientation, PointId, SymBox};
pub use instance::{validate_instance, ColoredPoint, Instance};
