//! Explicit diffeomorphisms of ℝⁿ that relocate labeled compact point sets.
//!
//! The building blocks are flows of compactly supported vector fields:
//!
//! - [`flow`]: compressions of a ball toward its center, local translations,
//!   compressions transported through a chart, and their compositions.
//! - [`transport`]: moving a small ball along a path through a chain of
//!   overlapping balls while fixing an obstacle set pointwise.
//! - [`relocation`]: compress-then-transport for several disjoint sets,
//!   target layouts for labels, and the lift/relocate/project route through
//!   ℝⁿ⁺¹ for configurations that cannot be untangled in place.
//! - [`separability`]: hard-margin certificates that the results are
//!   linearly separable.
//! - [`network`]: exact forward evaluation of narrow feed-forward networks,
//!   with two bundled weight fixtures.
//! - [`datasets`]: the toy rings, the Hopf link and the Swiss roll.
//! - [`io`]: the shared `label,x1,...,xn` CSV format.

pub mod bump;
pub mod datasets;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod network;
pub mod relocation;
pub mod separability;
pub mod transport;

pub use error::{Error, Result};
pub use geometry::{Ball, Hyperplane, LabeledCloud, LabeledDataset, Point, PointCloud};
