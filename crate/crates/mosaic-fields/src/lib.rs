//! Simulation and analytics for mosaic random fields.
//!
//! A mosaic random field is built from a random number of i.i.d. random
//! closed sets in a bounded index space. The sets partition the space into
//! cells, and the field value at a point is assembled from i.i.d. value
//! streams attached to the cell containing that point. Depending on how
//! values are attached, the construction yields the classical hyperplane
//! tessellation field, the random token field, a mixture variant, the dead
//! leaves field, or a general linear-index family.
//!
//! The crate provides
//!
//! - exact, reproducible sampling of realizations on bounded subsets of
//!   ℝ^d, the unit sphere 𝕊^d, a cylinder, and the 2-torus ([`field`]),
//! - closed-form hit probabilities for the supported random set families
//!   ([`sets`]),
//! - closed-form means, mixed moments, and correlation functions, together
//!   with an exact small-n enumeration oracle and a catalog of named
//!   correlation models ([`analytics`]),
//! - Monte Carlo estimators that compare empirical correlations against
//!   the closed forms ([`estimate`]),
//! - a TOML run-configuration schema shared with the command line tool
//!   ([`config`]).
//!
//! Everything is deterministic under a single `u64` seed: random streams
//! are derived from hash-keyed substreams ([`rng`]), so a field value never
//! depends on the order in which points are queried.

// Parameter checks use `!(x > 0.0)` on purpose: the negation also rejects
// NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod config;
pub mod dist;
pub mod error;
pub mod estimate;
pub mod field;
pub mod rng;
pub mod sets;
pub mod space;
pub mod special;

pub use error::{Error, Result};
pub use rng::{Generator, StreamKey};
