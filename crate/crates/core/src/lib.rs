//! Exact enumeration, saddle-point asymptotics and random generation of
//! weighted sets and multisets of clusters.
//!
//! A weight sequence `c_k` counts the clusters of size `k`. Sets of clusters
//! are generated by `S(x) = exp(C(x))`, multisets by the Euler transform
//! `G(x) = exp(sum_j C(x^j)/j)`. The crate computes their coefficients
//! exactly, estimates them by the saddle-point method, samples uniform
//! cluster structures, and checks the limit laws of the number of clusters
//! and of the extreme cluster sizes.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod harness;
pub mod logspace;
pub mod saddle;
pub mod sampling;
pub mod series;
pub mod special;
pub mod weights;

pub use error::{Error, Result};
pub use series::{LogSeries, Model};
pub use weights::{SlowFactor, WeightSequence, WeightSpec};
