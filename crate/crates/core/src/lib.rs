//! Multi-dimensional online calibration.
//!
//! `TreeCal` forecasts over a convex domain by assigning each node of an H-ary
//! depth-L tree the running mean of its elder siblings' outcomes and predicting
//! the uniform mixture along the current root-to-leaf path. Around it sit exact
//! calibration and swap-regret metrics, Bregman scoring, reductions between
//! calibration and swap regret, and an experiment harness.

// `!(x >= 0.0)` style checks are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversaries;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod reductions;
pub mod scoring;

pub use error::{Error, Result};
