//! Random unit-speed planar curves with pinned endpoints, built from a
//! dyadic random walk of chord corrections, plus Monte Carlo checks of the
//! walk's distributional properties.
//!
//! Negated float comparisons such as `!(x > 0.0)` are used on purpose so
//! that NaN is rejected along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bitsource;
pub mod cli;
pub mod dyadic;
pub mod error;
pub mod export;
pub mod path;
pub mod reparam;
pub mod schedule;
pub mod stats;
pub mod vec;
pub mod walk;
