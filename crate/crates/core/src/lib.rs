//! Expansive self-maps of metric spaces: classification, exhaustive checks on
//! finite spaces, the dial set on the unit circle, sparse sets in unbounded
//! spaces, and closed-form example spaces.

// `!(x > 0.0)` is deliberate: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod dial;
pub mod error;
pub mod expansion;
pub mod gallery;
pub mod harness;
pub mod metric;
pub mod sparse;
pub mod suites;

pub use error::{Error, Result};
