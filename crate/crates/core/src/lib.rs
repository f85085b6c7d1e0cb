//! Risk certification for decisions designed from sampled scenarios.
//!
//! The crate solves the one- and two-sided bound equations in log space,
//! extracts support lists and instrumental complexities from scenario
//! programs, and builds certified envelopes for cost distributions. Two
//! control case studies are bundled under [`problems`].

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cdf;
pub mod error;
pub mod format;
pub mod lp;
pub mod problems;
pub mod rng;
pub mod scenario;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
