//! Spatial agent-based simulator of a coral-reef fishery.
// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod config;
pub mod ecology;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod par;
pub mod raster;
pub mod scenario;
pub mod world;

pub use error::{Error, Result};
