//! Monotonic neural additive models.

pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod feature_net;
pub mod model;
pub mod monotonicity;
pub mod simulation;
pub mod svg;
pub mod trainer;

pub use error::{Error, Result};
