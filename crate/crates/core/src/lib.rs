//! Syntactic code metrics for C/C++ functions.

pub mod corpus;
pub mod error;
pub mod learner;
pub mod metrics;
pub mod query;
pub mod studies;
pub mod syntax;

pub use error::{Error, Result};
