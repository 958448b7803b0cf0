//! Exact-arithmetic workbench for designing and judging frequentist
//! inference methods over finite parameter spaces.
//!
//! Everything is computed with arbitrary-precision rationals: error
//! probabilities world by world, optimal test construction, achievability of
//! reliability standards, and estimator comparisons. No floating point is
//! involved anywhere on an authoritative path.

pub mod construct;
pub mod error;
pub mod estimation;
pub mod hierarchy;
pub mod lp;
pub mod oracle;
pub mod ratio;
pub mod testkit;
pub mod worlds;

pub use error::{Error, Result};
pub use ratio::Ratio;
