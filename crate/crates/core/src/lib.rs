//! Multi-criteria ship risk classification built on the Deck of Cards Method:
//! card-based interval scales, swing weights, additive aggregation and
//! rule-plus-cutoff sorting into three risk categories.

pub mod error;
pub mod exact;
pub mod exec;
pub mod framework;
pub mod io;
pub mod risk;
pub mod robustness;
pub mod scale;
pub mod weights;

pub use error::{Error, Result};
pub use exact::Exact;
pub use exec::Execution;
