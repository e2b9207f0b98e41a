//! Weighted Max-Cut workbench: instances, three solver families and the
//! statistics used to compare them.

pub mod error;
pub mod ga;
pub mod gnn;
pub mod instance;
pub mod metrics;
pub mod rng;
pub mod suite;
pub mod tn;

pub use error::{Error, Result};
pub use instance::{CutAssignment, QuboMatrix, WeightedGraph};
