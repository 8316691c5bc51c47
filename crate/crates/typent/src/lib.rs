//! Dual-engine simulator of ensembles of quantum states built from layers of
//! Haar-random local two-qudit gates.
//!
//! The [`algebra`] engine evolves formal sums of subset permutation operators
//! and extracts exact ensemble-average purities; the [`mc`] engine samples
//! explicit circuits on state vectors and aggregates statistics. Both compute
//! the same ensemble average wherever a model is expressible in both, and
//! [`closed_form`] carries the analytic reference values used to validate
//! them.

pub mod algebra;
pub mod closed_form;
pub mod error;
pub mod graph;
pub mod mc;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{Edge, EdgeDistribution, QuditGraph, Subset};
