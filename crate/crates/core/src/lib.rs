//! Curvature invariants of minimal submanifolds in spheres, the commutator
//! inequalities they rest on, and pinching-threshold checks evaluated on
//! exact model submanifolds and random instances.

// Tensor code indexes several arrays per loop; `!(x > 0.0)` rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod analyzer;
pub mod digest;
pub mod error;
pub mod extremal;
pub mod immersion;
pub mod ineq;
pub mod matcore;
pub mod models;

pub use error::{Error, Result};
