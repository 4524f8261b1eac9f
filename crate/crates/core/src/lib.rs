//! Geometry of `H² × S¹` type 3-manifolds: metric models over the upper half
//! plane, geodesics with parallel frames, Jacobi and Riccati propagation along
//! them, large-scale asymptotics and a few spectral and topological
//! invariants.

// `!(x > 0.0)` is used on purpose so NaN fails validation; tensor code reads best with index loops.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asymptotics;
pub mod claims;
pub mod cli;
pub mod config;
pub mod error;
pub mod geodesic;
pub mod hyperbolic;
pub mod invariants;
pub mod jacobi;
pub mod metric;
pub mod report;
pub mod riccati;
pub mod sampling;

pub use error::{Error, Result};
