//! Special functions and exact combinatorial tables.
//!
//! Everything here is pure; the tables are plain values that can be shared
//! freely across threads once built.

mod combinatorics;
mod gamma;
mod lambert;

pub use combinatorics::{
    eulerian2, eulerian2_poly, stirling2, Eulerian2Triangle, Stirling2Table, DEFAULT_EULERIAN2_MAX,
    DEFAULT_STIRLING2_MAX,
};
pub use gamma::{ln_factorial, log_gamma, poisson_deviance, stirling_error};
pub use lambert::{lambert_w0, WResult, BRANCH_POINT, LAMBERT_MAX_ITERATIONS};
