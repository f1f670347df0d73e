//! Exponential-preserving Szasz-Mirakyan-Jain operators.
//!
//! The operator `R_n^(beta)(f; x) = sum_k L_k^(beta)(n alpha_n(x)) f(k/n)` runs
//! over the Jain (generalized Poisson) basis with a rate `alpha_n(x)` chosen
//! through the Lambert W function so that `e^{-lambda t}` is reproduced
//! exactly. The crate provides the calibration, series evaluation with
//! controlled truncation, closed-form moments, the appendix series and the
//! convergence machinery, plus the `smj` command-line harness.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod calibration;
pub mod cli;
pub mod error;
pub mod expansions;
pub mod moments;
pub mod operator;
pub mod oracles;
pub mod specfun;
pub mod verify;

pub use calibration::{alpha_n, calibrate, solve_z, z_offset, CalibrationResult, OperatorParams};
pub use error::{Error, Result};
pub use operator::{apply, build_weights, FunctionSpec, TruncationPolicy, WeightSeries};
