//! Calibration of the rate function `alpha_n(x) = c_n x` so that the operator
//! reproduces `e^{-lambda x}` exactly.
//!
//! `z(t, beta)` is the root in `(0, 1]` of `beta z - ln z = beta + t`, i.e.
//! `z = -W_0(-beta e^{-beta - t}) / beta`. The scale is
//! `c_n = -lambda / (n (z(lambda/n, beta) - 1))`, with the analytic limit
//! `1 - beta` at `lambda = 0`.

use crate::error::{domain, Error, Result};
use crate::specfun::lambert_w0;
use serde::Serialize;

/// Below this value of `lambda / n` the scale uses its two-term expansion.
pub const SMALL_RATE_SWITCH: f64 = 1e-12;

const OFFSET_MAX_ITERATIONS: usize = 60;

/// One operator instance `(n, beta, lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorParams {
    pub n: u64,
    pub beta: f64,
    pub lambda: f64,
}

impl OperatorParams {
    pub fn new(n: u64, beta: f64, lambda: f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("n must be a positive integer"));
        }
        check_beta(beta)?;
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(domain(format!(
                "lambda must be finite and >= 0, got {lambda}"
            )));
        }
        Ok(Self { n, beta, lambda })
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// Same `(beta, lambda)` with a different `n`.
    pub fn with_n(&self, n: u64) -> Result<Self> {
        Self::new(n, self.beta, self.lambda)
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&beta) {
        return Err(domain(format!("beta must lie in [0, 1), got {beta}")));
    }
    Ok(())
}

/// Solved calibration for one parameter triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationResult {
    /// `z(lambda / n, beta)`
    pub z: f64,
    /// `z - 1`, carried separately because `c_n` divides by it.
    pub z_offset: f64,
    /// `c_n` with `alpha_n(x) = c_n x`.
    pub c_n: f64,
}

impl CalibrationResult {
    pub fn alpha(&self, x: f64) -> f64 {
        self.c_n * x
    }
}

/// `z(t, beta)` through the principal Lambert branch.
pub fn solve_z(t: f64, beta: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(domain(format!("solve_z requires finite t >= 0, got {t}")));
    }
    check_beta(beta)?;
    if beta == 0.0 {
        return Ok((-t).exp());
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let w = lambert_w0(-beta * (-beta - t).exp())?;
    Ok(-w.value / beta)
}

/// Lower limit on `s` for which `z_offset(s, beta)` stays on the principal branch.
pub fn offset_domain_limit(beta: f64) -> f64 {
    if beta == 0.0 {
        f64::NEG_INFINITY
    } else {
        beta.ln() + 1.0 - beta
    }
}

/// `z - 1` where `beta z - ln z = beta + s`, accurate to full relative
/// precision as `s -> 0`.
///
/// Negative `s` is allowed down to the branch point `ln beta + 1 - beta`,
/// which is where the series in `s` live. The Lambert value seeds a Newton
/// solve of `beta w - ln(1 + w) = s`.
pub fn z_offset(s: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if !s.is_finite() {
        return Err(domain(format!("z_offset requires finite s, got {s}")));
    }
    if beta == 0.0 {
        return Ok((-s).exp_m1());
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    if s < offset_domain_limit(beta) {
        return Err(domain(format!(
            "s = {s} is past the branch point for beta = {beta}"
        )));
    }
    let seed = -lambert_w0(-beta * (-beta - s).exp())?.value / beta - 1.0;
    let mut w = seed;
    for _ in 0..OFFSET_MAX_ITERATIONS {
        let g = beta * w - w.ln_1p() - s;
        let dg = beta - 1.0 / (1.0 + w);
        if dg == 0.0 {
            break;
        }
        let step = g / dg;
        let next = w - step;
        // keep the iterate on the same side of the branch point
        if !(next > -1.0) {
            break;
        }
        w = next;
        if step.abs() <= 1e-16 * w.abs() {
            return Ok(w);
        }
    }
    if w.is_finite() {
        Ok(w)
    } else {
        Err(Error::NonConvergence {
            what: "z_offset",
            iterations: OFFSET_MAX_ITERATIONS,
        })
    }
}

/// Solve for `z` and `c_n`.
pub fn calibrate(params: &OperatorParams) -> Result<CalibrationResult> {
    let OperatorParams { beta, lambda, .. } = *params;
    let nf = params.nf();
    let sigma = 1.0 - beta;
    if lambda == 0.0 {
        return Ok(CalibrationResult {
            z: 1.0,
            z_offset: 0.0,
            c_n: sigma,
        });
    }
    let t = lambda / nf;
    let z = solve_z(t, beta)?;
    let z_offset = z_offset(t, beta)?;
    let c_n = if t < SMALL_RATE_SWITCH {
        let v = t / (sigma * sigma);
        sigma * (1.0 + 0.5 * v)
    } else {
        -lambda / (nf * z_offset)
    };
    if !(c_n > 0.0) || !c_n.is_finite() {
        return Err(Error::Degenerate(format!(
            "calibration scale {c_n} for {params:?}"
        )));
    }
    Ok(CalibrationResult { z, z_offset, c_n })
}

/// `alpha_n(x) = c_n x` for `x >= 0`.
pub fn alpha_n(params: &OperatorParams, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(domain(format!("x must be finite and >= 0, got {x}")));
    }
    Ok(calibrate(params)?.alpha(x))
}
