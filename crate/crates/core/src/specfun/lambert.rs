//! Principal branch of the Lambert W function on `[-1/e, inf)`.
//!
//! The seed is chosen by regime: a Puiseux series in `p = sqrt(2(e x + 1))`
//! near the branch point, a short Taylor series around the origin, a
//! Winitzki-type log form in the middle range and the de Bruijn asymptotic
//! for large arguments. Halley iteration then refines the seed; for `x > e`
//! it runs on `w + ln w = ln x` so that `e^w` never overflows.

use crate::error::{Error, Result};
use std::f64::consts::E;

/// `-1/e` rounded to the nearest double (slightly below the true value).
pub const BRANCH_POINT: f64 = -0.367_879_441_171_442_33;

/// Iteration cap for Halley refinement.
pub const LAMBERT_MAX_ITERATIONS: usize = 50;

// 1/e = INV_E_HI + INV_E_LO
const INV_E_HI: f64 = 0.367_879_441_171_442_33;
const INV_E_LO: f64 = -1.242_875_367_278_836_3e-17;

// Arguments this far below -1/e are treated as rounding noise and clamped.
const BRANCH_SLACK: f64 = 1e-16;

const RESIDUAL_REL_TOL: f64 = 1e-14;
const STEP_REL_TOL: f64 = 1e-15;

/// A value of `W_0(x)` together with its certified residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WResult {
    pub value: f64,
    /// `|W e^W - x|`
    pub residual: f64,
    pub iterations: usize,
}

/// Principal branch `W_0(x)` for `x >= -1/e`.
pub fn lambert_w0(x: f64) -> Result<WResult> {
    if x.is_nan() {
        return Err(Error::Domain("lambert_w0 of NaN".into()));
    }
    if x == f64::INFINITY {
        return Ok(WResult {
            value: f64::INFINITY,
            residual: 0.0,
            iterations: 0,
        });
    }
    // distance to the branch point, evaluated without cancellation
    let offset = (x + INV_E_HI) + INV_E_LO;
    if offset < -BRANCH_SLACK {
        return Err(Error::Domain(format!(
            "lambert_w0 requires x >= -1/e, got {x:e}"
        )));
    }
    if offset <= 0.0 {
        return Ok(WResult {
            value: -1.0,
            residual: (x - BRANCH_POINT).abs(),
            iterations: 0,
        });
    }
    if x == 0.0 {
        return Ok(WResult {
            value: 0.0,
            residual: 0.0,
            iterations: 0,
        });
    }
    if x.abs() < 1e-8 {
        // W(x) = x - x^2 + 3/2 x^3 - ..., truncation below 1e-32 relative
        let value = x * (1.0 - x * (1.0 - 1.5 * x));
        return Ok(certify(x, value, 0));
    }
    if x > E {
        refine_log_form(x)
    } else {
        refine_direct(x)
    }
}

fn branch_series(offset: f64) -> f64 {
    let p = (2.0 * E * offset).sqrt();
    const C: [f64; 10] = [
        -1.0,
        1.0,
        -1.0 / 3.0,
        11.0 / 72.0,
        -43.0 / 540.0,
        769.0 / 17280.0,
        -221.0 / 8505.0,
        680_863.0 / 43_545_600.0,
        -1963.0 / 204_120.0,
        226_287_557.0 / 37_623_398_400.0,
    ];
    C.iter().rev().fold(0.0, |acc, &c| acc * p + c)
}

fn refine_direct(x: f64) -> Result<WResult> {
    let offset = (x + INV_E_HI) + INV_E_LO;
    let mut w = if x < -0.25 {
        branch_series(offset)
    } else if x.abs() < 0.05 {
        x * (1.0 - x * (1.0 - x * (1.5 - x * 8.0 / 3.0)))
    } else {
        let l = x.ln_1p();
        l * (1.0 - l.ln_1p() / (2.0 + l))
    };
    let tol = f64::EPSILON * x.abs();
    for it in 1..=LAMBERT_MAX_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= tol {
            return Ok(certify(x, w, it - 1));
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        if !step.is_finite() {
            return Ok(certify(x, w, it - 1));
        }
        w -= step;
        if step.abs() <= STEP_REL_TOL * w.abs() {
            return Ok(certify(x, w, it));
        }
    }
    finish(x, w)
}

fn refine_log_form(x: f64) -> Result<WResult> {
    let lx = x.ln();
    let l2 = lx.ln();
    let mut w = lx - l2 + l2 / lx + l2 * (l2 - 2.0) / (2.0 * lx * lx);
    for it in 1..=LAMBERT_MAX_ITERATIONS {
        let g = w + w.ln() - lx;
        let g1 = 1.0 + 1.0 / w;
        let g2 = -1.0 / (w * w);
        let step = g / (g1 - g * g2 / (2.0 * g1));
        w -= step;
        if step.abs() <= STEP_REL_TOL * w.abs() || g == 0.0 {
            return Ok(certify_log(x, lx, w, it));
        }
    }
    let r = certify_log(x, lx, w, LAMBERT_MAX_ITERATIONS);
    if r.residual <= RESIDUAL_REL_TOL * x {
        Ok(r)
    } else {
        Err(Error::NonConvergence {
            what: "lambert_w0",
            iterations: LAMBERT_MAX_ITERATIONS,
        })
    }
}

fn certify(x: f64, w: f64, iterations: usize) -> WResult {
    WResult {
        value: w,
        residual: (w * w.exp() - x).abs(),
        iterations,
    }
}

fn certify_log(x: f64, lx: f64, w: f64, iterations: usize) -> WResult {
    // w e^w - x = x (exp(w + ln w - ln x) - 1); stays finite near f64::MAX
    let residual = x * (w + w.ln() - lx).exp_m1().abs();
    WResult {
        value: w,
        residual,
        iterations,
    }
}

fn finish(x: f64, w: f64) -> Result<WResult> {
    let r = certify(x, w, LAMBERT_MAX_ITERATIONS);
    if r.residual <= RESIDUAL_REL_TOL * x.abs().max(1e-300) {
        Ok(r)
    } else {
        Err(Error::NonConvergence {
            what: "lambert_w0",
            iterations: LAMBERT_MAX_ITERATIONS,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_points() {
        assert_eq!(lambert_w0(0.0).unwrap().value, 0.0);
        let w = lambert_w0(E).unwrap();
        assert!((w.value - 1.0).abs() < 1e-15, "{w:?}");
        assert_eq!(lambert_w0(-1.0 / E).unwrap().value, -1.0);
        assert_eq!(lambert_w0(BRANCH_POINT).unwrap().value, -1.0);
    }

    #[test]
    fn rejects_below_branch_point() {
        assert!(matches!(lambert_w0(-0.37), Err(Error::Domain(_))));
        assert!(matches!(
            lambert_w0(BRANCH_POINT - 1e-15),
            Err(Error::Domain(_))
        ));
        assert!(lambert_w0(f64::NAN).is_err());
    }

    #[test]
    fn inverts_w_exp_w() {
        for &w in &[
            -0.999_999, -0.99, -0.7, -0.3, -1e-5, 1e-6, 0.2, 0.9, 1.5, 3.0, 11.0, 100.0, 700.0,
        ] {
            let x = w * f64::exp(w);
            let r = lambert_w0(x).unwrap();
            let tol = if w < -0.99 { 1e-7 } else { 1e-14 };
            assert!(
                (r.value - w).abs() <= tol * w.abs().max(1e-300),
                "w={w} got {}",
                r.value
            );
        }
    }

    #[test]
    fn close_to_branch_point() {
        for k in 1..12 {
            let x = BRANCH_POINT + 10f64.powi(-k);
            let r = lambert_w0(x).unwrap();
            assert!(r.value >= -1.0 && r.value < 0.0);
            assert!(
                r.residual <= 1e-14 * x.abs(),
                "x={x:e} residual {:e}",
                r.residual
            );
        }
    }

    #[test]
    fn huge_arguments() {
        let r = lambert_w0(1e300).unwrap();
        assert!(r.residual <= 1e-14 * 1e300);
        assert!((r.value + r.value.ln() - 1e300f64.ln()).abs() < 1e-13);
    }
}
