//! Appendix series: derivative coefficients of `f(a e^t)`, the Lambert W
//! series for `z`, and the reciprocal and ratio expansions built on it.
//!
//! The appendix writes its series in the variable `u = t / (1 - beta)^2` with
//! `z` solving `beta z - ln z = beta - t`, i.e. the calibration root at `-t`.
//! All measured coefficients come from contour integrals of an independent
//! complex Newton solve, never from the printed series.

use crate::calibration::{check_beta, z_offset};
use crate::error::{domain, Error, Result};
use crate::operator::FunctionSpec;
use crate::oracles::{richardson_derivative, taylor_coefficients};
use crate::specfun::{eulerian2_poly, Stirling2Table};
use num_complex::Complex64;
use serde::Serialize;
use std::fmt;

pub const MAX_A3_ORDER: usize = 8;
pub const MAX_PN_ORDER: usize = 20;
pub const A4_MAX_ORDER: usize = 5;
/// Relative tolerance behind a `match` verdict.
pub const VERDICT_TOL: f64 = 1e-6;

const CONTOUR_POINTS: usize = 128;
const CONTOUR_RADIUS: f64 = 0.35;

/// Index convention for the Stirling numbers in `p_n(a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PnConvention {
    /// `sum_r S(n, r) a^r f^{(r)}(a)`
    Standard,
    /// `sum_r S(n, n - r) a^r f^{(r)}(a)`, the index as typeset
    AsPrinted,
}

/// `p_n(a) = d^n/dt^n f(a e^t)` at `t = 0` from Stirling numbers.
pub fn pn_coefficients(
    n: usize,
    f: &FunctionSpec,
    a: f64,
    convention: PnConvention,
) -> Result<f64> {
    if n == 0 {
        return Ok(f.eval(a));
    }
    if n > MAX_PN_ORDER {
        return Err(Error::MissingDerivative {
            function: f.to_string(),
            order: n,
        });
    }
    let table = Stirling2Table::new(n)?;
    let mut acc = 0.0;
    for r in 1..=n {
        let s = match convention {
            PnConvention::Standard => table.get(n, r)?,
            PnConvention::AsPrinted => table.get(n, n - r)?,
        };
        if s != 0 {
            acc += s as f64 * a.powi(r as i32) * f.derivative(a, r)?;
        }
    }
    Ok(acc)
}

/// Both conventions against a finite-difference derivative of `f(a e^t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PnReport {
    pub n: usize,
    pub a: f64,
    pub standard: f64,
    pub as_printed: f64,
    pub oracle: f64,
    pub standard_matches: bool,
    pub printed_matches: bool,
}

/// Finite differences lose about `eps / h^n`; the comparison tolerance is
/// loose enough for `n <= 6` at the default steps.
pub fn pn_report(n: usize, f: &FunctionSpec, a: f64) -> Result<PnReport> {
    let standard = pn_coefficients(n, f, a, PnConvention::Standard)?;
    let as_printed = pn_coefficients(n, f, a, PnConvention::AsPrinted)?;
    let oracle = pn_oracle(n, f, a);
    let close = |v: f64| (v - oracle).abs() <= 1e-5 * oracle.abs().max(1.0);
    Ok(PnReport {
        n,
        a,
        standard,
        as_printed,
        oracle,
        standard_matches: close(standard),
        printed_matches: close(as_printed),
    })
}

/// `d^n/dt^n f(a e^t)` at 0 by sixth-order central differences with Richardson
/// extrapolation. The base step is `1e-2` up to the third derivative and grows
/// with `n` beyond that to hold rounding near `1e-9`.
pub fn pn_oracle(n: usize, f: &FunctionSpec, a: f64) -> f64 {
    if n == 0 {
        return f.eval(a);
    }
    let h = if n <= 3 {
        1e-2
    } else {
        1e-2 * 3f64.powi(n as i32 - 3)
    };
    richardson_derivative(|t| f.eval(a * t.exp()), 0.0, n, 6, &[h, h / 2.0, h / 4.0])
}

/// Truncated Lambert W series `1 + (1-beta) sum_{n=1}^N B_{n-1}(beta) u^n / n!`
/// with `(1-beta)^2 u = t`.
pub fn a3_series(t: f64, beta: f64, order: usize) -> Result<f64> {
    check_beta(beta)?;
    if order > MAX_A3_ORDER {
        return Err(Error::UnsupportedOrder {
            order,
            max: MAX_A3_ORDER,
        });
    }
    let sigma = 1.0 - beta;
    let u = t / (sigma * sigma);
    let mut sum = 0.0;
    let mut term = 1.0;
    for n in 1..=order {
        term *= u / n as f64;
        sum += eulerian2_poly(n - 1, beta)? * term;
    }
    Ok(1.0 + sigma * sum)
}

/// `z - 1` for the appendix convention, `beta z - ln z = beta - t`.
pub fn appendix_z_offset(t: f64, beta: f64) -> Result<f64> {
    z_offset(-t, beta)
}

/// `w = z - 1` solving `beta w - ln(1 + w) = -s` for complex `s` near 0,
/// by Newton continuation along the segment from 0 so the principal sheet is kept.
fn complex_offset(s: Complex64, beta: f64) -> Complex64 {
    const STEPS: usize = 8;
    let mut w = Complex64::new(0.0, 0.0);
    for j in 1..=STEPS {
        let sj = s * (j as f64 / STEPS as f64);
        // first-order predictor from the previous point
        w += (s / STEPS as f64) / (1.0 / (1.0 + w) - beta);
        for _ in 0..60 {
            let f = beta * w - (1.0 + w).ln() + sj;
            let df = beta - 1.0 / (1.0 + w);
            let step = f / df;
            w -= step;
            if step.norm() <= 1e-17 * w.norm().max(1e-300) {
                break;
            }
        }
    }
    w
}

/// Which appendix series a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesTarget {
    A3,
    A4,
    A5,
}

impl fmt::Display for SeriesTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::A3 => "a3",
            Self::A4 => "a4",
            Self::A5 => "a5",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Match,
    Mismatch,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Match => "match",
            Self::Mismatch => "mismatch",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValidationReport {
    pub target: SeriesTarget,
    pub order: usize,
    pub printed_coefficient: f64,
    pub measured_coefficient: f64,
    pub abs_diff: f64,
    pub verdict: Verdict,
}

impl SeriesValidationReport {
    fn new(target: SeriesTarget, order: usize, printed: f64, measured: f64) -> Self {
        let abs_diff = (printed - measured).abs();
        let scale = printed.abs().max(measured.abs());
        let verdict = if abs_diff <= VERDICT_TOL * scale || abs_diff <= 1e-13 {
            Verdict::Match
        } else {
            Verdict::Mismatch
        };
        Self {
            target,
            order,
            printed_coefficient: printed,
            measured_coefficient: measured,
            abs_diff,
            verdict,
        }
    }
}

/// Printed coefficients of `u^k` in `t / ((1-beta)(z(t) - 1))`.
pub fn a4_printed(beta: f64) -> [f64; A4_MAX_ORDER + 1] {
    let b2 = beta * beta;
    [
        1.0,
        -0.5,
        2.0 * (1.0 - 4.0 * beta) / 24.0,
        -6.0 * b2 / 24.0,
        -(1.0 - 8.0 * beta + 88.0 * b2 + 144.0 * b2 * beta) / 720.0,
        -840.0 * b2 * (1.0 + 12.0 * beta + 8.0 * b2) / 40320.0,
    ]
}

/// Measured Taylor coefficients in `u` of `t / ((1-beta)(z(t) - 1))`.
pub fn a4_measured(beta: f64, count: usize) -> Result<Vec<f64>> {
    check_beta(beta)?;
    let sigma = 1.0 - beta;
    // the nearest singularity sits at |u| >= 1/2 for every beta in [0, 1)
    let radius = CONTOUR_RADIUS;
    let g = move |u: Complex64| {
        let w = complex_offset(u * sigma * sigma, beta);
        u * sigma / w
    };
    Ok(taylor_coefficients(g, radius, count, CONTOUR_POINTS))
}

/// Reports for orders `0..=max_order` of the reciprocal series.
pub fn a4_validate(beta: f64, max_order: usize) -> Result<Vec<SeriesValidationReport>> {
    if max_order > A4_MAX_ORDER {
        return Err(Error::UnsupportedOrder {
            order: max_order,
            max: A4_MAX_ORDER,
        });
    }
    let printed = a4_printed(beta);
    let measured = a4_measured(beta, max_order + 1)?;
    Ok((0..=max_order)
        .map(|k| SeriesValidationReport::new(SeriesTarget::A4, k, printed[k], measured[k]))
        .collect())
}

/// Printed terms of `(t/x)(z(x) - 1)/(z(t) - 1)`: the constant, the leading
/// correction, the `delta_1` and the `delta_2` terms.
pub fn a5_printed(x: f64, t: f64, beta: f64) -> [f64; 4] {
    let s2 = (1.0 - beta) * (1.0 - beta);
    let d = x - t;
    let delta1 = 4.0 * (1.0 + 2.0 * beta) * x - 2.0 * (1.0 - 4.0 * beta) * t;
    let delta2 = (1.0 + 8.0 * beta + 6.0 * beta * beta) * x * x
        - (1.0 - 4.0 * beta - 6.0 * beta * beta) * x * t
        + 6.0 * beta * beta * t * t;
    [
        1.0,
        d / (2.0 * s2),
        delta1 * d / (24.0 * s2 * s2),
        delta2 * d / (24.0 * s2 * s2 * s2),
    ]
}

/// `(t/x)(z(x) - 1)/(z(t) - 1)` in the appendix convention.
pub fn a5_ratio(x: f64, t: f64, beta: f64) -> Result<f64> {
    if !(x > 0.0 && t > 0.0) {
        return Err(domain(format!("ratio needs x, t > 0, got x={x}, t={t}")));
    }
    if x == t {
        return Ok(1.0);
    }
    Ok(t / x * appendix_z_offset(x, beta)? / appendix_z_offset(t, beta)?)
}

/// Homogeneous parts of the ratio along the ray `(rho x, rho t)`, evaluated at `rho = 1`.
pub fn a5_measured(x: f64, t: f64, beta: f64, count: usize) -> Result<Vec<f64>> {
    check_beta(beta)?;
    if !(x > 0.0 && t > 0.0) {
        return Err(domain(format!("ratio needs x, t > 0, got x={x}, t={t}")));
    }
    let sigma = 1.0 - beta;
    let radius = CONTOUR_RADIUS * sigma * sigma / x.max(t);
    let g = move |rho: Complex64| {
        let wx = complex_offset(rho * x, beta);
        let wt = complex_offset(rho * t, beta);
        (wx * t) / (wt * x)
    };
    Ok(taylor_coefficients(g, radius, count, CONTOUR_POINTS))
}

/// Reports for the constant, leading, `delta_1` and `delta_2` terms.
pub fn a5_validate(x: f64, t: f64, beta: f64) -> Result<Vec<SeriesValidationReport>> {
    let printed = a5_printed(x, t, beta);
    let measured = a5_measured(x, t, beta, printed.len())?;
    Ok((0..printed.len())
        .map(|k| SeriesValidationReport::new(SeriesTarget::A5, k, printed[k], measured[k]))
        .collect())
}

/// Measured Taylor coefficients in `u` of `z(t)` from the contour oracle,
/// against `(1-beta) B_{n-1}(beta) / n!`.
pub fn a3_validate(beta: f64, max_order: usize) -> Result<Vec<SeriesValidationReport>> {
    check_beta(beta)?;
    if max_order > MAX_A3_ORDER {
        return Err(Error::UnsupportedOrder {
            order: max_order,
            max: MAX_A3_ORDER,
        });
    }
    let sigma = 1.0 - beta;
    let g = move |u: Complex64| 1.0 + complex_offset(u * sigma * sigma, beta);
    let measured = taylor_coefficients(g, CONTOUR_RADIUS, max_order + 1, CONTOUR_POINTS);
    let mut out = Vec::with_capacity(max_order + 1);
    let mut fact = 1.0;
    for (n, &m) in measured.iter().enumerate() {
        let printed = if n == 0 {
            1.0
        } else {
            fact *= n as f64;
            sigma * eulerian2_poly(n - 1, beta)? / fact
        };
        out.push(SeriesValidationReport::new(SeriesTarget::A3, n, printed, m));
    }
    Ok(out)
}

/// Least-squares slope of `ln |a3_series - z| ` against `ln t`.
pub fn a3_residual_slope(beta: f64, order: usize, ts: &[f64]) -> Result<f64> {
    let mut pts = Vec::with_capacity(ts.len());
    for &t in ts {
        let exact = 1.0 + appendix_z_offset(t, beta)?;
        let r = (a3_series(t, beta, order)? - exact).abs();
        if r > 0.0 {
            pts.push((t.ln(), r.ln()));
        }
    }
    if pts.len() < 2 {
        return Err(Error::Degenerate(
            "residuals vanish; slope undefined".into(),
        ));
    }
    Ok(crate::analysis::fit_slope(&pts))
}

/// Default `t` values for the residual slope: residuals stay well above
/// rounding yet in the asymptotic regime.
pub fn a3_slope_points(beta: f64, order: usize) -> Vec<f64> {
    let s2 = (1.0 - beta) * (1.0 - beta);
    // aim for residuals between about 1e-13 and 1e-6
    let hi = (1e-6f64).powf(1.0 / (order as f64 + 1.0)).min(0.2);
    let lo = (1e-12f64).powf(1.0 / (order as f64 + 1.0));
    (0..6)
        .map(|i| s2 * hi * (lo / hi).powf(i as f64 / 5.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pn_identity_and_square() {
        let id = FunctionSpec::Monomial { m: 1 };
        let a = 1.7;
        for n in 1..=4 {
            assert!(
                (pn_coefficients(n, &id, a, PnConvention::Standard).unwrap() - a).abs() < 1e-14
            );
        }
        let sq = FunctionSpec::Monomial { m: 2 };
        let r = pn_report(3, &sq, 1.0).unwrap();
        assert_eq!(r.standard, 8.0);
        assert!((r.oracle - 8.0).abs() < 1e-6, "{}", r.oracle);
        assert!(r.standard_matches);
        let r = pn_report(1, &id, a).unwrap();
        assert!(r.standard_matches && !r.printed_matches);
        assert_eq!(r.as_printed, 0.0);
    }

    #[test]
    fn pn_exp_matches_oracle() {
        let f = FunctionSpec::ExpDecay { a: 0.5 };
        for n in 1..=5 {
            let r = pn_report(n, &f, 1.3).unwrap();
            assert!(r.standard_matches, "{r:?}");
        }
        assert!(matches!(
            pn_coefficients(21, &f, 1.0, PnConvention::Standard),
            Err(Error::MissingDerivative { .. })
        ));
    }

    #[test]
    fn a3_basics() {
        assert_eq!(a3_series(0.0, 0.3, 5).unwrap(), 1.0);
        assert!(a3_series(0.1, 0.3, 9).is_err());
        // dz/dt at 0 is 1/(1-beta) in the appendix convention
        let beta = 0.3;
        let h = 1e-6;
        let slope = (appendix_z_offset(h, beta).unwrap() - appendix_z_offset(-h, beta).unwrap())
            / (2.0 * h);
        assert!((slope - 1.0 / (1.0 - beta)).abs() < 1e-8);
        let c1 = (a3_series(h, beta, 1).unwrap() - 1.0) / h;
        assert!((c1 - 1.0 / (1.0 - beta)).abs() < 1e-9);
    }

    #[test]
    fn a3_coefficients_match_contour() {
        for &beta in &[0.0, 0.25, 0.5, 0.9] {
            for r in a3_validate(beta, 8).unwrap() {
                assert_eq!(r.verdict, Verdict::Match, "{beta}: {r:?}");
            }
        }
    }

    #[test]
    fn a3_residual_decreases_with_order() {
        let (t, beta) = (0.02, 0.4);
        let exact = 1.0 + appendix_z_offset(t, beta).unwrap();
        let mut prev = f64::INFINITY;
        for n in 1..=6 {
            let r = (a3_series(t, beta, n).unwrap() - exact).abs();
            assert!(r < prev, "N={n}: {r} !< {prev}");
            prev = r;
        }
    }

    #[test]
    fn a3_slopes() {
        for &beta in &[0.0, 0.5] {
            for n in 1..=4 {
                let s = a3_residual_slope(beta, n, &a3_slope_points(beta, n)).unwrap();
                assert!(s >= n as f64 + 0.8, "beta={beta} N={n}: slope {s}");
            }
        }
    }

    #[test]
    fn a4_reports() {
        for &beta in &[0.0, 0.1, 0.5, 0.9] {
            let reports = a4_validate(beta, 5).unwrap();
            assert_eq!(reports.len(), 6);
            assert_eq!(reports[0].verdict, Verdict::Match);
            assert_eq!(reports[1].verdict, Verdict::Match);
        }
        let r3 = a4_validate(0.5, 5).unwrap()[3];
        // oracle run: -6 beta^2 / 4! = -0.0625 at beta = 1/2
        assert!((r3.measured_coefficient + 0.0625).abs() < 1e-10, "{r3:?}");
        assert_eq!(r3.verdict, Verdict::Match);
    }

    #[test]
    fn a5_reports() {
        assert_eq!(a5_ratio(0.01, 0.01, 0.3).unwrap(), 1.0);
        let reports = a5_validate(0.02, 0.01, 0.25).unwrap();
        assert_eq!(reports[0].verdict, Verdict::Match);
        assert_eq!(reports[1].verdict, Verdict::Match);
        assert_eq!(reports[2].verdict, Verdict::Match, "{:?}", reports[2]);
        // truncation after the delta_2 term leaves O(rho^4)
        let exact = a5_ratio(0.002, 0.001, 0.25).unwrap();
        let sum: f64 = a5_printed(0.002, 0.001, 0.25).iter().sum();
        assert!((exact - sum).abs() < 1e-11, "{}", exact - sum);
    }

    #[test]
    fn a5_leading_term_gives_first_order_image_coefficient() {
        // with t = lambda/n, x = mu/n the leading correction times -mu n x
        // reproduces mu(mu - lambda)x / (2(1-beta)^2)
        let (beta, lambda, mu, xx) = (0.3, 1.0, 2.0, 0.7);
        let rho = 1e-3;
        let lead = a5_measured(mu * rho, lambda * rho, beta, 2).unwrap()[1] / rho;
        let coeff = lead * mu * xx;
        let expected = mu * (mu - lambda) * xx / (2.0 * (1.0 - beta).powi(2));
        assert!((coeff - expected).abs() <= 1e-6 * expected);
    }
}
