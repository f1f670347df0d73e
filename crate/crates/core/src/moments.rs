//! Closed-form raw, central and exponentially weighted moments, plus the
//! limit constants of the rescaled central moments.
//!
//! With `s = 1 - beta` and `alpha = alpha_n(x)` the basis is a generalized
//! Poisson law in `k` with mean `n alpha / s` and variance `n alpha / s^3`.
//! Tilting by `e^{-mu t}` keeps the family: the weighted law is again
//! generalized Poisson with `alpha -> alpha z_mu`, `beta -> beta z_mu`, scaled
//! by `R_n(e^{-mu t}; x)`. The weighted moments reuse the central formulas
//! under that substitution.

use crate::calibration::{calibrate, z_offset, CalibrationResult, OperatorParams};
use crate::error::{domain, Error, Result};
use crate::operator::{apply, FunctionSpec, TruncationPolicy};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

pub const MAX_MOMENT_ORDER: usize = 5;
pub const MAX_WEIGHTED_ORDER: usize = 4;

/// Relative tolerance between the direct central forms and the binomial
/// recombination of raw moments, measured against the size of the
/// recombined terms.
pub const BINOMIAL_PATH_TOL: f64 = 1e-12;

fn check_order(m: usize, max: usize) -> Result<()> {
    if m > max {
        return Err(Error::UnsupportedOrder { order: m, max });
    }
    Ok(())
}

fn check_x(x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(domain(format!("x must be finite and >= 0, got {x}")));
    }
    Ok(())
}

/// Raw moment `R_n(t^m; x)` of a generalized Poisson law with rate `alpha`.
pub fn raw_moment_from(alpha: f64, beta: f64, n: f64, m: usize) -> Result<f64> {
    check_order(m, MAX_MOMENT_ORDER)?;
    let s = 1.0 - beta;
    let a = alpha / s;
    let b2 = beta * beta;
    let v = match m {
        0 => 1.0,
        1 => a,
        2 => a * a + alpha / (n * s.powi(3)),
        3 => {
            a.powi(3)
                + 3.0 * alpha * alpha / (n * s.powi(4))
                + (1.0 + 2.0 * beta) * alpha / (n * n * s.powi(5))
        }
        4 => {
            a.powi(4)
                + 6.0 * alpha.powi(3) / (n * s.powi(5))
                + (7.0 + 8.0 * beta) * alpha * alpha / (n * n * s.powi(6))
                + (1.0 + 8.0 * beta + 6.0 * b2) * alpha / (n.powi(3) * s.powi(7))
        }
        _ => {
            a.powi(5)
                + 10.0 * alpha.powi(4) / (n * s.powi(6))
                + 5.0 * (5.0 + 4.0 * beta) * alpha.powi(3) / (n * n * s.powi(7))
                + 15.0 * (1.0 + 4.0 * beta + 2.0 * b2) * alpha * alpha / (n.powi(3) * s.powi(8))
                + (1.0 + 22.0 * beta + 58.0 * b2 + 24.0 * b2 * beta) * alpha
                    / (n.powi(4) * s.powi(9))
        }
    };
    Ok(v)
}

/// Central moment `R_n((t - x)^m; x)` in the direct form, for a law with
/// rate `alpha`, parameter `beta` and mean offset `d = alpha / (1 - beta) - x`.
pub fn central_moment_from(alpha: f64, beta: f64, n: f64, x: f64, d: f64, m: usize) -> Result<f64> {
    check_order(m, MAX_MOMENT_ORDER)?;
    let s = 1.0 - beta;
    let b2 = beta * beta;
    let var = alpha / (n * s.powi(3));
    let v = match m {
        0 => 1.0,
        1 => d,
        2 => d * d + var,
        3 => d.powi(3) + 3.0 * var * d + (1.0 + 2.0 * beta) * alpha / (n * n * s.powi(5)),
        4 => {
            let a5 = alpha / (n * n * s.powi(5));
            d.powi(4)
                + 6.0 * var * d * d
                + (7.0 + 8.0 * beta) * a5 * d
                + (1.0 + 8.0 * beta + 6.0 * b2) * alpha / (n.powi(3) * s.powi(7))
                + 3.0 * a5 * x
        }
        _ => {
            let mu1 = (5.0 + 4.0 * beta) * d + 3.0 * x;
            let mu2 = 3.0 * (1.0 + 4.0 * beta + 2.0 * b2) * d + 2.0 * (1.0 + 2.0 * beta) * x;
            d.powi(5)
                + 10.0 * var * d.powi(3)
                + 5.0 * alpha / (n * n * s.powi(5)) * d * mu1
                + 5.0 * alpha / (n.powi(3) * s.powi(7)) * mu2
                + (1.0 + 22.0 * beta + 58.0 * b2 + 24.0 * b2 * beta) * alpha
                    / (n.powi(4) * s.powi(9))
        }
    };
    Ok(v)
}

/// `alpha_n(x) / (1 - beta) - x`, formed as `x (c_n / (1 - beta) - 1)`.
fn mean_offset(cal: &CalibrationResult, beta: f64, x: f64) -> f64 {
    x * (cal.c_n / (1.0 - beta) - 1.0)
}

/// `R_n(t^m; x)` for `m <= 5`.
pub fn raw_moment(params: &OperatorParams, x: f64, m: usize) -> Result<f64> {
    check_order(m, MAX_MOMENT_ORDER)?;
    check_x(x)?;
    let cal = calibrate(params)?;
    raw_moment_from(cal.alpha(x), params.beta, params.nf(), m)
}

/// `R_n((t - x)^m; x)` for `m <= 5`, direct form.
pub fn central_moment(params: &OperatorParams, x: f64, m: usize) -> Result<f64> {
    check_order(m, MAX_MOMENT_ORDER)?;
    check_x(x)?;
    let cal = calibrate(params)?;
    let d = mean_offset(&cal, params.beta, x);
    central_moment_from(cal.alpha(x), params.beta, params.nf(), x, d, m)
}

/// Central moment through `sum_k (-1)^k C(m,k) x^k R_n(t^{m-k}; x)`.
///
/// Returns the value together with `sum_k C(m,k) x^k |R_n(t^{m-k}; x)|`,
/// the scale of the cancellation it suffers.
pub fn central_moment_binomial(params: &OperatorParams, x: f64, m: usize) -> Result<(f64, f64)> {
    check_order(m, MAX_MOMENT_ORDER)?;
    check_x(x)?;
    let cal = calibrate(params)?;
    let alpha = cal.alpha(x);
    let mut value = 0.0;
    let mut scale = 0.0;
    let mut binom = 1.0;
    for k in 0..=m {
        let term =
            binom * x.powi(k as i32) * raw_moment_from(alpha, params.beta, params.nf(), m - k)?;
        value += if k % 2 == 0 { term } else { -term };
        scale += term.abs();
        binom = binom * (m - k) as f64 / (k + 1) as f64;
    }
    Ok((value, scale))
}

/// Direct central moment, verified against the binomial path.
pub fn central_moment_checked(params: &OperatorParams, x: f64, m: usize) -> Result<f64> {
    let direct = central_moment(params, x, m)?;
    let (binomial, scale) = central_moment_binomial(params, x, m)?;
    if (direct - binomial).abs() > BINOMIAL_PATH_TOL * scale.max(direct.abs()) {
        return Err(Error::Degenerate(format!(
            "central moment m={m}: direct {direct:e} vs binomial {binomial:e}"
        )));
    }
    Ok(direct)
}

/// Fourth central moment with the last term exactly as typeset in the
/// source (`3 alpha / (n^2 (1-beta)^5)`, no factor `x`). Only used to report
/// how far that reading is from the recombined value.
pub fn central4_as_typeset(params: &OperatorParams, x: f64) -> Result<f64> {
    check_x(x)?;
    let cal = calibrate(params)?;
    let (alpha, beta, n) = (cal.alpha(x), params.beta, params.nf());
    let s = 1.0 - beta;
    let d = mean_offset(&cal, beta, x);
    Ok(d.powi(4)
        + 6.0 * alpha / (n * s.powi(3)) * d * d
        + (7.0 + 8.0 * beta) * alpha / (n * n * s.powi(5)) * d
        + (1.0 + 8.0 * beta + 6.0 * beta * beta) * alpha / (n.powi(3) * s.powi(7))
        + 3.0 * alpha / (n * n * s.powi(5)))
}

/// Exponent of `R_n(e^{-mu t}; x) = exp(n alpha_n(x) (z(mu/n) - 1))` and
/// its offset `delta` from `-mu x`.
fn exp_image_parts(
    params: &OperatorParams,
    cal: &CalibrationResult,
    x: f64,
    mu: f64,
) -> Result<(f64, f64)> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(domain(format!("mu must be finite and >= 0, got {mu}")));
    }
    let nf = params.nf();
    let w_mu = z_offset(mu / nf, params.beta)?;
    let lambda = params.lambda;
    if lambda > 0.0 && cal.z_offset != 0.0 && lambda / nf >= crate::calibration::SMALL_RATE_SWITCH {
        // n alpha_n(x) = -lambda x / (z_lambda - 1)
        let ratio = w_mu / cal.z_offset;
        let exponent = -lambda * x * ratio;
        let delta = x * (mu - lambda * ratio);
        Ok((exponent, delta))
    } else {
        let exponent = nf * cal.c_n * x * w_mu;
        Ok((exponent, exponent + mu * x))
    }
}

/// `R_n(e^{-mu t}; x)` in closed form.
pub fn exp_image(params: &OperatorParams, x: f64, mu: f64) -> Result<f64> {
    check_x(x)?;
    let cal = calibrate(params)?;
    Ok(exp_image_parts(params, &cal, x, mu)?.0.exp())
}

/// `R_n(e^{-mu t}; x) - e^{-mu x}` without cancellation.
pub fn exp_image_error(params: &OperatorParams, x: f64, mu: f64) -> Result<f64> {
    check_x(x)?;
    let cal = calibrate(params)?;
    let (_, delta) = exp_image_parts(params, &cal, x, mu)?;
    Ok((-mu * x).exp() * delta.exp_m1())
}

/// Truncated large-`n` expansion of `R_n(e^{-mu t}; x)` (order 1 or 2 in `1/n`).
pub fn exp_image_expansion(params: &OperatorParams, x: f64, mu: f64, order: usize) -> Result<f64> {
    if !(1..=2).contains(&order) {
        return Err(Error::UnsupportedOrder { order, max: 2 });
    }
    check_x(x)?;
    let (beta, lambda, n) = (params.beta, params.lambda, params.nf());
    let s2 = (1.0 - beta) * (1.0 - beta);
    let lead = mu * (mu - lambda) * x;
    let mut bracket = 1.0 + lead / (2.0 * n * s2);
    if order == 2 {
        let big =
            (3.0 * mu * x - 4.0 - 8.0 * beta) * mu - (3.0 * mu * x - 2.0 + 8.0 * beta) * lambda;
        bracket += big * lead / (24.0 * n * n * s2 * s2);
    }
    Ok((-mu * x).exp() * bracket)
}

/// `R_n((e^{-t} - e^{-x})^p; x)` from the closed-form exponential images,
/// as `e^{-p x} sum_j C(p,j) (-1)^{p-j} expm1(delta_j)`.
pub fn exp_difference_moment(params: &OperatorParams, x: f64, p: usize) -> Result<f64> {
    check_x(x)?;
    if p > 8 {
        return Err(Error::UnsupportedOrder { order: p, max: 8 });
    }
    if p == 0 {
        return Ok(1.0);
    }
    let cal = calibrate(params)?;
    let mut acc = 0.0;
    let mut binom = 1.0;
    for j in 0..=p {
        let delta = if j == 0 {
            0.0
        } else {
            exp_image_parts(params, &cal, x, j as f64)?.1
        };
        let sign = if (p - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        acc += sign * binom * delta.exp_m1();
        binom = binom * (p - j) as f64 / (j + 1) as f64;
    }
    Ok((-(p as f64) * x).exp() * acc)
}

/// Closed-form exponentially weighted central moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedMomentRecord {
    pub mu: f64,
    pub order: usize,
    pub z_mu: f64,
    pub closed_form: f64,
}

/// `R_n(e^{-mu t} (t - x)^m; x)` for `m <= 4`.
pub fn weighted_central_moment(
    params: &OperatorParams,
    x: f64,
    mu: f64,
    m: usize,
) -> Result<WeightedMomentRecord> {
    check_order(m, MAX_WEIGHTED_ORDER)?;
    check_x(x)?;
    let cal = calibrate(params)?;
    let (exponent, _) = exp_image_parts(params, &cal, x, mu)?;
    let f = exponent.exp();
    let w_mu = z_offset(mu / params.nf(), params.beta)?;
    let z_mu = 1.0 + w_mu;
    let alpha = cal.alpha(x) * z_mu;
    let beta = params.beta * z_mu;
    // alpha z / (1 - beta z) - x; at mu = 0 this is the unweighted offset
    let d = if w_mu == 0.0 {
        mean_offset(&cal, params.beta, x)
    } else {
        alpha / (1.0 - beta) - x
    };
    let central = central_moment_from(alpha, beta, params.nf(), x, d, m)?;
    Ok(WeightedMomentRecord {
        mu,
        order: m,
        z_mu,
        closed_form: f * central,
    })
}

/// Limits of rescaled central moments as `n -> inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AsymptoticKind {
    /// `n R_n(phi; x)`
    NPhi1,
    /// `n R_n(phi^2; x)`
    NPhi2,
    /// `n^2 R_n(phi^3; x)`
    N2Phi3,
    /// `n^2 R_n(phi^4; x)`
    N2Phi4,
    /// `n^2 R_n((e^{-t} - e^{-x})^4; x)`
    N2Exp4,
}

impl AsymptoticKind {
    pub const ALL: [AsymptoticKind; 5] = [
        Self::NPhi1,
        Self::NPhi2,
        Self::N2Phi3,
        Self::N2Phi4,
        Self::N2Exp4,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::NPhi1 => "nphi1",
            Self::NPhi2 => "nphi2",
            Self::N2Phi3 => "n2phi3",
            Self::N2Phi4 => "n2phi4",
            Self::N2Exp4 => "n2exp4",
        }
    }

    /// Power of `n` in the rescaling.
    pub fn scale_power(&self) -> i32 {
        match self {
            Self::NPhi1 | Self::NPhi2 => 1,
            _ => 2,
        }
    }

    /// The unscaled quantity at finite `n`, from closed forms.
    pub fn raw_value(&self, params: &OperatorParams, x: f64) -> Result<f64> {
        match self {
            Self::NPhi1 => central_moment(params, x, 1),
            Self::NPhi2 => central_moment(params, x, 2),
            Self::N2Phi3 => central_moment(params, x, 3),
            Self::N2Phi4 => central_moment(params, x, 4),
            Self::N2Exp4 => exp_difference_moment(params, x, 4),
        }
    }
}

impl fmt::Display for AsymptoticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AsymptoticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse {
                token: s.to_string(),
                reason: "unknown asymptotic kind".into(),
            })
    }
}

/// Limit constant of the given rescaled moment.
pub fn asymptotic_constant(kind: AsymptoticKind, beta: f64, lambda: f64, x: f64) -> Result<f64> {
    crate::calibration::check_beta(beta)?;
    check_x(x)?;
    let s2 = (1.0 - beta) * (1.0 - beta);
    let s4 = s2 * s2;
    Ok(match kind {
        AsymptoticKind::NPhi1 => lambda * x / (2.0 * s2),
        AsymptoticKind::NPhi2 => x / s2,
        AsymptoticKind::N2Phi3 => {
            (2.0 * (1.0 + 2.0 * beta) * x + 3.0 * lambda * x * x) / (2.0 * s4)
        }
        AsymptoticKind::N2Phi4 => 3.0 * x * x / s4,
        AsymptoticKind::N2Exp4 => 3.0 * x * x * (-4.0 * x).exp() / s4,
    })
}

/// Whether a record is for a raw or a central moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentKind {
    Raw,
    Central,
}

impl fmt::Display for MomentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Raw => "raw",
            Self::Central => "central",
        })
    }
}

/// Closed form against brute-force series summation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRecord {
    pub kind: MomentKind,
    pub order: usize,
    pub closed_form: f64,
    pub oracle: f64,
    pub abs_err: f64,
    /// Relative to `|closed_form|`; falls back to `abs_err` when it is zero.
    pub rel_err: f64,
}

impl MomentRecord {
    fn new(kind: MomentKind, order: usize, closed_form: f64, oracle: f64) -> Self {
        let abs_err = (closed_form - oracle).abs();
        let rel_err = if closed_form == 0.0 {
            abs_err
        } else {
            abs_err / closed_form.abs()
        };
        Self {
            kind,
            order,
            closed_form,
            oracle,
            abs_err,
            rel_err,
        }
    }
}

/// Raw and central moments `m = 0..=max_order` at one point, with oracles.
pub fn moment_records(
    params: &OperatorParams,
    x: f64,
    max_order: usize,
    policy: &TruncationPolicy,
) -> Result<Vec<MomentRecord>> {
    check_order(max_order, MAX_MOMENT_ORDER)?;
    let mut out = Vec::with_capacity(2 * (max_order + 1));
    for m in 0..=max_order {
        let series = apply(params, x, &FunctionSpec::Monomial { m: m as u32 }, policy)?;
        out.push(MomentRecord::new(
            MomentKind::Raw,
            m,
            raw_moment(params, x, m)?,
            series,
        ));
    }
    for m in 0..=max_order {
        let series = apply(
            params,
            x,
            &FunctionSpec::ShiftedPower {
                center: x,
                m: m as u32,
            },
            policy,
        )?;
        out.push(MomentRecord::new(
            MomentKind::Central,
            m,
            central_moment(params, x, m)?,
            series,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64, beta: f64, lambda: f64) -> OperatorParams {
        OperatorParams::new(n, beta, lambda).unwrap()
    }

    fn series(params: &OperatorParams, x: f64, f: FunctionSpec) -> f64 {
        apply(params, x, &f, &TruncationPolicy::default()).unwrap()
    }

    #[test]
    fn low_orders() {
        assert_eq!(raw_moment(&p(3, 0.4, 1.0), 2.0, 0).unwrap(), 1.0);
        assert!((raw_moment(&p(3, 0.0, 0.0), 2.0, 1).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(central_moment(&p(3, 0.4, 1.0), 2.0, 0).unwrap(), 1.0);
        assert!(central_moment(&p(3, 0.4, 0.0), 2.0, 1).unwrap().abs() < 1e-15);
        assert!(matches!(
            raw_moment(&p(3, 0.4, 1.0), 2.0, 6),
            Err(Error::UnsupportedOrder { .. })
        ));
        assert!(central_moment(&p(3, 0.4, 1.0), 2.0, 6).is_err());
    }

    #[test]
    fn raw_fifth_golden() {
        // mpmath, 50 digits
        let v = raw_moment(&p(10, 0.25, 1.0), 2.0, 5).unwrap();
        let golden = 99.670_756_701_901_75;
        assert!((v - golden).abs() <= 1e-13 * golden, "{v}");
        let s = series(&p(10, 0.25, 1.0), 2.0, FunctionSpec::Monomial { m: 5 });
        assert!((v - s).abs() <= 1e-9 * v);
    }

    #[test]
    fn central_third_golden() {
        let params = p(20, 0.5, 1.0);
        let v = central_moment(&params, 1.0, 3).unwrap();
        let golden = 0.152_598_081_468_639_31;
        assert!((v - golden).abs() <= 1e-12 * golden, "{v}");
        let s = series(
            &params,
            1.0,
            FunctionSpec::ShiftedPower { center: 1.0, m: 3 },
        );
        assert!((v - s).abs() <= 1e-9 * v);
    }

    #[test]
    fn direct_and_binomial_paths_agree() {
        for &n in &[1u64, 5, 50, 200] {
            for &beta in &[0.0, 0.1, 0.5, 0.9] {
                for &lambda in &[0.0, 0.5, 2.0] {
                    for &x in &[0.1, 1.0, 5.0] {
                        for m in 0..=5 {
                            central_moment_checked(&p(n, beta, lambda), x, m).unwrap();
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn typeset_fourth_moment_differs() {
        let params = p(10, 0.3, 1.0);
        let x = 2.0;
        let printed = central4_as_typeset(&params, x).unwrap();
        let (recombined, _) = central_moment_binomial(&params, x, 4).unwrap();
        let direct = central_moment(&params, x, 4).unwrap();
        assert!((direct - recombined).abs() < 1e-12 * recombined.abs().max(1.0));
        assert!((printed - recombined).abs() > 1e-3 * recombined.abs());
    }

    #[test]
    fn exp_image_examples() {
        let params = p(10, 0.5, 1.0);
        assert!((exp_image(&params, 1.0, 1.0).unwrap() - (-1.0f64).exp()).abs() <= 1e-16);
        assert_eq!(exp_image(&params, 1.0, 0.0).unwrap(), 1.0);
        let v = exp_image(&params, 1.0, 3.0).unwrap();
        let golden = 0.097_922_204_752_201_6;
        assert!((v - golden).abs() <= 1e-14 * golden, "{v}");
        let s = series(&params, 1.0, FunctionSpec::ExpDecay { a: 3.0 });
        assert!((v - s).abs() <= 1e-12);
    }

    #[test]
    fn expansion_kills_corrections_at_lambda() {
        let params = p(7, 0.3, 1.5);
        for order in 1..=2 {
            let e = exp_image_expansion(&params, 0.8, 1.5, order).unwrap();
            assert_eq!(e, (-1.5f64 * 0.8).exp());
        }
        assert!(exp_image_expansion(&params, 0.8, 1.0, 3).is_err());
    }

    #[test]
    fn weighted_moments() {
        let params = p(10, 0.25, 1.0);
        let x = 2.0;
        let r0 = weighted_central_moment(&params, x, 1.0, 0).unwrap();
        assert!((r0.closed_form - exp_image(&params, x, 1.0).unwrap()).abs() < 1e-16);
        let c2 = central_moment(&params, x, 2).unwrap();
        assert_eq!(
            weighted_central_moment(&params, x, 0.0, 2)
                .unwrap()
                .closed_form,
            c2
        );
        let w2 = weighted_central_moment(&params, x, 1.0, 2)
            .unwrap()
            .closed_form;
        let golden = 0.044_409_839_980_328_343;
        assert!((w2 - golden).abs() <= 1e-12 * golden, "{w2}");
        let s = series(
            &params,
            x,
            FunctionSpec::ExpShiftedPower {
                a: 1.0,
                center: x,
                m: 2,
            },
        );
        assert!((w2 - s).abs() <= 1e-9 * w2);
        assert!(weighted_central_moment(&params, x, 1.0, 5).is_err());
    }

    #[test]
    fn weighted_moments_match_series() {
        for &(n, beta, lambda) in &[
            (5u64, 0.1, 0.5),
            (20, 0.5, 2.0),
            (50, 0.9, 1.0),
            (3, 0.0, 0.0),
        ] {
            let params = p(n, beta, lambda);
            for &x in &[0.1, 1.0, 5.0] {
                for &mu in &[0.0, 0.5, 1.0, 3.0] {
                    for m in 0..=4u32 {
                        let c = weighted_central_moment(&params, x, mu, m as usize)
                            .unwrap()
                            .closed_form;
                        let s = series(
                            &params,
                            x,
                            FunctionSpec::ExpShiftedPower {
                                a: mu,
                                center: x,
                                m,
                            },
                        );
                        let scale = c.abs().max(1e-3 * (-mu * x).exp());
                        assert!(
                            (c - s).abs() <= 1e-9 * scale,
                            "{params:?} x={x} mu={mu} m={m}: {c} vs {s}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn asymptotic_constants() {
        assert_eq!(
            asymptotic_constant(AsymptoticKind::NPhi2, 0.0, 1.0, 1.0).unwrap(),
            1.0
        );
        assert_eq!(
            asymptotic_constant(AsymptoticKind::NPhi1, 0.3, 0.0, 2.0).unwrap(),
            0.0
        );
        let v = asymptotic_constant(AsymptoticKind::N2Exp4, 0.5, 1.0, 1.0).unwrap();
        assert!((v - 3.0 * (-4.0f64).exp() / 0.0625).abs() < 1e-15);
        assert!("n2phi5".parse::<AsymptoticKind>().is_err());
        assert_eq!(
            "n2exp4".parse::<AsymptoticKind>().unwrap(),
            AsymptoticKind::N2Exp4
        );
    }

    #[test]
    fn exp_difference_moment_matches_series() {
        let params = p(12, 0.3, 1.0);
        let x = 0.7;
        for pw in 1..=4u32 {
            let closed = exp_difference_moment(&params, x, pw as usize).unwrap();
            let ex = (-x).exp();
            let pol = TruncationPolicy::default();
            let ws = crate::operator::build_weights(&params, x, &pol).unwrap();
            let s = ws
                .expectation(|t| ((-t).exp() - ex).powi(pw as i32))
                .unwrap();
            assert!(
                (closed - s).abs() <= 1e-12 + 1e-9 * s.abs(),
                "p={pw}: {closed} vs {s}"
            );
        }
    }
}
