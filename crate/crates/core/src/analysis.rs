//! Convergence quantities: the exponential modulus of continuity, the
//! uniform bounds for exponential test functions, the quantitative
//! Voronovskaya terms, and limit extrapolation over doubling `n`.

use crate::calibration::OperatorParams;
use crate::error::{domain, Error, Result};
use crate::moments::{
    central_moment, exp_difference_moment, exp_image_error, weighted_central_moment, AsymptoticKind,
};
use crate::operator::{apply, build_weights, FunctionSpec, TruncationPolicy};
use serde::Serialize;
use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

pub const DEFAULT_OMEGA_GRID: usize = 2000;
pub const OMEGA_U_MIN: f64 = 1e-8;
pub const X_CAP: f64 = 40.0;
pub const X_GRID_POINTS: usize = 4001;

/// Uniform grid on `[0, 40]` standing in for `[0, inf)`.
pub fn default_x_grid() -> Vec<f64> {
    uniform_grid(0.0, X_CAP, X_GRID_POINTS)
}

pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let h = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo + h * i as f64
            }
        })
        .collect()
}

/// Least-squares slope through `(x, y)` pairs.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Log-log slope of `|values|` against `ns`; zero values are skipped.
pub fn log_log_slope(ns: &[u64], values: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(values)
        .filter(|(_, v)| v.abs() > 0.0)
        .map(|(&n, v)| ((n as f64).ln(), v.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Degenerate(
            "fewer than two nonzero values for a slope fit".into(),
        ));
    }
    Ok(fit_slope(&pts))
}

/// `n = n0, 2 n0, ..., n0 2^(count-1)`.
pub fn doubling_sequence(n0: u64, count: usize) -> Vec<u64> {
    (0..count).map(|i| n0 << i).collect()
}

/// `2^lo ..= 2^hi`.
pub fn powers_of_two(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|p| 1u64 << p).collect()
}

/// Two-level Richardson extrapolation of the last three terms of a
/// sequence taken at doubling `n`, assuming `s_n = L + A/n + B/n^2 + ...`.
pub fn richardson_limit(values: &[f64]) -> Result<f64> {
    if values.len() < 3 {
        return Err(Error::Degenerate(
            "Richardson extrapolation needs three doublings".into(),
        ));
    }
    let s = &values[values.len() - 3..];
    let r0 = 2.0 * s[1] - s[0];
    let r1 = 2.0 * s[2] - s[1];
    Ok((4.0 * r1 - r0) / 3.0)
}

/// Empirical convergence order: minus the log-log slope of `|s_{2n} - s_n|`.
pub fn convergence_order(ns: &[u64], values: &[f64]) -> Result<f64> {
    if values.len() < 3 {
        return Err(Error::Degenerate(
            "convergence order needs three values".into(),
        ));
    }
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(-log_log_slope(&ns[..diffs.len()], &diffs)?)
}

fn relative_gap(value: f64, target: f64) -> f64 {
    if target == 0.0 {
        value.abs()
    } else {
        (value - target).abs() / target.abs()
    }
}

/// Sampled `omega*(f; delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub delta: f64,
    pub value: f64,
    pub grid_points: usize,
}

/// Exponential modulus of continuity of `g` on a grid uniform in `u = e^{-t}`.
pub fn omega_star_with(g: impl Fn(f64) -> f64, delta: f64, grid: usize) -> Result<ModulusEstimate> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(domain(format!(
            "delta must be finite and >= 0, got {delta}"
        )));
    }
    if grid < 2 {
        return Err(Error::EmptyGrid("omega* needs at least two points"));
    }
    let us = uniform_grid(OMEGA_U_MIN, 1.0, grid);
    let values: Vec<f64> = us.iter().map(|&u| g(-u.ln())).collect();
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Evaluation { t: bad });
    }
    let h = (1.0 - OMEGA_U_MIN) / (grid - 1) as f64;
    let width = ((delta / h) * (1.0 + 1e-12)).floor().min((grid - 1) as f64) as usize;
    Ok(ModulusEstimate {
        delta,
        value: window_spread(&values, width),
        grid_points: grid,
    })
}

/// Largest `max - min` over windows of `width + 1` consecutive values.
fn window_spread(values: &[f64], width: usize) -> f64 {
    if width == 0 {
        return 0.0;
    }
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut best = 0.0f64;
    for (j, &v) in values.iter().enumerate() {
        while maxq.back().is_some_and(|&i| values[i] <= v) {
            maxq.pop_back();
        }
        maxq.push_back(j);
        while minq.back().is_some_and(|&i| values[i] >= v) {
            minq.pop_back();
        }
        minq.push_back(j);
        let start = j.saturating_sub(width);
        while maxq.front().is_some_and(|&i| i < start) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&i| i < start) {
            minq.pop_front();
        }
        best = best.max(values[maxq[0]] - values[minq[0]]);
    }
    best
}

/// `omega*(f; delta)` for a bounded registry function.
pub fn omega_star(f: &FunctionSpec, delta: f64, grid: usize) -> Result<ModulusEstimate> {
    if !f.is_bounded() {
        return Err(Error::Unbounded(f.to_string()));
    }
    omega_star_with(|t| f.eval(t), delta, grid)
}

/// `omega*(f^{(order)}; delta)`.
pub fn omega_star_derivative(
    f: &FunctionSpec,
    order: usize,
    delta: f64,
    grid: usize,
) -> Result<ModulusEstimate> {
    if !f.is_bounded() {
        return Err(Error::Unbounded(f.to_string()));
    }
    omega_star_with(|t| f.derivative(t, order).unwrap_or(f64::NAN), delta, grid)
}

/// `R_n f(x) - f(x)`, from the closed form for exponentials.
pub fn operator_error(
    params: &OperatorParams,
    x: f64,
    f: &FunctionSpec,
    policy: &TruncationPolicy,
) -> Result<f64> {
    match f {
        FunctionSpec::ExpDecay { a } => exp_image_error(params, x, *a),
        _ => Ok(apply(params, x, f, policy)? - f.eval(x)),
    }
}

/// Uniform-bound quantities for the test functions `1, e^{-t}, e^{-2t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundQuantities {
    pub n: u64,
    pub a_n: f64,
    pub b_n: f64,
    pub c_n: f64,
}

pub fn bound_quantities(params: &OperatorParams, x_grid: &[f64]) -> Result<BoundQuantities> {
    if x_grid.is_empty() {
        return Err(Error::EmptyGrid("bound quantities need x values"));
    }
    let mut b = 0.0f64;
    let mut c = 0.0f64;
    for &x in x_grid {
        b = b.max(exp_image_error(params, x, 1.0)?.abs());
        c = c.max(exp_image_error(params, x, 2.0)?.abs());
    }
    // R_n(1; x) = 1 identically: the weights form a probability law
    Ok(BoundQuantities {
        n: params.n,
        a_n: 0.0,
        b_n: b,
        c_n: c,
    })
}

/// Both sides of `sup |R_n f - f| <= 2 omega*(f, sqrt(2 b_n + c_n))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformBoundReport {
    pub function: String,
    pub n: u64,
    pub beta: f64,
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub delta: f64,
    pub holds: bool,
}

/// Checks several functions at once, sharing one weight series per grid point.
pub fn uniform_bound_check_many(
    fs: &[FunctionSpec],
    params: &OperatorParams,
    x_grid: &[f64],
    policy: &TruncationPolicy,
) -> Result<Vec<UniformBoundReport>> {
    for f in fs {
        if !f.is_bounded() {
            return Err(Error::Unbounded(f.to_string()));
        }
    }
    let bounds = bound_quantities(params, x_grid)?;
    let mut sup = vec![0.0f64; fs.len()];
    let needs_series = fs
        .iter()
        .any(|f| !matches!(f, FunctionSpec::ExpDecay { .. }));
    for &x in x_grid {
        let weights = if needs_series {
            Some(build_weights(params, x, policy)?)
        } else {
            None
        };
        for (i, f) in fs.iter().enumerate() {
            let err = match (f, &weights) {
                (FunctionSpec::ExpDecay { a }, _) => exp_image_error(params, x, *a)?,
                (_, Some(w)) if x > 0.0 => w.expectation(|t| f.eval(t))? - f.eval(x),
                _ => 0.0,
            };
            sup[i] = sup[i].max(err.abs());
        }
    }
    let delta = (2.0 * bounds.b_n + bounds.c_n).sqrt();
    fs.iter()
        .zip(sup)
        .map(|(f, lhs)| {
            let rhs = 2.0 * omega_star(f, delta, DEFAULT_OMEGA_GRID)?.value;
            Ok(UniformBoundReport {
                function: f.to_string(),
                n: params.n,
                beta: params.beta,
                lambda: params.lambda,
                lhs,
                rhs,
                delta,
                holds: lhs <= rhs,
            })
        })
        .collect()
}

pub fn uniform_bound_check(
    f: &FunctionSpec,
    params: &OperatorParams,
    x_grid: &[f64],
    policy: &TruncationPolicy,
) -> Result<UniformBoundReport> {
    Ok(uniform_bound_check_many(std::slice::from_ref(f), params, x_grid, policy)?.remove(0))
}

/// Terms of the quantitative Voronovskaya estimate at one point.
///
/// `lhs` uses the coefficient `x / (2 (1-beta)^2)` on `f''`, the one the
/// Taylor argument produces. `lhs_displayed` uses `x / (n (1-beta)^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VoronovskayaQuantities {
    pub n: u64,
    pub x: f64,
    pub mu_n: f64,
    pub nu_n: f64,
    pub zeta_n: f64,
    pub lhs: f64,
    pub lhs_displayed: f64,
    pub rhs: f64,
}

impl VoronovskayaQuantities {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// `mu_n`, `nu_n`, `zeta_n` from closed forms.
pub fn voronovskaya_terms(params: &OperatorParams, x: f64) -> Result<(f64, f64, f64)> {
    let s2 = (1.0 - params.beta).powi(2);
    let nf = params.nf();
    let d = central_moment(params, x, 1)?;
    let mu_n = nf * d - params.lambda * x / (2.0 * s2);
    // n R_n(phi^2) - x/(1-beta)^2 = n d^2 + d/(1-beta)^2
    let nu_n = 0.5 * (nf * d * d + d / s2);
    let e4 = exp_difference_moment(params, x, 4)?.max(0.0);
    let p4 = central_moment(params, x, 4)?.max(0.0);
    let zeta_n = nf * nf * e4.sqrt() * p4.sqrt();
    Ok((mu_n, nu_n, zeta_n))
}

pub fn voronovskaya(
    f: &FunctionSpec,
    params: &OperatorParams,
    x: f64,
    policy: &TruncationPolicy,
) -> Result<VoronovskayaQuantities> {
    if !f.is_bounded() {
        return Err(Error::Unbounded(f.to_string()));
    }
    let (mu_n, nu_n, zeta_n) = voronovskaya_terms(params, x)?;
    let s2 = (1.0 - params.beta).powi(2);
    let nf = params.nf();
    let d1 = f.derivative(x, 1)?;
    let d2 = f.derivative(x, 2)?;
    let scaled = nf * operator_error(params, x, f, policy)?;
    let first = params.lambda * x / (2.0 * s2) * d1;
    let lhs = (scaled - first - x / (2.0 * s2) * d2).abs();
    let lhs_displayed = (scaled - first - x / (nf * s2) * d2).abs();
    let omega = omega_star_derivative(f, 2, 1.0 / nf.sqrt(), DEFAULT_OMEGA_GRID)?.value;
    let rhs = mu_n.abs() * d1.abs()
        + nu_n.abs() * d2.abs()
        + 2.0 * (2.0 * nu_n + x / s2 + zeta_n) * omega;
    Ok(VoronovskayaQuantities {
        n: params.n,
        x,
        mu_n,
        nu_n,
        zeta_n,
        lhs,
        lhs_displayed,
        rhs,
    })
}

/// Quantities with a known large-`n` limit after scaling by `n^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Quantity {
    Moment(AsymptoticKind),
    /// `n (R_n(e^{-mu t}; x) - e^{-mu x})`
    ExpImage {
        mu: f64,
    },
}

impl Quantity {
    pub fn scale_power(&self) -> i32 {
        match self {
            Self::Moment(k) => k.scale_power(),
            Self::ExpImage { .. } => 1,
        }
    }

    pub fn raw_value(&self, params: &OperatorParams, x: f64) -> Result<f64> {
        match self {
            Self::Moment(k) => k.raw_value(params, x),
            Self::ExpImage { mu } => exp_image_error(params, x, *mu),
        }
    }

    pub fn target(&self, beta: f64, lambda: f64, x: f64) -> Result<f64> {
        match self {
            Self::Moment(k) => crate::moments::asymptotic_constant(*k, beta, lambda, x),
            Self::ExpImage { mu } => {
                let s2 = (1.0 - beta) * (1.0 - beta);
                Ok(mu * (mu - lambda) * x * (-mu * x).exp() / (2.0 * s2))
            }
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Moment(k) => write!(f, "{k}"),
            Self::ExpImage { mu } => write!(f, "nexp:{mu}"),
        }
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("nexp:") {
            let mu: f64 = rest.parse().map_err(|_| Error::Parse {
                token: rest.to_string(),
                reason: "expected a number".into(),
            })?;
            return Ok(Self::ExpImage { mu });
        }
        Ok(Self::Moment(s.parse()?))
    }
}

/// One row of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    pub n: u64,
    pub beta: f64,
    pub lambda: f64,
    pub x: f64,
    pub quantity: String,
    pub raw: f64,
    pub scaled: f64,
    pub target: f64,
    pub rel_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub records: Vec<ConvergenceRecord>,
    pub extrapolated: f64,
    pub order: f64,
    pub target: f64,
    pub extrapolated_gap: f64,
}

/// Scaled quantity over doubling `ns` with its extrapolated limit.
pub fn convergence_study(
    quantity: Quantity,
    beta: f64,
    lambda: f64,
    x: f64,
    ns: &[u64],
) -> Result<ConvergenceStudy> {
    let target = quantity.target(beta, lambda, x)?;
    let mut records = Vec::with_capacity(ns.len());
    for &n in ns {
        let params = OperatorParams::new(n, beta, lambda)?;
        let raw = quantity.raw_value(&params, x)?;
        let scaled = (n as f64).powi(quantity.scale_power()) * raw;
        records.push(ConvergenceRecord {
            n,
            beta,
            lambda,
            x,
            quantity: quantity.to_string(),
            raw,
            scaled,
            target,
            rel_gap: relative_gap(scaled, target),
        });
    }
    let scaled: Vec<f64> = records.iter().map(|r| r.scaled).collect();
    let extrapolated = richardson_limit(&scaled)?;
    let order = convergence_order(ns, &scaled).unwrap_or(f64::INFINITY);
    Ok(ConvergenceStudy {
        records,
        extrapolated,
        order,
        target,
        extrapolated_gap: relative_gap(extrapolated, target),
    })
}

/// Measured `lim n (R_n f - f)(x)` against two closed-form candidates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondOrderLimitReport {
    pub ns: Vec<u64>,
    pub scaled: Vec<f64>,
    pub measured: f64,
    /// `lambda x f' / (2 (1-beta)^2) + x f'' / (2 (1-beta)^2)`
    pub candidate_half: f64,
    /// `lambda x f' / (2 (1-beta)^2) + x f'' / (1-beta)^2`
    pub candidate_printed: f64,
    pub gap_half: f64,
    pub gap_printed: f64,
}

pub fn second_order_limit(
    f: &FunctionSpec,
    beta: f64,
    lambda: f64,
    x: f64,
    ns: &[u64],
    policy: &TruncationPolicy,
) -> Result<SecondOrderLimitReport> {
    let mut scaled = Vec::with_capacity(ns.len());
    for &n in ns {
        let params = OperatorParams::new(n, beta, lambda)?;
        scaled.push(n as f64 * operator_error(&params, x, f, policy)?);
    }
    let measured = richardson_limit(&scaled)?;
    let s2 = (1.0 - beta) * (1.0 - beta);
    let first = lambda * x / (2.0 * s2) * f.derivative(x, 1)?;
    let d2 = f.derivative(x, 2)?;
    let candidate_half = first + x / (2.0 * s2) * d2;
    let candidate_printed = first + x / s2 * d2;
    Ok(SecondOrderLimitReport {
        ns: ns.to_vec(),
        scaled,
        measured,
        candidate_half,
        candidate_printed,
        gap_half: (measured - candidate_half).abs(),
        gap_printed: (measured - candidate_printed).abs(),
    })
}

/// Decay of `R_n(e^{-mu t} phi^4) / R_n(e^{-mu t} phi^2)` over `ns`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedRatioReport {
    pub beta: f64,
    pub lambda: f64,
    pub mu: f64,
    pub x: f64,
    pub ns: Vec<u64>,
    pub ratios: Vec<f64>,
    pub slope: f64,
    /// `n^2 ratio` extrapolated in `n`
    pub measured_constant: f64,
    /// `(lambda - 2 mu)^2 x^2 / (4 (1-beta)^4)`
    pub claimed_constant: f64,
    /// `n ratio` extrapolated in `n`
    pub first_order_constant: f64,
}

pub fn weighted_ratio(
    params: &OperatorParams,
    x: f64,
    mu: f64,
    ns: &[u64],
) -> Result<WeightedRatioReport> {
    let mut ratios = Vec::with_capacity(ns.len());
    for &n in ns {
        let p = params.with_n(n)?;
        let num = weighted_central_moment(&p, x, mu, 4)?.closed_form;
        let den = weighted_central_moment(&p, x, mu, 2)?.closed_form;
        if !(den.abs() > f64::MIN_POSITIVE) {
            return Err(Error::Degenerate(format!(
                "weighted second moment underflows at n={n}"
            )));
        }
        ratios.push(num / den);
    }
    let slope = log_log_slope(ns, &ratios)?;
    let n2: Vec<f64> = ns
        .iter()
        .zip(&ratios)
        .map(|(&n, r)| (n as f64).powi(2) * r)
        .collect();
    let n1: Vec<f64> = ns.iter().zip(&ratios).map(|(&n, r)| n as f64 * r).collect();
    let s4 = (1.0 - params.beta).powi(4);
    Ok(WeightedRatioReport {
        beta: params.beta,
        lambda: params.lambda,
        mu,
        x,
        ns: ns.to_vec(),
        slope,
        measured_constant: richardson_limit(&n2)?,
        claimed_constant: (params.lambda - 2.0 * mu).powi(2) * x * x / (4.0 * s4),
        first_order_constant: richardson_limit(&n1)?,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64, beta: f64, lambda: f64) -> OperatorParams {
        OperatorParams::new(n, beta, lambda).unwrap()
    }

    #[test]
    fn omega_identity_and_zero() {
        let f = FunctionSpec::ExpDecay { a: 1.0 };
        let h = (1.0 - OMEGA_U_MIN) / (DEFAULT_OMEGA_GRID - 1) as f64;
        for &d in &[0.01, 0.1, 0.5, 0.999] {
            let w = omega_star(&f, d, DEFAULT_OMEGA_GRID).unwrap().value;
            assert!(w <= d + 1e-15 && w > d - h, "{d}: {w}");
        }
        assert_eq!(omega_star(&f, 0.0, DEFAULT_OMEGA_GRID).unwrap().value, 0.0);
        assert!(matches!(
            omega_star(&FunctionSpec::Monomial { m: 1 }, 0.1, 100),
            Err(Error::Unbounded(_))
        ));
    }

    // 2000-point grid: window of 199 steps ending at u = 1
    const GOLDEN_OMEGA_SQUARE: f64 = 0.189_189_390_301_954_36;

    #[test]
    fn omega_square_against_dense_scan() {
        // F(u) = u^2: the sup over |u - v| <= delta sits at the right end, 1 - (1-delta)^2
        let f = FunctionSpec::ExpDecay { a: 2.0 };
        let w = omega_star(&f, 0.1, DEFAULT_OMEGA_GRID).unwrap().value;
        let dense = omega_star(&f, 0.1, 100_000).unwrap().value;
        assert!((dense - 0.19).abs() < 1e-4, "{dense}");
        assert!((w - 0.19).abs() < 2e-3, "{w}");
        assert!((w - GOLDEN_OMEGA_SQUARE).abs() < 1e-14, "{w}");
    }

    #[test]
    fn omega_is_monotone_and_subadditive() {
        let f = FunctionSpec::RationalBounded;
        let mut prev = 0.0;
        for i in 1..=20 {
            let d = 0.025 * i as f64;
            let w = omega_star(&f, d, DEFAULT_OMEGA_GRID).unwrap().value;
            assert!(w >= prev);
            let w2 = omega_star(&f, 2.0 * d, DEFAULT_OMEGA_GRID).unwrap().value;
            assert!(w2 <= 2.0 * w + 1e-15);
            prev = w;
        }
    }

    #[test]
    fn richardson_recovers_polynomial_limit() {
        let ns = doubling_sequence(16, 5);
        let vals: Vec<f64> = ns
            .iter()
            .map(|&n| 2.0 + 3.0 / n as f64 - 5.0 / (n * n) as f64)
            .collect();
        assert!((richardson_limit(&vals).unwrap() - 2.0).abs() < 1e-13);
        assert!((convergence_order(&ns, &vals).unwrap() - 1.0).abs() < 0.1);
    }

    #[test]
    fn bounds_vanish_at_preserved_rate() {
        let grid = default_x_grid();
        let b = bound_quantities(&p(100, 0.5, 1.0), &grid).unwrap();
        assert_eq!(b.a_n, 0.0);
        assert!(b.b_n < 1e-15, "{}", b.b_n);
        assert!(b.c_n > 0.0);
        assert!(matches!(
            bound_quantities(&p(100, 0.5, 1.0), &[]),
            Err(Error::EmptyGrid(_))
        ));
    }

    #[test]
    fn bounds_c_n_golden() {
        // dense sweep of the closed form over x in [0, 40], 400001 points
        let c = bound_quantities(&p(100, 0.5, 1.0), &default_x_grid())
            .unwrap()
            .c_n;
        let dense = bound_quantities(&p(100, 0.5, 1.0), &uniform_grid(0.0, 40.0, 400_001))
            .unwrap()
            .c_n;
        assert!((c - dense).abs() <= 1e-4 * dense);
        assert!((dense - 0.007_012_029_324_199_813).abs() < 1e-9, "{dense}");
    }

    #[test]
    fn uniform_bound_examples() {
        let grid = default_x_grid();
        let pol = TruncationPolicy::default();
        let r = uniform_bound_check(
            &FunctionSpec::ExpDecay { a: 1.0 },
            &p(50, 0.25, 1.0),
            &grid,
            &pol,
        )
        .unwrap();
        assert!(r.lhs < 1e-15 && r.holds);
        let r = uniform_bound_check(
            &FunctionSpec::ExpDecay { a: 2.0 },
            &p(50, 0.25, 1.0),
            &grid,
            &pol,
        )
        .unwrap();
        assert!(r.holds, "{r:?}");
        let r = uniform_bound_check(
            &FunctionSpec::RationalBounded,
            &p(200, 0.1, 0.5),
            &grid,
            &pol,
        )
        .unwrap();
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn voronovskaya_example() {
        let pol = TruncationPolicy::default();
        let v = voronovskaya(
            &FunctionSpec::ExpDecay { a: 1.0 },
            &p(100, 0.5, 1.0),
            1.0,
            &pol,
        )
        .unwrap();
        assert!(v.holds(), "{v:?}");
        assert!(v.zeta_n >= 0.0);
    }

    #[test]
    fn voronovskaya_terms_vanish() {
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for n in powers_of_two(6, 12) {
            let (mu, nu, _) = voronovskaya_terms(&p(n, 0.5, 1.0), 2.0).unwrap();
            assert!(mu.abs() < prev.0 && nu.abs() < prev.1);
            prev = (mu.abs(), nu.abs());
        }
        let (mu64, nu64, _) = voronovskaya_terms(&p(64, 0.5, 1.0), 2.0).unwrap();
        assert!(prev.0 < mu64.abs() / 30.0 && prev.1 < nu64.abs() / 30.0);
    }

    #[test]
    fn second_order_limit_for_preserved_and_image() {
        let pol = TruncationPolicy::default();
        let ns = powers_of_two(6, 10);
        let r = second_order_limit(&FunctionSpec::ExpDecay { a: 1.0 }, 0.3, 1.0, 1.5, &ns, &pol)
            .unwrap();
        assert!(r.measured.abs() < 1e-12);
        let r = second_order_limit(&FunctionSpec::ExpDecay { a: 2.0 }, 0.0, 1.0, 1.0, &ns, &pol)
            .unwrap();
        let expected = 2.0 * 1.0 * (-2.0f64).exp() / 2.0;
        assert!((r.measured - expected).abs() < 1e-5 * expected, "{r:?}");
        assert!(r.gap_half < 1e-5 && r.gap_printed > 0.1);
    }

    #[test]
    fn quantity_parse() {
        assert_eq!(
            "nexp:2".parse::<Quantity>().unwrap(),
            Quantity::ExpImage { mu: 2.0 }
        );
        assert_eq!(
            "nphi2".parse::<Quantity>().unwrap(),
            Quantity::Moment(AsymptoticKind::NPhi2)
        );
        assert!("nexp:a".parse::<Quantity>().is_err());
    }
}
