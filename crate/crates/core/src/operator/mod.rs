//! Series evaluation of the calibrated operator
//! `R_n(f; x) = sum_k L_k f(k / n)` over the Jain basis
//! `L_k = theta (theta + beta k)^{k-1} e^{-(theta + beta k)} / k!`, `theta = n alpha_n(x)`.
//!
//! Log weights use the identity `L_k = (theta / a_k) * Poisson(k; a_k)` with
//! `a_k = theta + beta k`, so the Poisson factor can be taken in saddle-point
//! form (Stirling remainder plus deviance). That keeps every weight accurate
//! to a few ulps even when `k ln a_k` and `ln k!` are both ~1e5.

mod function;
mod summation;

pub use function::FunctionSpec;
pub use summation::CompensatedSum;

use crate::calibration::{calibrate, OperatorParams};
use crate::error::{domain, Error, Result};
use crate::specfun::{poisson_deviance, stirling_error};
use serde::Serialize;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Stopping rule for the infinite series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationPolicy {
    /// Bound on the neglected (growth-weighted) tail mass.
    pub tail_eps: f64,
    pub max_terms: usize,
    /// Half-width of the initial window in standard deviations.
    pub safety_sigma: f64,
    /// Polynomial growth of the integrand; the tail bound is inflated by
    /// `max(1, k/n)^m` so that `t^m` moments stay inside `tail_eps`.
    pub growth_degree: u32,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            tail_eps: 1e-14,
            max_terms: 10_000_000,
            safety_sigma: 12.0,
            growth_degree: 0,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.tail_eps > 0.0 && self.tail_eps < 1e-6) {
            return Err(domain(format!(
                "tail_eps must lie in (0, 1e-6), got {}",
                self.tail_eps
            )));
        }
        if self.max_terms == 0 || !(self.safety_sigma > 0.0) {
            return Err(domain("max_terms and safety_sigma must be positive"));
        }
        Ok(())
    }

    /// Policy tightened for an integrand growing like `t^m`.
    pub fn moment_safe(self, m: u32) -> Self {
        Self {
            growth_degree: self.growth_degree.max(m),
            ..self
        }
    }
}

/// Truncated window of basis weights `L_k`, `k_min <= k <= k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSeries {
    pub n: u64,
    /// `theta = n alpha_n(x)`
    pub theta: f64,
    pub k_min: u64,
    pub k_max: u64,
    /// Compensated sum of the retained weights.
    pub mass: f64,
    log_weights: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightSeries {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn log_weight(&self, k: u64) -> Option<f64> {
        if k < self.k_min || k > self.k_max {
            return None;
        }
        Some(self.log_weights[(k - self.k_min) as usize])
    }

    pub fn weight(&self, k: u64) -> Option<f64> {
        self.log_weight(k)
            .map(|_| self.weights[(k - self.k_min) as usize])
    }

    /// `(k, L_k)` pairs in increasing `k`.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (u64, f64)> + '_ {
        let k_min = self.k_min;
        self.weights
            .iter()
            .enumerate()
            .map(move |(i, &w)| (k_min + i as u64, w))
    }

    /// `sum_k L_k g(k / n)` with compensated summation.
    pub fn expectation(&self, mut g: impl FnMut(f64) -> f64) -> Result<f64> {
        let nf = self.n as f64;
        let mut acc = CompensatedSum::new();
        for (k, w) in self.iter() {
            let t = k as f64 / nf;
            let v = g(t);
            if !v.is_finite() {
                return Err(Error::Evaluation { t });
            }
            if w != 0.0 {
                acc.add(w * v);
            }
        }
        Ok(acc.value())
    }

    /// Same as [`expectation`](Self::expectation) but summed from the far tail inwards.
    pub fn expectation_reversed(&self, mut g: impl FnMut(f64) -> f64) -> Result<f64> {
        let nf = self.n as f64;
        let mut acc = CompensatedSum::new();
        for (k, w) in self.iter().rev() {
            let t = k as f64 / nf;
            let v = g(t);
            if !v.is_finite() {
                return Err(Error::Evaluation { t });
            }
            acc.add(w * v);
        }
        Ok(acc.value())
    }
}

/// `ln L_k` for a given `theta > 0`.
pub fn log_weight_theta(theta: f64, beta: f64, k: u64) -> f64 {
    if k == 0 {
        return -theta;
    }
    let kf = k as f64;
    let a = theta + beta * kf;
    -(beta * kf / theta).ln_1p()
        - stirling_error(k)
        - poisson_deviance(kf, a)
        - HALF_LN_2PI
        - 0.5 * kf.ln()
}

/// `ln L_k(x)` for the calibrated operator.
pub fn basis_log_weight(params: &OperatorParams, x: f64, k: u64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(domain(format!("x must be finite and >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(if k == 0 { 0.0 } else { f64::NEG_INFINITY });
    }
    let theta = params.nf() * calibrate(params)?.alpha(x);
    Ok(log_weight_theta(theta, params.beta, k))
}

/// Weight window for `(params, x)` under `policy`.
pub fn build_weights(
    params: &OperatorParams,
    x: f64,
    policy: &TruncationPolicy,
) -> Result<WeightSeries> {
    policy.validate()?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(domain(format!("x must be finite and >= 0, got {x}")));
    }
    let theta = params.nf() * calibrate(params)?.alpha(x);
    build_weights_theta(params.n, theta, params.beta, policy)
}

/// Weight window for an explicit `theta = n alpha`.
pub fn build_weights_theta(
    n: u64,
    theta: f64,
    beta: f64,
    policy: &TruncationPolicy,
) -> Result<WeightSeries> {
    if theta == 0.0 {
        return Ok(WeightSeries {
            n,
            theta,
            k_min: 0,
            k_max: 0,
            mass: 1.0,
            log_weights: vec![0.0],
            weights: vec![1.0],
        });
    }
    let sigma = 1.0 - beta;
    let mean = theta / sigma;
    let sd = (theta / (sigma * sigma * sigma)).sqrt();
    let lo = (mean - policy.safety_sigma * sd).floor().max(0.0) as u64;
    let hi = (mean + policy.safety_sigma * sd)
        .ceil()
        .max(lo as f64 + 1.0) as u64;
    if (hi - lo + 1) as usize > policy.max_terms {
        return Err(Error::Truncation(format!(
            "initial window of {} terms exceeds max_terms {}",
            hi - lo + 1,
            policy.max_terms
        )));
    }
    let mut win = Window {
        theta,
        beta,
        lo,
        hi,
        lw: Vec::new(),
        w: Vec::new(),
    };
    win.fill();
    let growth = |k: u64| -> f64 {
        if policy.growth_degree == 0 {
            1.0
        } else {
            (k as f64 / n as f64)
                .max(1.0)
                .powi(policy.growth_degree as i32)
        }
    };
    let budget = 0.5 * policy.tail_eps;
    loop {
        let mut extended = false;
        if win.right_tail(&growth, policy.growth_degree) > budget {
            let step = ((win.hi - win.lo) / 4).max(64);
            win.extend_right(step);
            extended = true;
        }
        if win.lo > 0 && win.left_tail(&growth) > budget {
            let step = ((win.hi - win.lo) / 4).max(64).min(win.lo);
            win.extend_left(step);
            extended = true;
        }
        if win.w.len() > policy.max_terms {
            return Err(Error::Truncation(format!(
                "tail above {:e} after {} terms (theta = {theta}, beta = {beta})",
                policy.tail_eps,
                win.w.len()
            )));
        }
        if !extended {
            let mass: CompensatedSum = win.w.iter().copied().collect();
            let mass = mass.value();
            if 1.0 - mass <= policy.tail_eps {
                return Ok(WeightSeries {
                    n,
                    theta,
                    k_min: win.lo,
                    k_max: win.hi,
                    mass,
                    log_weights: win.lw,
                    weights: win.w,
                });
            }
            // tail estimate was optimistic; widen both ends and retry
            let step = ((win.hi - win.lo) / 4).max(64);
            win.extend_right(step);
            if win.lo > 0 {
                let s = step.min(win.lo);
                win.extend_left(s);
            }
            if win.w.len() > policy.max_terms {
                return Err(Error::Truncation(format!(
                    "mass {mass} short of 1 by more than {:e}",
                    policy.tail_eps
                )));
            }
        }
    }
}

struct Window {
    theta: f64,
    beta: f64,
    lo: u64,
    hi: u64,
    lw: Vec<f64>,
    w: Vec<f64>,
}

impl Window {
    fn fill(&mut self) {
        self.lw = (self.lo..=self.hi)
            .map(|k| log_weight_theta(self.theta, self.beta, k))
            .collect();
        self.w = self.lw.iter().map(|l| l.exp()).collect();
    }

    fn extend_right(&mut self, step: u64) {
        let from = self.hi + 1;
        self.hi += step;
        for k in from..=self.hi {
            let l = log_weight_theta(self.theta, self.beta, k);
            self.lw.push(l);
            self.w.push(l.exp());
        }
    }

    fn extend_left(&mut self, step: u64) {
        let new_lo = self.lo - step;
        let mut lw: Vec<f64> = (new_lo..self.lo)
            .map(|k| log_weight_theta(self.theta, self.beta, k))
            .collect();
        let mut w: Vec<f64> = lw.iter().map(|l| l.exp()).collect();
        lw.append(&mut self.lw);
        w.append(&mut self.w);
        self.lw = lw;
        self.w = w;
        self.lo = new_lo;
    }

    /// Geometric bound on `sum_{k > hi} L_k g(k)` from the last ratio.
    fn right_tail(&self, growth: &impl Fn(u64) -> f64, degree: u32) -> f64 {
        let len = self.lw.len();
        let last = self.lw[len - 1];
        if last == f64::NEG_INFINITY || self.w[len - 1] == 0.0 {
            return 0.0;
        }
        // the ratio only bounds the tail once we are past the mode
        let mean = self.theta / (1.0 - self.beta);
        if (self.hi as f64) < mean {
            return f64::INFINITY;
        }
        let ratio = (last - self.lw[len - 2]).exp();
        let hi = self.hi as f64;
        let q = ratio * ((hi + 1.0) / hi).powi(degree as i32);
        if q >= 1.0 {
            return f64::INFINITY;
        }
        self.w[len - 1] * growth(self.hi) * q / (1.0 - q)
    }

    fn left_tail(&self, growth: &impl Fn(u64) -> f64) -> f64 {
        if self.w[0] == 0.0 {
            return 0.0;
        }
        let ratio = (self.lw[0] - self.lw[1]).exp();
        if ratio >= 1.0 {
            return f64::INFINITY;
        }
        // L_k for k < lo is bounded by w[0] ratio^(lo - k); growth is at most g(lo)
        self.w[0] * growth(self.lo) * ratio / (1.0 - ratio)
    }
}

/// `R_n(f; x)` by truncated series.
pub fn apply(
    params: &OperatorParams,
    x: f64,
    f: &FunctionSpec,
    policy: &TruncationPolicy,
) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(domain(format!("x must be finite and >= 0, got {x}")));
    }
    if x == 0.0 {
        let v = f.eval(0.0);
        return if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { t: 0.0 })
        };
    }
    let policy = policy.moment_safe(f.growth_degree());
    let ws = build_weights(params, x, &policy)?;
    ws.expectation(|t| f.eval(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64, beta: f64, lambda: f64) -> OperatorParams {
        OperatorParams::new(n, beta, lambda).unwrap()
    }

    #[test]
    fn k_zero_weight() {
        let params = p(6, 0.3, 1.0);
        let alpha = crate::calibration::alpha_n(&params, 1.5).unwrap();
        assert_eq!(basis_log_weight(&params, 1.5, 0).unwrap(), -6.0 * alpha);
        assert_eq!(basis_log_weight(&params, 0.0, 0).unwrap(), 0.0);
        assert_eq!(
            basis_log_weight(&params, 0.0, 3).unwrap(),
            f64::NEG_INFINITY
        );
        assert!(basis_log_weight(&params, -1.0, 3).is_err());
    }

    #[test]
    fn log_weight_golden() {
        // direct product n a (n a + 3 b)^2 e^{-(n a + 3 b)} / 3! at 50 digits (mpmath)
        let lw = basis_log_weight(&p(4, 0.2, 1.0), 1.0, 3).unwrap();
        let golden = -1.903_447_497_183_901_5;
        assert!((lw - golden).abs() < 1e-14, "{lw}");
    }

    #[test]
    fn log_weight_matches_direct_formula() {
        for &(theta, beta) in &[(0.3, 0.0), (4.0, 0.2), (50.0, 0.5), (900.0, 0.9)] {
            for k in [1u64, 2, 5, 17, 60] {
                let kf = k as f64;
                let a: f64 = theta + beta * kf;
                let lf: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
                let direct = theta.ln() + (kf - 1.0) * a.ln() - a - lf;
                let got = log_weight_theta(theta, beta, k);
                assert!(
                    (got - direct).abs() <= 1e-12 * direct.abs().max(1.0),
                    "theta={theta} k={k}"
                );
            }
        }
    }

    #[test]
    fn beta_zero_is_poisson() {
        let params = p(8, 0.0, 0.0);
        let x = 0.75;
        let mu: f64 = 8.0 * x;
        let ws = build_weights(&params, x, &TruncationPolicy::default()).unwrap();
        let mut pmf = (-mu).exp();
        for k in 0..=ws.k_max {
            if k > 0 {
                pmf *= mu / k as f64;
            }
            if let Some(w) = ws.weight(k) {
                assert!((w - pmf).abs() <= 1e-15 + 1e-13 * pmf, "k={k}");
            }
        }
    }

    #[test]
    fn mass_close_to_one() {
        let ws = build_weights(&p(10, 0.5, 1.0), 2.0, &TruncationPolicy::default()).unwrap();
        assert!((1.0 - ws.mass).abs() <= 1e-14);
        assert!(ws.iter().all(|(_, w)| w >= 0.0));
    }

    #[test]
    fn zero_x_single_weight() {
        let ws = build_weights(&p(10, 0.5, 1.0), 0.0, &TruncationPolicy::default()).unwrap();
        assert_eq!((ws.k_min, ws.k_max, ws.mass), (0, 0, 1.0));
        let f = FunctionSpec::RationalBounded;
        assert_eq!(
            apply(&p(3, 0.2, 1.0), 0.0, &f, &TruncationPolicy::default()).unwrap(),
            1.0
        );
    }

    #[test]
    fn policy_validation() {
        let bad = TruncationPolicy {
            tail_eps: 1e-3,
            ..Default::default()
        };
        assert!(build_weights(&p(3, 0.1, 1.0), 1.0, &bad).is_err());
        let tiny = TruncationPolicy {
            max_terms: 10,
            ..Default::default()
        };
        assert!(matches!(
            build_weights(&p(100, 0.9, 0.0), 1.0, &tiny),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn preserves_exponential_and_constants() {
        let pol = TruncationPolicy::default();
        let params = p(10, 0.5, 1.0);
        let one = FunctionSpec::Poly { coeffs: vec![1.0] };
        assert!((apply(&params, 2.0, &one, &pol).unwrap() - 1.0).abs() <= 2e-14);
        let e = FunctionSpec::ExpDecay { a: 1.0 };
        assert!((apply(&params, 2.0, &e, &pol).unwrap() - (-2.0f64).exp()).abs() <= 1e-10);
        let params = p(10, 0.25, 1.0);
        let alpha = crate::calibration::alpha_n(&params, 2.0).unwrap();
        let t = FunctionSpec::Monomial { m: 1 };
        assert!((apply(&params, 2.0, &t, &pol).unwrap() - alpha / 0.75).abs() <= 1e-10);
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let f = FunctionSpec::ShiftedPower {
            center: 0.0,
            m: 400,
        };
        let r = apply(&p(2, 0.5, 0.0), 50.0, &f, &TruncationPolicy::default());
        assert!(r.is_err());
    }
}
