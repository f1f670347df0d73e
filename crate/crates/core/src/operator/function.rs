//! Registry of test functions the operator can be applied to.
//!
//! Textual form: `exp:a | mono:m | poly:c0,c1,... | pow:x0,m | exppow:a,x0,m | rat1`.

use crate::error::{Error, Result};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `e^{-a t}`, `a >= 0`
    ExpDecay { a: f64 },
    /// `t^m`
    Monomial { m: u32 },
    /// `c0 + c1 t + c2 t^2 + ...`
    Poly { coeffs: Vec<f64> },
    /// `(t - center)^m`
    ShiftedPower { center: f64, m: u32 },
    /// `e^{-a t} (t - center)^m`
    ExpShiftedPower { a: f64, center: f64, m: u32 },
    /// `1 / (1 + t)`
    RationalBounded,
}

impl FunctionSpec {
    pub fn exp_decay(a: f64) -> Result<Self> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::Domain(format!(
                "exp_decay rate must be >= 0, got {a}"
            )));
        }
        Ok(Self::ExpDecay { a })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::ExpDecay { a } => (-a * t).exp(),
            Self::Monomial { m } => t.powi(*m as i32),
            Self::Poly { coeffs } => coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c),
            Self::ShiftedPower { center, m } => (t - center).powi(*m as i32),
            Self::ExpShiftedPower { a, center, m } => (-a * t).exp() * (t - center).powi(*m as i32),
            Self::RationalBounded => 1.0 / (1.0 + t),
        }
    }

    /// Derivative of the given order at `t`.
    pub fn derivative(&self, t: f64, order: usize) -> Result<f64> {
        if order == 0 {
            return Ok(self.eval(t));
        }
        let value = match self {
            Self::ExpDecay { a } => (-a).powi(order as i32) * (-a * t).exp(),
            Self::Monomial { m } => falling(*m, order) * power_or_zero(t, *m, order),
            Self::Poly { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(order)
                .map(|(j, &c)| c * falling(j as u32, order) * t.powi((j - order) as i32))
                .sum(),
            Self::ShiftedPower { center, m } => {
                falling(*m, order) * power_or_zero(t - center, *m, order)
            }
            Self::RationalBounded => {
                // d^k/dt^k (1+t)^{-1} = (-1)^k k! (1+t)^{-(k+1)}
                let fact: f64 = (1..=order).map(|j| j as f64).product();
                let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * fact / (1.0 + t).powi(order as i32 + 1)
            }
            Self::ExpShiftedPower { a, center, m } => {
                // Leibniz rule on e^{-a t} * (t - c)^m
                let mut acc = 0.0;
                let mut binom = 1.0;
                for j in 0..=order {
                    let e = (-a).powi((order - j) as i32) * (-a * t).exp();
                    let p = falling(*m, j) * power_or_zero(t - center, *m, j);
                    acc += binom * e * p;
                    binom = binom * (order - j) as f64 / (j + 1) as f64;
                }
                acc
            }
        };
        Ok(value)
    }

    /// Bounded on `[0, inf)` (admissible for the exponential modulus).
    pub fn is_bounded(&self) -> bool {
        match self {
            Self::ExpDecay { .. } | Self::RationalBounded => true,
            Self::ExpShiftedPower { a, m, .. } => *m == 0 || *a > 0.0,
            Self::Monomial { m } | Self::ShiftedPower { m, .. } => *m == 0,
            Self::Poly { coeffs } => coeffs.iter().skip(1).all(|&c| c == 0.0),
        }
    }

    /// Polynomial growth degree used to tighten the series truncation.
    pub fn growth_degree(&self) -> u32 {
        match self {
            Self::ExpDecay { .. } | Self::RationalBounded => 0,
            Self::Monomial { m }
            | Self::ShiftedPower { m, .. }
            | Self::ExpShiftedPower { m, .. } => *m,
            Self::Poly { coeffs } => coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0) as u32,
        }
    }
}

fn falling(m: u32, k: usize) -> f64 {
    (0..k).map(|j| m as f64 - j as f64).product()
}

fn power_or_zero(base: f64, m: u32, k: usize) -> f64 {
    if k as u32 > m {
        0.0
    } else {
        base.powi((m as usize - k) as i32)
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ExpDecay { a } => write!(f, "exp:{a}"),
            Self::Monomial { m } => write!(f, "mono:{m}"),
            Self::Poly { coeffs } => {
                let parts: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "poly:{}", parts.join(","))
            }
            Self::ShiftedPower { center, m } => write!(f, "pow:{center},{m}"),
            Self::ExpShiftedPower { a, center, m } => write!(f, "exppow:{a},{center},{m}"),
            Self::RationalBounded => write!(f, "rat1"),
        }
    }
}

fn parse_err(token: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        token: token.to_string(),
        reason: reason.into(),
    }
}

fn parse_real(token: &str) -> Result<f64> {
    let v: f64 = token
        .trim()
        .parse()
        .map_err(|_| parse_err(token, "expected a real number"))?;
    if !v.is_finite() {
        return Err(parse_err(token, "value must be finite"));
    }
    Ok(v)
}

fn parse_order(token: &str) -> Result<u32> {
    token
        .trim()
        .parse()
        .map_err(|_| parse_err(token, "expected a nonnegative integer"))
}

fn expect_args<'a>(kind: &str, args: &'a [&'a str], count: usize) -> Result<&'a [&'a str]> {
    if args.len() != count {
        return Err(parse_err(
            &format!("{kind}:{}", args.join(",")),
            format!("`{kind}` takes {count} argument(s), got {}", args.len()),
        ));
    }
    Ok(args)
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "rat1" {
            return Ok(Self::RationalBounded);
        }
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| parse_err(s, "expected `kind:args` or `rat1`"))?;
        let args: Vec<&str> = rest.split(',').collect();
        match kind {
            "exp" => {
                let a = expect_args(kind, &args, 1)?;
                let rate = parse_real(a[0])?;
                if rate < 0.0 {
                    return Err(parse_err(a[0], "decay rate must be >= 0"));
                }
                Ok(Self::ExpDecay { a: rate })
            }
            "mono" => Ok(Self::Monomial {
                m: parse_order(expect_args(kind, &args, 1)?[0])?,
            }),
            "poly" => {
                let coeffs = args
                    .iter()
                    .map(|t| parse_real(t))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Self::Poly { coeffs })
            }
            "pow" => {
                let a = expect_args(kind, &args, 2)?;
                Ok(Self::ShiftedPower {
                    center: parse_real(a[0])?,
                    m: parse_order(a[1])?,
                })
            }
            "exppow" => {
                let a = expect_args(kind, &args, 3)?;
                let rate = parse_real(a[0])?;
                if rate < 0.0 {
                    return Err(parse_err(a[0], "decay rate must be >= 0"));
                }
                Ok(Self::ExpShiftedPower {
                    a: rate,
                    center: parse_real(a[1])?,
                    m: parse_order(a[2])?,
                })
            }
            other => Err(parse_err(other, "unknown function kind")),
        }
    }
}
