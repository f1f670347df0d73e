//! Exact Stirling numbers of the second kind and second-order Eulerian numbers.

use crate::error::{Error, Result};

pub const DEFAULT_STIRLING2_MAX: usize = 30;
pub const DEFAULT_EULERIAN2_MAX: usize = 12;

/// Triangle of `S(n, k)` for `0 <= k <= n <= max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stirling2Table {
    rows: Vec<Vec<u128>>,
}

impl Stirling2Table {
    pub fn new(max: usize) -> Result<Self> {
        let mut rows: Vec<Vec<u128>> = Vec::with_capacity(max + 1);
        rows.push(vec![1]);
        for n in 1..=max {
            let prev = &rows[n - 1];
            let mut row = vec![0u128; n + 1];
            for k in 1..=n {
                let carry = if k < n { prev[k] } else { 0 };
                row[k] = (k as u128)
                    .checked_mul(carry)
                    .and_then(|v| v.checked_add(prev[k - 1]))
                    .ok_or_else(|| Error::Overflow(format!("S({n}, {k})")))?;
            }
            rows.push(row);
        }
        Ok(Self { rows })
    }

    pub fn max(&self) -> usize {
        self.rows.len() - 1
    }

    /// `S(n, k)`; zero for `k > n`.
    pub fn get(&self, n: usize, k: usize) -> Result<u128> {
        if n > self.max() {
            return Err(Error::Domain(format!(
                "S({n}, {k}) beyond table size {}",
                self.max()
            )));
        }
        Ok(self.rows[n].get(k).copied().unwrap_or(0))
    }
}

/// `S(n, k)` computed exactly; overflow of `u128` is reported, not wrapped.
pub fn stirling2(n: usize, k: usize) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    Stirling2Table::new(n)?.get(n, k)
}

/// Coefficients of the second-order Eulerian polynomials `B_n(x)`.
///
/// `T(n, k) = (k + 1) T(n-1, k) + (2n - 1 - k) T(n-1, k-1)` with `T(0, 0) = 1`;
/// row `n` holds the coefficients of `x^0 .. x^{n-1}` (just `[1]` for `n = 0`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Eulerian2Triangle {
    rows: Vec<Vec<u128>>,
}

impl Eulerian2Triangle {
    pub fn new(max: usize) -> Result<Self> {
        let mut rows: Vec<Vec<u128>> = vec![vec![1]];
        for n in 1..=max {
            let prev = &rows[n - 1];
            let width = n.max(1);
            let mut row = vec![0u128; width];
            for (k, slot) in row.iter_mut().enumerate() {
                let a = prev.get(k).copied().unwrap_or(0);
                let b = if k >= 1 {
                    prev.get(k - 1).copied().unwrap_or(0)
                } else {
                    0
                };
                let lhs = (k as u128 + 1).checked_mul(a);
                let rhs = ((2 * n - 1 - k) as u128).checked_mul(b);
                *slot = lhs
                    .zip(rhs)
                    .and_then(|(l, r)| l.checked_add(r))
                    .ok_or_else(|| Error::Overflow(format!("T({n}, {k})")))?;
            }
            rows.push(row);
        }
        Ok(Self { rows })
    }

    pub fn max(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn row(&self, n: usize) -> Option<&[u128]> {
        self.rows.get(n).map(Vec::as_slice)
    }

    pub fn rows(&self) -> &[Vec<u128>] {
        &self.rows
    }

    /// Horner evaluation of `B_n(x)`.
    pub fn eval(&self, n: usize, x: f64) -> Result<f64> {
        let row = self.row(n).ok_or(Error::UnsupportedOrder {
            order: n,
            max: self.max(),
        })?;
        Ok(row.iter().rev().fold(0.0, |acc, &c| acc * x + c as f64))
    }
}

/// `T(n, k)` of the second-order Eulerian triangle.
pub fn eulerian2(n: usize, k: usize) -> Result<u128> {
    let tri = Eulerian2Triangle::new(n)?;
    Ok(tri.row(n).and_then(|r| r.get(k)).copied().unwrap_or(0))
}

/// `B_n(x)` for `n <= 12`.
pub fn eulerian2_poly(n: usize, x: f64) -> Result<f64> {
    if n > DEFAULT_EULERIAN2_MAX {
        return Err(Error::UnsupportedOrder {
            order: n,
            max: DEFAULT_EULERIAN2_MAX,
        });
    }
    Eulerian2Triangle::new(n)?.eval(n, x)
}
