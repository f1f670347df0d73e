//! Independent reference computations.
//!
//! Nothing here goes through the Lambert W solver, the saddle-point weights
//! or the closed-form moments; these routines exist to check those paths.

use crate::operator::{CompensatedSum, FunctionSpec};
use num_complex::Complex64;

/// Root of `beta z - ln z = beta + t` in `(0, 1]` by plain bisection.
pub fn solve_z_bisection(t: f64, beta: f64) -> f64 {
    let h = |z: f64| beta * z - z.ln() - beta - t;
    // h is decreasing on (0, 1], h(1) = -t <= 0
    let mut hi = 1.0;
    let mut lo = (-(beta + t) - 1.0).exp();
    debug_assert!(h(lo) > 0.0);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sum `w_k f(k / n)` for weights generated by a log-ratio recurrence from `k = 0`.
fn sum_by_recurrence(
    n: u64,
    log_w0: f64,
    log_ratio: impl Fn(u64) -> f64,
    mean: f64,
    f: &FunctionSpec,
) -> f64 {
    let nf = n as f64;
    let mut acc = CompensatedSum::new();
    let mut lw = log_w0;
    let mut k = 0u64;
    loop {
        let w = lw.exp();
        acc.add(w * f.eval(k as f64 / nf));
        if k as f64 > mean && (lw < -800.0 || (w * (1.0 + (k as f64 / nf).powi(8))) < 1e-40) {
            break;
        }
        lw += log_ratio(k);
        k += 1;
    }
    acc.value()
}

/// Classical Szasz-Mirakyan operator `sum e^{-nx} (nx)^k / k! f(k / n)`.
pub fn szasz_mirakyan(n: u64, x: f64, f: &FunctionSpec) -> f64 {
    let nx = n as f64 * x;
    if nx == 0.0 {
        return f.eval(0.0);
    }
    let ln_nx = nx.ln();
    sum_by_recurrence(n, -nx, |k| ln_nx - ((k + 1) as f64).ln(), nx, f)
}

/// Jain operator `B_n^beta(f; x)` evaluated term by term from its definition.
pub fn jain_operator(n: u64, beta: f64, x: f64, f: &FunctionSpec) -> f64 {
    let theta = n as f64 * x;
    if theta == 0.0 {
        return f.eval(0.0);
    }
    // L_{k+1}/L_k = a_{k+1} (a_{k+1}/a_k)^{k-1} e^{-beta} / (k+1), a_k = theta + beta k
    let ratio = |k: u64| {
        let kf = k as f64;
        let a = theta + beta * kf;
        let a1 = a + beta;
        a1.ln() + (kf - 1.0) * (beta / a).ln_1p() - beta - (kf + 1.0).ln()
    };
    sum_by_recurrence(n, -theta, ratio, theta / (1.0 - beta), f)
}

/// Taylor coefficients `c_0 .. c_{count-1}` of an analytic function via the
/// trapezoidal rule on the circle `|u| = radius` with `points` nodes.
pub fn taylor_coefficients(
    h: impl Fn(Complex64) -> Complex64,
    radius: f64,
    count: usize,
    points: usize,
) -> Vec<f64> {
    let samples: Vec<Complex64> = (0..points)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / points as f64;
            h(Complex64::from_polar(radius, theta))
        })
        .collect();
    (0..count)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, s) in samples.iter().enumerate() {
                let theta = 2.0 * std::f64::consts::PI * (j * k) as f64 / points as f64;
                acc += s * Complex64::from_polar(1.0, -theta);
            }
            (acc / points as f64).re / radius.powi(k as i32)
        })
        .collect()
}

/// Finite-difference weights (Fornberg) for the `order`-th derivative at 0
/// on the given stencil offsets.
pub fn fd_weights(offsets: &[f64], order: usize) -> Vec<f64> {
    let n = offsets.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = offsets[0];
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Central finite-difference derivative of the given order with
/// `accuracy`-th order truncation error, step `h`.
pub fn central_derivative(
    g: impl Fn(f64) -> f64,
    x0: f64,
    order: usize,
    accuracy: usize,
    h: f64,
) -> f64 {
    let half = order.div_ceil(2) + accuracy / 2 - 1;
    let offsets: Vec<f64> = (-(half as i64)..=half as i64).map(|j| j as f64).collect();
    let w = fd_weights(&offsets, order);
    let s: f64 = offsets
        .iter()
        .zip(&w)
        .map(|(o, wi)| wi * g(x0 + o * h))
        .sum();
    s / h.powi(order as i32)
}

/// Derivative estimate extrapolated over steps `h, h/2, h/4, ...`
/// assuming an error expansion in `h^accuracy, h^(accuracy+2), ...`.
pub fn richardson_derivative(
    g: impl Fn(f64) -> f64,
    x0: f64,
    order: usize,
    accuracy: usize,
    steps: &[f64],
) -> f64 {
    let mut table: Vec<f64> = steps
        .iter()
        .map(|&h| central_derivative(&g, x0, order, accuracy, h))
        .collect();
    let mut p = accuracy as i32;
    while table.len() > 1 {
        let r = 2f64.powi(p);
        table = table
            .windows(2)
            .map(|w| (r * w[1] - w[0]) / (r - 1.0))
            .collect();
        p += 2;
    }
    table[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_solves_defining_equation() {
        let z = solve_z_bisection(0.3, 0.6);
        assert!((0.6 * z - z.ln() - 0.9).abs() < 1e-15);
        assert_eq!(solve_z_bisection(0.0, 0.4), 1.0);
    }

    #[test]
    fn szasz_moments() {
        // S_n(t; x) = x, S_n(t^2; x) = x^2 + x/n
        let x = 1.3;
        assert!((szasz_mirakyan(9, x, &FunctionSpec::Monomial { m: 1 }) - x).abs() < 1e-14);
        let v = szasz_mirakyan(9, x, &FunctionSpec::Monomial { m: 2 });
        assert!((v - (x * x + x / 9.0)).abs() < 1e-13);
    }

    #[test]
    fn fornberg_weights() {
        let w = fd_weights(&[-1.0, 0.0, 1.0], 2);
        assert_eq!(w, vec![1.0, -2.0, 1.0]);
        let d3 = central_derivative(|t| t.exp(), 0.0, 3, 6, 1e-2);
        assert!((d3 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn contour_coefficients_of_exp() {
        let c = taylor_coefficients(|u| u.exp(), 0.5, 6, 64);
        let mut fact = 1.0;
        for (k, ck) in c.iter().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            assert!((ck - 1.0 / fact).abs() < 1e-13);
        }
    }
}
