//! Log-gamma and the saddle-point pieces used for Poisson-type log weights.

use crate::error::{Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// k! for k = 0..=20 is exact in u64.
const FACTORIALS: [u64; 21] = {
    let mut t = [1u64; 21];
    let mut k = 1;
    while k < 21 {
        t[k] = t[k - 1] * k as u64;
        k += 1;
    }
    t
};

// lnGamma(k+1) - (k+1/2) ln k + k - ln(2 pi)/2 for k = 1..=15
const STIRLING_ERROR_TABLE: [f64; 15] = [
    0.081_061_466_795_327_26,
    0.041_340_695_955_409_3,
    0.027_677_925_684_998_34,
    0.020_790_672_103_765_093,
    0.016_644_691_189_821_193,
    0.013_876_128_823_070_748,
    0.011_896_709_945_891_77,
    0.010_411_265_261_972_096,
    0.009_255_462_182_712_733,
    0.008_330_563_433_362_87,
    0.007_573_675_487_951_841,
    0.006_942_840_107_209_53,
    0.006_408_994_188_004_207,
    0.005_951_370_112_758_847_5,
    0.005_554_733_551_962_801,
];

/// `ln Gamma(x)` for `x > 0`.
///
/// Positive integers up to 21 go through the exact factorial table; other
/// arguments are shifted above 10 and fed to the Stirling series.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_infinite() {
        return Err(Error::Domain(format!(
            "log_gamma requires finite x > 0, got {x}"
        )));
    }
    if x.fract() == 0.0 && x <= 21.0 {
        return Ok((FACTORIALS[x as usize - 1] as f64).ln());
    }
    let mut shift = 0.0;
    let mut y = x;
    let mut prod = 1.0;
    while y < 10.0 {
        prod *= y;
        y += 1.0;
    }
    if prod != 1.0 {
        shift = prod.ln();
    }
    Ok(stirling_series(y) - shift)
}

fn stirling_series(y: f64) -> f64 {
    let r = 1.0 / y;
    let r2 = r * r;
    let corr = r
        * (1.0 / 12.0
            - r2 * (1.0 / 360.0
                - r2 * (1.0 / 1260.0
                    - r2 * (1.0 / 1680.0
                        - r2 * (1.0 / 1188.0 - r2 * (691.0 / 360_360.0 - r2 / 156.0))))));
    (y - 0.5) * y.ln() - y + HALF_LN_2PI + corr
}

/// `ln(k!)`; exact to rounding for `k <= 20`.
pub fn ln_factorial(k: u64) -> f64 {
    if k <= 20 {
        (FACTORIALS[k as usize] as f64).ln()
    } else {
        stirling_series(k as f64 + 1.0)
    }
}

/// Stirling remainder `ln(k!) - (k + 1/2) ln k + k - ln(2 pi)/2` for `k >= 1`.
pub fn stirling_error(k: u64) -> f64 {
    debug_assert!(k >= 1);
    if k <= 15 {
        return STIRLING_ERROR_TABLE[k as usize - 1];
    }
    let r = 1.0 / k as f64;
    let r2 = r * r;
    r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))))
}

/// Deviance term `k ln(k / mean) + mean - k`, computed without cancellation
/// when `k` is close to `mean`.
pub fn poisson_deviance(k: f64, mean: f64) -> f64 {
    let diff = k - mean;
    if diff.abs() < 0.1 * (k + mean) {
        let v = diff / (k + mean);
        let v2 = v * v;
        let mut s = diff * v;
        let mut ej = 2.0 * k * v;
        for j in 1..1000 {
            ej *= v2;
            let next = s + ej / (2 * j + 1) as f64;
            if next == s {
                break;
            }
            s = next;
        }
        s
    } else {
        k * (k / mean).ln() + mean - k
    }
}
