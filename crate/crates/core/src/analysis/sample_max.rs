//! Closed-form risk of the sample maximum.
//!
//! `E[(n − M_k)²] = Σ_{j=1}^{n} (2j − 1) P(M_k <= n − j)` with
//! `P(M_k <= x) = (1 − P(X > x))^k`. All terms are positive, so the sum is
//! accurate for any `k`, including far past the point where simulation can
//! resolve the event `M_k = n`.

use crate::error::{Error, Result};
use crate::special::log_add_exp;

/// Exact MSE of the sample maximum of `k` draws from `Bin(n, p)`.
pub fn sample_max_mse(n: u64, p: f64, k: f64) -> Result<f64> {
    if n == 0 || !(p > 0.0 && p < 1.0) || !(k >= 1.0) {
        return Err(Error::domain(format!("need n >= 1, p in (0, 1), k >= 1 (n={n}, p={p}, k={k})")));
    }
    let nf = n as f64;
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let ln_n1 = libm::lgamma(nf + 1.0);
    let log_pmf = |x: f64| ln_n1 - libm::lgamma(x + 1.0) - libm::lgamma(nf - x + 1.0) + x * lp + (nf - x) * lq;
    let mut mse = 0.0;
    // Upper tail ln P(X > x), built from x = n − 1 downward.
    let mut log_upper = f64::NEG_INFINITY;
    for j in 1..=n {
        let x = n - j;
        log_upper = log_add_exp(log_upper, log_pmf((x + 1) as f64));
        let upper = log_upper.exp();
        let log_cdf_k = if upper < 1.0 { k * (-upper).ln_1p() } else { f64::NEG_INFINITY };
        let term = (2 * j - 1) as f64 * log_cdf_k.exp();
        mse += term;
        if term < 1e-300 {
            break;
        }
    }
    Ok(mse)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_enumeration_for_small_cases() {
        // n = 2, p = 1/2, k = 2: M = 2 w.p. 1 − (3/4)², M = 1 w.p. (3/4)² − (1/4)², M = 0 w.p. (1/4)².
        let want = 1.0 * (0.5625 - 0.0625) + 4.0 * 0.0625;
        assert!((sample_max_mse(2, 0.5, 2.0).unwrap() - want).abs() < 1e-15);
        assert!((sample_max_mse(1, 0.3, 1.0).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn decreasing_in_k() {
        let mut last = f64::INFINITY;
        for e in 0..25 {
            let v = sample_max_mse(25, 0.2, 10f64.powi(e)).unwrap();
            assert!(v <= last);
            last = v;
        }
        assert!(last < 0.1);
    }
}
