//! Extended-precision reference values shared by the integration tests.
#![allow(dead_code)]

use rug::Float;

const PREC: u32 = 256;

fn f(x: f64) -> Float {
    Float::with_val(PREC, x)
}

fn ln_gamma(x: Float) -> Float {
    x.ln_gamma()
}

fn ln_beta(a: Float, b: Float) -> Float {
    let s = Float::with_val(PREC, &a + &b);
    ln_gamma(a) + ln_gamma(b) - ln_gamma(s)
}

/// `ln L_{a,b}(m)` for data given as `(x, count)` pairs.
pub fn ln_likelihood(pairs: &[(u64, u64)], m: u64, a: f64, b: f64) -> Float {
    let k: u64 = pairs.iter().map(|p| p.1).sum();
    let s: u64 = pairs.iter().map(|p| p.0 * p.1).sum();
    let mut acc = f(0.0);
    let lm = ln_gamma(f(m as f64 + 1.0));
    for &(x, c) in pairs {
        let term = Float::with_val(PREC, &lm - ln_gamma(f(x as f64 + 1.0))) - ln_gamma(f((m - x) as f64 + 1.0));
        acc += term * c as f64;
    }
    let km = Float::with_val(PREC, k) * m;
    let bb = Float::with_val(PREC, &km - s) + b;
    acc + ln_beta(f(a + s as f64), bb) - ln_beta(f(a), f(b))
}

/// Normalized posterior masses of `N` on `lo..=hi` under the prior
/// `m^{-γ}`. The normalizer sums densely to `m_max` and adds the
/// Euler–Maclaurin estimate of the power-law remainder with exponent `a + γ`.
pub fn posterior_masses(pairs: &[(u64, u64)], gamma: f64, a: f64, b: f64, lo: u64, hi: u64, m_max: u64) -> Vec<f64> {
    let m0 = pairs.iter().map(|p| p.0).max().unwrap().max(1);
    let log_w = |m: u64| ln_likelihood(pairs, m, a, b) - Float::with_val(PREC, m).ln() * gamma;
    let mut total = f(0.0);
    let mut last = f(0.0);
    for m in m0..=m_max {
        last = log_w(m).exp();
        total += &last;
    }
    let s = a + gamma;
    // Σ_{m > M} w_m ≈ w_M (M / (s − 1) − 1/2).
    total += last * (m_max as f64 / (s - 1.0) - 0.5);
    (lo..=hi)
        .map(|m| if m < m0 { 0.0 } else { (log_w(m).exp() / &total).to_f64() })
        .collect()
}

/// Scale estimator `E[1/N] / E[1/N²]` from the same dense sum.
pub fn scale_estimate(pairs: &[(u64, u64)], gamma: f64, a: f64, b: f64, m_max: u64) -> f64 {
    let m0 = pairs.iter().map(|p| p.0).max().unwrap().max(1);
    let mut shift = None;
    let mut e1 = f(0.0);
    let mut e2 = f(0.0);
    for m in m0..=m_max {
        let lw = ln_likelihood(pairs, m, a, b) - Float::with_val(PREC, m).ln() * gamma;
        let sh = shift.get_or_insert_with(|| lw.clone()).clone();
        let w = Float::with_val(PREC, lw - sh).exp();
        let mf = m as f64;
        e1 += Float::with_val(PREC, &w / mf);
        e2 += w / (mf * mf);
    }
    (e1 / e2).to_f64()
}
