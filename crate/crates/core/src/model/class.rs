use crate::error::{Error, Result};

/// Membership of `(n, p)` at sample size `k` in the class `M_λ`:
/// `1/λ <= n p <= λ` and `n <= λ (k / ln k)^{1/6}`.
pub fn in_class_m_lambda(n: u64, p: f64, k: u64, lambda: f64) -> Result<bool> {
    if !(lambda > 1.0) || !lambda.is_finite() {
        return Err(Error::domain(format!("lambda must exceed 1, got {lambda}")));
    }
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("p must lie in (0, 1), got {p}")));
    }
    if k < 2 {
        return Err(Error::domain("k must be at least 2"));
    }
    let np = n as f64 * p;
    // Inclusive ends; tolerate the rounding in p = 1/λ.
    let eps = 1e-12;
    let product_ok = np >= (1.0 / lambda) * (1.0 - eps) && np <= lambda * (1.0 + eps);
    let kf = k as f64;
    let size_ok = n as f64 <= lambda * (kf / kf.ln()).powf(1.0 / 6.0);
    Ok(product_ok && size_ok)
}

/// `1 − (1 − p^n)^k`, the probability that the sample maximum equals `n`.
pub fn prob_sample_max_correct(n: u64, p: f64, k: u64) -> Result<f64> {
    if n == 0 || k == 0 {
        return Err(Error::domain("n and k must be at least 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("p must lie in (0, 1), got {p}")));
    }
    let pn = (n as f64 * p.ln()).exp();
    Ok(-(k as f64 * (-pn).ln_1p()).exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_examples() {
        assert!(in_class_m_lambda(10, 0.1, 1_000_000, 2.0).unwrap());
        assert!(!in_class_m_lambda(100, 0.5, 1_000_000, 2.0).unwrap());
        assert!(in_class_m_lambda(1, 1.0 / 1.5, 100, 1.5).unwrap());
        assert!(matches!(in_class_m_lambda(1, 0.5, 100, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn size_constraint() {
        // (10^6 / ln 10^6)^{1/6} ≈ 6.455
        assert!(in_class_m_lambda(12, 1.0 / 12.0, 1_000_000, 2.0).unwrap());
        assert!(!in_class_m_lambda(13, 1.0 / 13.0, 1_000_000, 2.0).unwrap());
    }

    #[test]
    fn prob_max_examples() {
        assert!((prob_sample_max_correct(1, 0.5, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((prob_sample_max_correct(2, 0.5, 2).unwrap() - 0.4375).abs() < 1e-15);
        let v = prob_sample_max_correct(25, 0.2, 1_000_000).unwrap();
        let kpn = 1e6 * 0.2f64.powi(25);
        let slack = 1e-13 * kpn;
        assert!(v <= kpn + slack && v >= -(-kpn).exp_m1() - slack);
        assert!((v / 3.3554432e-12 - 1.0).abs() < 1e-5, "{v}");
    }
}
