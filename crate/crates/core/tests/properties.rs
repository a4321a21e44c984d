use binq_core::estimators::{sample_max, scale_estimator};
use binq_core::special::ln_gamma;
use binq_core::{build_posterior, log_beta_binomial_likelihood, prob_sample_max_correct, PriorSpec, SampleCounts};
use proptest::prelude::*;

fn observations(max_len: usize) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0u64..40, 1..max_len)
}

fn prior() -> impl Strategy<Value = PriorSpec> {
    (prop::sample::select(vec![0.5, 1.0, 2.0]), prop::sample::select(vec![0.75, 1.0, 5.0]), prop::sample::select(vec![1.0, 5.0]))
        .prop_filter("gamma + a > 1", |(g, a, _)| g + a > 1.0)
        .prop_map(|(g, a, b)| PriorSpec::new(g, a, b).unwrap())
}

fn naive_log_likelihood(xs: &[u64], m: u64, a: f64, b: f64) -> f64 {
    let k = xs.len() as f64;
    let s: u64 = xs.iter().sum();
    let lb = |x: f64, y: f64| ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y);
    let mut acc = 0.0;
    for &x in xs {
        acc += ln_gamma(m as f64 + 1.0) - ln_gamma(x as f64 + 1.0) - ln_gamma((m - x) as f64 + 1.0);
    }
    acc + lb(a + s as f64, b + k * m as f64 - s as f64) - lb(a, b)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn posterior_is_normalized(xs in observations(60), prior in prior()) {
        let c = SampleCounts::from_observations(&xs).unwrap();
        let t = build_posterior(&c, &prior, 1e-12).unwrap();
        let total: f64 = t.weights().map(|(_, w)| w).sum::<f64>() + t.tail_mass();
        prop_assert!((total - 1.0).abs() <= 1e-12, "total {total}");
        prop_assert!(t.tail_bound_rel() <= 1e-12);
    }

    #[test]
    fn frequency_form_equals_naive_sum(xs in observations(200), m_extra in 0u64..200, a in 0.5f64..6.0, b in 0.5f64..6.0) {
        let c = SampleCounts::from_observations(&xs).unwrap();
        let m = c.max() + m_extra;
        let prior = PriorSpec::new(1.0, a, b).unwrap();
        let got = log_beta_binomial_likelihood(&c, m, &prior).unwrap();
        let want = naive_log_likelihood(&xs, m, a, b);
        prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "{got} vs {want}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 10_000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn scale_estimate_is_at_least_the_sample_max(xs in observations(30), prior in prior()) {
        let c = SampleCounts::from_observations(&xs).unwrap();
        let t = build_posterior(&c, &prior, 1e-12).unwrap();
        let est = scale_estimator(&t);
        prop_assert!(est >= sample_max(&c) as f64, "{est} < {}", sample_max(&c));
    }
}

#[test]
fn prob_sample_max_bounds_on_grid() {
    // 10 × 10 × 10 points; k p^n sits between 1e-30 and 1e10.
    let mut checked = 0;
    for n in [1u64, 2, 3, 5, 8, 13, 25, 50, 100, 400] {
        for p in [0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999] {
            for k in [1u64, 2, 10, 100, 1_000, 10_000, 1_000_000, 100_000_000, 10_000_000_000, 1_000_000_000_000] {
                let v = prob_sample_max_correct(n, p, k).unwrap();
                let kpn = k as f64 * (n as f64 * f64::ln(p)).exp();
                let slack = 1e-12 * v.max(1e-300);
                assert!((0.0..=1.0).contains(&v));
                assert!(v <= kpn * (1.0 + 1e-12) + 1e-300, "n={n} p={p} k={k}: {v} > {kpn}");
                assert!(v >= -(-kpn).exp_m1() - slack, "n={n} p={p} k={k}");
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 1000);
}
