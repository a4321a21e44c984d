use binq_core::analysis::{detect_phase_transition, fit_slope, fit_slope_before_knee, sweep_beta_of_alpha};
use binq_core::estimators::EstimatorId;
use binq_core::experiments::CurvePoint;
use proptest::prelude::*;

fn curve(ks: &[u64], mse: impl Fn(f64) -> f64) -> Vec<CurvePoint> {
    ks.iter()
        .map(|&k| CurvePoint {
            scenario_id: "s".into(),
            estimator_id: EstimatorId::SampleMax,
            k,
            mse: mse(k as f64),
            mse_stderr: 0.0,
            mean_posterior_prob: None,
            reps: 1,
        })
        .collect()
}

fn grid(per_decade: u32) -> Vec<u64> {
    let n = 2 * per_decade;
    (0..=n).map(|i| 10f64.powf(7.0 + i as f64 / per_decade as f64).round() as u64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn power_laws_are_recovered(beta in -3.0f64..3.0, c in -5.0f64..5.0, per_decade in 2u32..9) {
        let pts = curve(&grid(per_decade), |k| (c + beta * k.ln()).exp());
        let f = fit_slope(&pts, 1e7, 1e9).unwrap();
        prop_assert!((f.beta - beta).abs() < 1e-10);
        prop_assert!((f.intercept - c).abs() < 1e-8);
        prop_assert!(f.stderr_beta < 1e-8);
    }

    #[test]
    fn slope_ignores_mse_scale(
        mses in prop::collection::vec(1e-6f64..1e3, 9),
        factor in 1e-6f64..1e6,
    ) {
        let ks = grid(4);
        let a = curve(&ks, |k| mses[ks.iter().position(|&x| x as f64 == k).unwrap()]);
        let b: Vec<CurvePoint> = a.iter().cloned().map(|mut p| { p.mse *= factor; p }).collect();
        let fa = fit_slope(&a, 1e7, 1e9).unwrap();
        let fb = fit_slope(&b, 1e7, 1e9).unwrap();
        prop_assert!((fa.beta - fb.beta).abs() < 1e-9 * (1.0 + fa.beta.abs()));
        prop_assert!((fb.intercept - fa.intercept - factor.ln()).abs() < 1e-8);
        prop_assert!((fa.r2 - fb.r2).abs() < 1e-9);
    }

    #[test]
    fn knee_moves_later_as_threshold_falls(
        mses in prop::collection::vec(1e-6f64..1e3, 9),
        t1 in 1e-6f64..1e3,
        t2 in 1e-6f64..1e3,
    ) {
        let ks = grid(4);
        let pts = curve(&ks, |k| mses[ks.iter().position(|&x| x as f64 == k).unwrap()]);
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        match (detect_phase_transition(&pts, lo), detect_phase_transition(&pts, hi)) {
            (Some(a), Some(b)) => prop_assert!(a >= b),
            (Some(_), None) => prop_assert!(false, "a lower threshold found a knee the higher one missed"),
            _ => {}
        }
    }

    #[test]
    fn pre_knee_fit_stays_below_the_knee(beta in -1.0f64..-0.05, threshold in 1e-3f64..1.0) {
        let pts = curve(&grid(4), |k| 10.0 * (k / 1e7).powf(beta));
        if let Ok(f) = fit_slope_before_knee(&pts, 1e7, 1e9, threshold) {
            if let Some(kn) = f.knee {
                prop_assert!(f.k_hi < kn as f64);
            }
            prop_assert!((f.beta - beta).abs() < 1e-10);
        }
    }

    #[test]
    fn linear_beta_of_alpha_has_exact_zero(root in 2.5f64..7.5, slope in -2.0f64..-0.01) {
        let table: Vec<(f64, f64)> = (2..=8).map(|a| (a as f64, slope * (a as f64 - root))).collect();
        let s = sweep_beta_of_alpha(&table).unwrap();
        prop_assert!((s.alpha_star - root).abs() < 1e-9);
        prop_assert!(s.bracket.0 <= root && root <= s.bracket.1);
    }
}
