use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::EstimatorId;
use crate::experiments::CurvePoint;

/// Default fit window.
pub const DEFAULT_K_LO: f64 = 1e7;
pub const DEFAULT_K_HI: f64 = 1e9;
/// MSE level below which the curve is taken to have left the power-law
/// regime.
pub const DEFAULT_THRESHOLD: f64 = 0.1;

/// Least-squares fit of `ln mse = c + β ln k`. `β < 0` means the MSE decays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub scenario_id: String,
    pub estimator_id: EstimatorId,
    pub beta: f64,
    pub intercept: f64,
    pub k_lo: f64,
    pub k_hi: f64,
    pub n_points: usize,
    pub r2: f64,
    pub stderr_beta: f64,
    /// First `k` with `mse` below the threshold, when known.
    pub knee: Option<u64>,
}

/// Fits the slope over the points with `k_lo <= k <= k_hi`. Points with zero
/// MSE are dropped with a warning.
pub fn fit_slope(points: &[CurvePoint], k_lo: f64, k_hi: f64) -> Result<SlopeFit> {
    if !(k_lo < k_hi) {
        return Err(Error::domain(format!("fit window [{k_lo}, {k_hi}] is empty")));
    }
    let first = points
        .first()
        .ok_or_else(|| Error::InsufficientData("no curve points".into()))?;
    if points
        .iter()
        .any(|p| p.scenario_id != first.scenario_id || p.estimator_id != first.estimator_id)
    {
        return Err(Error::domain("fit_slope needs points of a single scenario and estimator"));
    }
    let mut xy = Vec::new();
    for p in points.iter().filter(|p| (k_lo..=k_hi).contains(&(p.k as f64))) {
        if p.mse > 0.0 {
            xy.push(((p.k as f64).ln(), p.mse.ln()));
        } else {
            log::warn!(
                "{} / {}: zero MSE at k={} excluded from the fit",
                p.scenario_id,
                p.estimator_id,
                p.k
            );
        }
    }
    if xy.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} / {}: {} usable points in [{k_lo:e}, {k_hi:e}], need 3",
            first.scenario_id,
            first.estimator_id,
            xy.len()
        )));
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InsufficientData("all points share one k".into()));
    }
    let beta = sxy / sxx;
    let intercept = my - beta * mx;
    let ss_res: f64 = xy.iter().map(|p| (p.1 - intercept - beta * p.0).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    let stderr_beta = (ss_res.max(0.0) / (n - 2.0) / sxx).sqrt();
    Ok(SlopeFit {
        scenario_id: first.scenario_id.clone(),
        estimator_id: first.estimator_id,
        beta,
        intercept,
        k_lo,
        k_hi,
        n_points: xy.len(),
        r2,
        stderr_beta,
        knee: None,
    })
}

/// First `k` (points sorted by `k`) with `mse < threshold`.
pub fn detect_phase_transition(points: &[CurvePoint], threshold: f64) -> Option<u64> {
    points.iter().find(|p| p.mse < threshold).map(|p| p.k)
}

/// [`fit_slope`] with the window cut just below the phase-transition knee
/// when the knee falls inside it.
pub fn fit_slope_before_knee(points: &[CurvePoint], k_lo: f64, k_hi: f64, threshold: f64) -> Result<SlopeFit> {
    let mut sorted = points.to_vec();
    sorted.sort_by_key(|p| p.k);
    let knee = detect_phase_transition(&sorted, threshold);
    let mut hi = k_hi;
    if let Some(kn) = knee {
        if (kn as f64) <= k_hi {
            hi = sorted
                .iter()
                .map(|p| p.k as f64)
                .filter(|&k| k < kn as f64)
                .fold(f64::NEG_INFINITY, f64::max);
            if !(hi > k_lo) {
                return Err(Error::InsufficientData(format!(
                    "phase transition at k={kn} leaves nothing of the window [{k_lo:e}, {k_hi:e}]"
                )));
            }
        }
    }
    let mut fit = fit_slope(&sorted, k_lo, hi)?;
    fit.knee = knee;
    Ok(fit)
}

/// Splits mixed curve points into per-(scenario, estimator) series,
/// preserving first-appearance order, each sorted by `k`.
pub fn split_curves(points: &[CurvePoint]) -> Vec<Vec<CurvePoint>> {
    let mut out: Vec<Vec<CurvePoint>> = Vec::new();
    for p in points {
        match out
            .iter_mut()
            .find(|s| s[0].scenario_id == p.scenario_id && s[0].estimator_id == p.estimator_id)
        {
            Some(s) => s.push(p.clone()),
            None => out.push(vec![p.clone()]),
        }
    }
    for s in &mut out {
        s.sort_by_key(|p| p.k);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn curve(pts: &[(u64, f64)]) -> Vec<CurvePoint> {
        pts.iter()
            .map(|&(k, mse)| CurvePoint {
                scenario_id: "s".into(),
                estimator_id: EstimatorId::SampleMax,
                k,
                mse,
                mse_stderr: 0.0,
                mean_posterior_prob: None,
                reps: 1,
            })
            .collect()
    }

    #[test]
    fn exact_power_law() {
        let pts: Vec<(u64, f64)> = (0..9)
            .map(|i| {
                let k = 10f64.powf(7.0 + i as f64 / 4.0).round();
                (k as u64, 10.0 * k.powf(-0.5))
            })
            .collect();
        let f = fit_slope(&curve(&pts), 1e7, 1e9).unwrap();
        assert!((f.beta + 0.5).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(f.stderr_beta < 1e-10);
        assert_eq!(f.n_points, 9);
    }

    #[test]
    fn constant_curve_has_zero_slope() {
        let f = fit_slope(&curve(&[(10_000_000, 3.0), (100_000_000, 3.0), (1_000_000_000, 3.0)]), 1e7, 1e9).unwrap();
        assert!(f.beta.abs() < 1e-15);
    }

    #[test]
    fn two_decade_halving() {
        let f = fit_slope(&curve(&[(10_000_000, 2.0), (100_000_000, 1.0), (1_000_000_000, 0.5)]), 1e7, 1e9).unwrap();
        assert!((f.beta + std::f64::consts::LOG10_2).abs() < 1e-12, "{}", f.beta);
    }

    #[test]
    fn too_few_points() {
        let e = fit_slope(&curve(&[(10_000_000, 2.0), (100_000_000, 0.0), (1_000_000_000, 0.5)]), 1e7, 1e9);
        assert!(matches!(e, Err(Error::InsufficientData(_))));
    }

    #[test]
    fn knee_detection_and_clipping() {
        let c = curve(&[(1_000_000, 5.0), (10_000_000, 2.0), (31_622_777, 1.4), (100_000_000, 0.05), (1_000_000_000, 1e-4)]);
        assert_eq!(detect_phase_transition(&c, 0.1), Some(100_000_000));
        assert_eq!(detect_phase_transition(&c, 1e-5), None);
        let f = fit_slope_before_knee(&c, 1e6, 1e9, 0.1).unwrap();
        assert_eq!(f.knee, Some(100_000_000));
        assert_eq!(f.k_hi, 31_622_777.0);
        assert_eq!(f.n_points, 3);
    }
}
