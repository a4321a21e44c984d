//! How a figure's curves are reduced to slopes and `β(α)` sweeps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::report::Layout;
use crate::analysis::slope::{fit_slope_before_knee, split_curves, SlopeFit, DEFAULT_K_HI, DEFAULT_K_LO, DEFAULT_THRESHOLD};
use crate::analysis::sweep::{sweep_beta_of_alpha, AlphaStar};
use crate::error::{Error, Result};
use crate::experiments::CurvePoint;
use crate::sampling::{Regime, ScenarioSpec};

fn default_k_lo() -> f64 {
    DEFAULT_K_LO
}

fn default_k_hi() -> f64 {
    DEFAULT_K_HI
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

/// Fit window and knee threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitWindow {
    #[serde(default = "default_k_lo")]
    pub k_lo: f64,
    #[serde(default = "default_k_hi")]
    pub k_hi: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow {
            k_lo: DEFAULT_K_LO,
            k_hi: DEFAULT_K_HI,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

/// Analysis section of an experiment config.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    #[serde(default)]
    pub layout: Layout,
    #[serde(default)]
    pub fit: FitWindow,
    /// Per-scenario windows `[k_lo, k_hi]` replacing the default one.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub windows: BTreeMap<String, [f64; 2]>,
}

impl AnalysisSpec {
    pub fn validate(&self, scenarios: &[ScenarioSpec]) -> Result<()> {
        let check = |lo: f64, hi: f64, what: &str| {
            if lo > 0.0 && lo < hi && hi.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("analysis: window of {what} must satisfy 0 < k_lo < k_hi, got [{lo}, {hi}]")))
            }
        };
        check(self.fit.k_lo, self.fit.k_hi, "the fit")?;
        if !(self.fit.threshold > 0.0) {
            return Err(Error::Config("analysis: threshold must be positive".into()));
        }
        for (id, [lo, hi]) in &self.windows {
            if !scenarios.iter().any(|s| &s.id == id) {
                return Err(Error::Config(format!("analysis: window for unknown scenario `{id}`")));
            }
            check(*lo, *hi, id)?;
        }
        if self.layout == Layout::AlphaBeta {
            for s in scenarios {
                if alpha_of(&s.regime).is_none() {
                    return Err(Error::Config(format!("analysis: scenario `{}` has no alpha to sweep over", s.id)));
                }
            }
        }
        Ok(())
    }

    /// Window for one scenario.
    pub fn window(&self, scenario_id: &str) -> (f64, f64) {
        match self.windows.get(scenario_id) {
            Some([lo, hi]) => (*lo, *hi),
            None => (self.fit.k_lo, self.fit.k_hi),
        }
    }

    /// Replaces the default window and threshold; per-scenario windows are dropped
    /// when a window is given.
    pub fn with_overrides(mut self, k_lo: Option<f64>, k_hi: Option<f64>, threshold: Option<f64>) -> Self {
        if k_lo.is_some() || k_hi.is_some() {
            self.windows.clear();
        }
        self.fit.k_lo = k_lo.unwrap_or(self.fit.k_lo);
        self.fit.k_hi = k_hi.unwrap_or(self.fit.k_hi);
        self.fit.threshold = threshold.unwrap_or(self.fit.threshold);
        self
    }
}

/// Growth exponent of a regime, if it has one.
pub fn alpha_of(regime: &Regime) -> Option<f64> {
    match *regime {
        Regime::Coupled { alpha, .. } | Regime::FixedP { alpha, .. } => Some(alpha),
        Regime::FixedNp { .. } | Regime::LogCoupled { .. } => None,
    }
}

/// Slope of every curve. Curves that cannot be fitted are skipped with a
/// warning.
pub fn fit_curves(curves: &[CurvePoint], spec: &AnalysisSpec) -> Vec<SlopeFit> {
    let mut fits = Vec::new();
    for series in split_curves(curves) {
        let id = &series[0].scenario_id;
        let (lo, hi) = spec.window(id);
        match fit_slope_before_knee(&series, lo, hi, spec.fit.threshold) {
            Ok(f) => fits.push(f),
            Err(e) => log::warn!("no slope for {id} / {}: {e}", series[0].estimator_id),
        }
    }
    fits
}

/// Per estimator label: `α` bits -> (α, Σβ, count).
type BetaSums = Vec<(String, BTreeMap<u64, (f64, f64, usize)>)>;

/// One `β(α)` sweep per estimator, over the scenarios that have an `α`.
/// When several scenarios share an `α` their slopes are averaged.
pub fn sweep_fits(fits: &[SlopeFit], scenarios: &[ScenarioSpec]) -> Result<Vec<(String, AlphaStar)>> {
    let mut by_estimator: BetaSums = Vec::new();
    for f in fits {
        let Some(alpha) = scenarios
            .iter()
            .find(|s| s.id == f.scenario_id)
            .and_then(|s| alpha_of(&s.regime))
        else {
            continue;
        };
        let label = f.estimator_id.to_string();
        let idx = match by_estimator.iter().position(|(l, _)| *l == label) {
            Some(i) => i,
            None => {
                by_estimator.push((label, BTreeMap::new()));
                by_estimator.len() - 1
            }
        };
        let e = by_estimator[idx].1.entry(alpha.to_bits()).or_insert((alpha, 0.0, 0));
        e.1 += f.beta;
        e.2 += 1;
    }
    let mut out = Vec::new();
    for (label, table) in by_estimator {
        let mut rows: Vec<(f64, f64)> = table.values().map(|&(a, s, n)| (a, s / n as f64)).collect();
        rows.sort_by(|x, y| x.0.total_cmp(&y.0));
        out.push((label, sweep_beta_of_alpha(&rows)?));
    }
    Ok(out)
}
