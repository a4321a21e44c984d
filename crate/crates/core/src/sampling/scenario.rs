//! Asymptotic regimes `k ↦ (n_k, p_k)` and their k-grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::stream::scenario_key;

/// How `(n, p)` depends on the sample size `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Regime {
    /// `n = round(w k^{1/α})`, `p = μ / n`.
    Coupled { alpha: f64, w: f64, mu: f64 },
    /// `n = round(w k^{1/α})`, `p` fixed.
    FixedP { alpha: f64, w: f64, p: f64 },
    /// Both fixed.
    FixedNp { n: u64, p: f64 },
    /// `n = round(w ln k)`, `p = μ / n`.
    LogCoupled { w: f64, mu: f64 },
}

impl Regime {
    fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidScenario(format!("{name} must be positive, got {v}")))
            }
        };
        let prob = |v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidScenario(format!("p must lie in [0, 1], got {v}")))
            }
        };
        match *self {
            Regime::Coupled { alpha, w, mu } => {
                pos("alpha", alpha)?;
                pos("w", w)?;
                pos("mu", mu)
            }
            Regime::FixedP { alpha, w, p } => {
                pos("alpha", alpha)?;
                pos("w", w)?;
                if p > 0.0 && p < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidScenario(format!("fixed p must lie in (0, 1), got {p}")))
                }
            }
            Regime::FixedNp { n, p } => {
                if n == 0 {
                    return Err(Error::InvalidScenario("n must be at least 1".into()));
                }
                prob(p)
            }
            Regime::LogCoupled { w, mu } => {
                pos("w", w)?;
                pos("mu", mu)
            }
        }
    }

    /// `(n_k, p_k)`; an error when the derived `p` exceeds 1.
    pub fn parameters(&self, k: u64) -> Result<(u64, f64)> {
        if k == 0 {
            return Err(Error::InvalidScenario("k must be at least 1".into()));
        }
        let kf = k as f64;
        let power_n = |alpha: f64, w: f64| ((w * kf.powf(1.0 / alpha)).round() as u64).max(1);
        let (n, p) = match *self {
            Regime::Coupled { alpha, w, mu } => {
                let n = power_n(alpha, w);
                (n, mu / n as f64)
            }
            Regime::FixedP { alpha, w, p } => (power_n(alpha, w), p),
            Regime::FixedNp { n, p } => (n, p),
            Regime::LogCoupled { w, mu } => {
                let n = ((w * kf.ln()).round() as u64).max(1);
                (n, mu / n as f64)
            }
        };
        if p > 1.0 {
            return Err(Error::InvalidScenario(format!(
                "derived p = {p} exceeds 1 at k={k} (n={n})"
            )));
        }
        Ok((n, p))
    }
}

/// Sample sizes of a scenario: an explicit list, or a geometric grid with a
/// fixed number of points per decade.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KGrid {
    List(Vec<f64>),
    Geometric { from: f64, to: f64, per_decade: u32 },
}

impl KGrid {
    pub fn resolve(&self) -> Result<Vec<u64>> {
        let as_int = |v: f64| -> Result<u64> {
            if v >= 1.0 && v.fract() == 0.0 && v < 2f64.powi(53) {
                Ok(v as u64)
            } else {
                Err(Error::InvalidScenario(format!("k must be a positive integer, got {v}")))
            }
        };
        let ks: Vec<u64> = match self {
            KGrid::List(v) => v.iter().map(|&x| as_int(x)).collect::<Result<_>>()?,
            &KGrid::Geometric { from, to, per_decade } => {
                if per_decade == 0 {
                    return Err(Error::InvalidScenario("per_decade must be at least 1".into()));
                }
                let lo = as_int(from)? as f64;
                let hi = as_int(to)? as f64;
                let (l0, l1) = (lo.log10(), hi.log10());
                let steps = ((l1 - l0) * per_decade as f64 + 1e-9).floor() as u32;
                let mut out: Vec<u64> = (0..=steps)
                    .map(|i| 10f64.powf(l0 + i as f64 / per_decade as f64).round() as u64)
                    .collect();
                out.dedup();
                out
            }
        };
        if ks.is_empty() {
            return Err(Error::InvalidScenario("k-grid is empty".into()));
        }
        if ks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidScenario("k-grid must be strictly increasing".into()));
        }
        Ok(ks)
    }
}

/// One regime cell of the study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub id: String,
    pub regime: Regime,
    pub k_grid: KGrid,
    pub replications: u32,
    pub seed: u64,
    /// Reuse one stream per replication across all k (paired curves).
    #[serde(default)]
    pub paired: bool,
}

impl ScenarioSpec {
    /// Checks the regime and that every grid point yields a valid `(n, p)`.
    pub fn validate(&self) -> Result<Vec<u64>> {
        if self.id.is_empty() || self.id.contains([',', '\n', '"']) {
            return Err(Error::InvalidScenario(format!("scenario id `{}` is empty or has reserved characters", self.id)));
        }
        self.regime.validate()?;
        if self.replications == 0 || self.replications > 1 << 16 {
            return Err(Error::InvalidScenario(format!(
                "replications must lie in [1, 65536], got {}",
                self.replications
            )));
        }
        let ks = self.k_grid.resolve()?;
        for &k in &ks {
            self.regime
                .parameters(k)
                .map_err(|e| Error::InvalidScenario(format!("scenario `{}`: {e}", self.id)))?;
        }
        Ok(ks)
    }

    /// Stream key of this scenario.
    pub fn stream_key(&self) -> u64 {
        scenario_key(&self.id)
    }
}

/// `(n_k, p_k)` for a grid point of the scenario.
pub fn derive_parameters(spec: &ScenarioSpec, k: u64) -> Result<(u64, f64)> {
    let ks = spec.k_grid.resolve()?;
    if ks.binary_search(&k).is_err() {
        return Err(Error::domain(format!("k={k} is not on the grid of scenario `{}`", spec.id)));
    }
    spec.regime.parameters(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(regime: Regime, ks: Vec<f64>) -> ScenarioSpec {
        ScenarioSpec {
            id: "t".into(),
            regime,
            k_grid: KGrid::List(ks),
            replications: 3,
            seed: 1,
            paired: false,
        }
    }

    #[test]
    fn coupled_examples() {
        let s = spec(Regime::Coupled { alpha: 6.0, w: 16.0, mu: 25.0 }, vec![1e6]);
        assert_eq!(derive_parameters(&s, 1_000_000).unwrap(), (160, 0.15625));
        let s = spec(Regime::Coupled { alpha: 3.0, w: 5.0, mu: 25.0 }, vec![1e6]);
        assert_eq!(derive_parameters(&s, 1_000_000).unwrap(), (500, 0.05));
    }

    #[test]
    fn fixed_examples() {
        let s = spec(Regime::FixedNp { n: 100, p: 0.05 }, vec![10.0, 1e9]);
        assert_eq!(derive_parameters(&s, 10).unwrap(), (100, 0.05));
        assert_eq!(derive_parameters(&s, 1_000_000_000).unwrap(), (100, 0.05));
        let s = spec(Regime::FixedP { alpha: 6.0, w: 16.0, p: 0.05 }, vec![1e6]);
        assert_eq!(derive_parameters(&s, 1_000_000).unwrap(), (160, 0.05));
        assert!(derive_parameters(&s, 999).is_err());
    }

    #[test]
    fn p_above_one_is_rejected() {
        let s = spec(Regime::Coupled { alpha: 6.0, w: 16.0, mu: 25.0 }, vec![1.0, 1e6]);
        assert!(matches!(s.validate(), Err(Error::InvalidScenario(_))));
        assert!(matches!(s.regime.parameters(1), Err(Error::InvalidScenario(_))));
    }

    #[test]
    fn log_coupled() {
        let r = Regime::LogCoupled { w: 2.0, mu: 25.0 };
        let (n, p) = r.parameters(1_000_000_000).unwrap();
        assert_eq!(n, 41);
        assert!((p - 25.0 / 41.0).abs() < 1e-15);
    }

    #[test]
    fn geometric_grid() {
        let g = KGrid::Geometric { from: 1.0, to: 1e3, per_decade: 4 };
        assert_eq!(g.resolve().unwrap(), vec![1, 2, 3, 6, 10, 18, 32, 56, 100, 178, 316, 562, 1000]);
        let g: KGrid = serde_json::from_str(r#"{"from":1e7,"to":1e9,"per_decade":4}"#).unwrap();
        assert_eq!(g.resolve().unwrap().len(), 9);
        let g: KGrid = serde_json::from_str("[10, 100, 1e3]").unwrap();
        assert_eq!(g.resolve().unwrap(), vec![10, 100, 1000]);
        assert!(KGrid::List(vec![10.0, 10.0]).resolve().is_err());
        assert!(KGrid::List(vec![2.5]).resolve().is_err());
    }

    #[test]
    fn serde_shape() {
        let s: ScenarioSpec = serde_json::from_str(
            r#"{"id":"a6","regime":{"kind":"coupled","alpha":6,"w":16,"mu":25},
                "k_grid":{"from":1e7,"to":1e9,"per_decade":4},"replications":100,"seed":7}"#,
        )
        .unwrap();
        assert!(!s.paired);
        assert_eq!(s.validate().unwrap()[0], 10_000_000);
        assert!(serde_json::from_str::<ScenarioSpec>(
            r#"{"id":"x","regime":{"kind":"coupled","alpha":6,"w":16,"mu":25,"extra":1},
                "k_grid":[1e6],"replications":1,"seed":1}"#
        )
        .is_err());
    }
}
