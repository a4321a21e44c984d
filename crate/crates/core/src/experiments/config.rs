use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisSpec;
use crate::error::{Error, Result};
use crate::estimators::EstimatorId;
use crate::model::{PriorSpec, DEFAULT_TOLERANCE};
use crate::sampling::ScenarioSpec;

pub const CONFIG_VERSION: u32 = 1;

/// Cartesian grid of prior hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorGrid {
    pub gamma: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl PriorGrid {
    pub fn single(gamma: f64, a: f64, b: f64) -> Self {
        PriorGrid {
            gamma: vec![gamma],
            a: vec![a],
            b: vec![b],
        }
    }

    /// All combinations, γ outermost. Every combination must satisfy γ + a > 1.
    pub fn priors(&self) -> Result<Vec<PriorSpec>> {
        if self.gamma.is_empty() || self.a.is_empty() || self.b.is_empty() {
            return Err(Error::Config("prior grid has an empty axis".into()));
        }
        let mut out = Vec::new();
        for &g in &self.gamma {
            for &a in &self.a {
                for &b in &self.b {
                    out.push(PriorSpec::new(g, a, b).map_err(|e| {
                        Error::Config(format!("prior (gamma={g}, a={a}, b={b}): {e}"))
                    })?);
                }
            }
        }
        Ok(out)
    }
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

/// Which estimators to run on every simulated sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<PriorGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_mean: Option<PriorGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_mode: Option<PriorGrid>,
    #[serde(default)]
    pub mle: bool,
    #[serde(default)]
    pub sample_max: bool,
    /// Relative truncation tolerance of the posterior tables.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl EstimatorConfig {
    pub fn scale_only(prior: PriorSpec) -> Self {
        EstimatorConfig {
            scale: Some(PriorGrid::single(prior.gamma(), prior.a(), prior.b())),
            post_mean: None,
            post_mode: None,
            mle: false,
            sample_max: false,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    /// Estimators in output order.
    pub fn estimators(&self) -> Result<Vec<EstimatorId>> {
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-6) {
            return Err(Error::Config(format!(
                "tolerance must lie in (0, 1e-6], got {}",
                self.tolerance
            )));
        }
        let mut ids = Vec::new();
        if let Some(g) = &self.scale {
            ids.extend(g.priors()?.into_iter().map(EstimatorId::Scale));
        }
        if let Some(g) = &self.post_mean {
            for p in g.priors()? {
                // E[N | data] is infinite unless the posterior tail decays
                // faster than m^-2.
                if p.tail_exponent() <= 2.0 {
                    return Err(Error::Config(format!(
                        "post_mean needs gamma + a > 2 for a finite posterior mean ({p})"
                    )));
                }
                ids.push(EstimatorId::PostMean(p));
            }
        }
        if let Some(g) = &self.post_mode {
            ids.extend(g.priors()?.into_iter().map(EstimatorId::PostMode));
        }
        if self.mle {
            ids.push(EstimatorId::Mle);
        }
        if self.sample_max {
            ids.push(EstimatorId::SampleMax);
        }
        if ids.is_empty() {
            return Err(Error::Config("no estimators configured".into()));
        }
        let unique: BTreeSet<String> = ids.iter().map(|id| id.to_string()).collect();
        if unique.len() != ids.len() {
            return Err(Error::Config("duplicate estimator in configuration".into()));
        }
        Ok(ids)
    }
}

/// Constants for the preflight checks of the `validate` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub lambda: f64,
    pub tail_alpha: f64,
    pub tail_beta: f64,
    pub m_max: u64,
    /// Prior exponents to check; defaults to those of the estimators.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gammas: Vec<f64>,
}

/// A full experiment: scenarios crossed with estimators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub scenarios: Vec<ScenarioSpec>,
    pub estimators: EstimatorConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validate: Option<ValidateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisSpec>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if self.scenarios.is_empty() {
            return Err(Error::Config("no scenarios configured".into()));
        }
        let mut ids = BTreeSet::new();
        for s in &self.scenarios {
            if !ids.insert(s.id.as_str()) {
                return Err(Error::Config(format!("duplicate scenario id `{}`", s.id)));
            }
            s.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        self.estimators.estimators()?;
        if let Some(a) = &self.analysis {
            a.validate(&self.scenarios)?;
        }
        if let Some(v) = &self.validate {
            if !(v.lambda > 1.0) || !(v.tail_alpha > 0.0) || !(v.tail_beta > 0.0) || v.m_max == 0 {
                return Err(Error::Config(
                    "validate: need lambda > 1, tail_alpha > 0, tail_beta > 0, m_max >= 1".into(),
                ));
            }
        }
        Ok(())
    }

    /// Replaces every scenario seed.
    pub fn override_seed(&mut self, seed: u64) {
        for s in &mut self.scenarios {
            s.seed = seed;
        }
    }
}
