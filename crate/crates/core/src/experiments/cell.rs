use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    default_mle_cap, mle_n, posterior_mean, posterior_mode, posterior_prob_of, sample_max,
    scale_estimator, EstimatorId,
};
use crate::model::{build_with_kernel, LikelihoodKernel, PosteriorTable, PriorSpec};
use crate::sampling::{derive_stream, CountSampler, ScenarioSpec};

/// One estimate on one simulated sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario_id: String,
    pub k: u64,
    pub replication: u32,
    pub n_true: u64,
    pub p_true: f64,
    pub estimator_id: EstimatorId,
    pub estimate: f64,
    pub squared_error: f64,
    /// Posterior mass at `n_true`; Bayes estimators only.
    pub posterior_prob_true: Option<f64>,
    /// Seconds spent on the whole cell; only when timing is requested, so
    /// that persisted output stays reproducible byte for byte.
    pub wall_time: Option<f64>,
    /// Last densely held support point of the posterior table.
    pub m_stop: Option<u64>,
}

/// Simulates one `(scenario, k, replication)` cell and runs every
/// estimator on the same sample. Bayes estimators sharing a prior share
/// one posterior table.
pub fn run_cell(
    spec: &ScenarioSpec,
    k: u64,
    replication: u32,
    estimators: &[EstimatorId],
    tolerance: f64,
    record_timing: bool,
) -> Result<Vec<RunRecord>> {
    let started = Instant::now();
    let context = |e: Error| match e {
        Error::InvalidScenario(m) => {
            Error::InvalidScenario(format!("scenario `{}`, k={k}: {m}", spec.id))
        }
        other => other,
    };
    let (n, p) = spec.regime.parameters(k).map_err(context)?;
    let coordinate = if spec.paired { 0 } else { k };
    let mut rng = derive_stream(spec.seed, spec.stream_key(), coordinate, replication as u64)?;
    let counts = CountSampler::new(n, p)?.draw(k, &mut rng)?;

    let mut kernels: Vec<((u64, u64), Arc<LikelihoodKernel>)> = Vec::new();
    let mut tables: Vec<(PriorSpec, PosteriorTable)> = Vec::new();
    for prior in estimators.iter().filter_map(|id| id.prior()) {
        if tables.iter().any(|(p, _)| p == prior) {
            continue;
        }
        let key = (prior.a().to_bits(), prior.b().to_bits());
        let kernel = match kernels.iter().find(|(kk, _)| *kk == key) {
            Some((_, kern)) => Arc::clone(kern),
            None => {
                let kern = Arc::new(LikelihoodKernel::for_prior(&counts, prior));
                kernels.push((key, Arc::clone(&kern)));
                kern
            }
        };
        tables.push((*prior, build_with_kernel(kernel, prior, tolerance)?));
    }

    let mut out = Vec::with_capacity(estimators.len());
    for id in estimators {
        let (estimate, prob, m_stop) = match id {
            EstimatorId::Scale(prior) | EstimatorId::PostMean(prior) | EstimatorId::PostMode(prior) => {
                let t = &tables.iter().find(|(p, _)| p == prior).expect("table built above").1;
                let v = match id {
                    EstimatorId::Scale(_) => scale_estimator(t),
                    EstimatorId::PostMean(_) => posterior_mean(t),
                    _ => posterior_mode(t) as f64,
                };
                (v, Some(posterior_prob_of(t, n)), Some(t.m_stop()))
            }
            EstimatorId::Mle => {
                let e = mle_n(&counts, default_mle_cap(&counts))?;
                if e.divergent {
                    log::debug!("scenario {} k={k} rep={replication}: MLE hit its cap", spec.id);
                }
                (e.n as f64, None, None)
            }
            EstimatorId::SampleMax => (sample_max(&counts) as f64, None, None),
        };
        if !estimate.is_finite() {
            return Err(Error::Numeric(format!("{id} produced a non-finite estimate")));
        }
        let err = estimate - n as f64;
        out.push(RunRecord {
            scenario_id: spec.id.clone(),
            k,
            replication,
            n_true: n,
            p_true: p,
            estimator_id: *id,
            estimate,
            squared_error: err * err,
            posterior_prob_true: prob,
            wall_time: None,
            m_stop,
        });
    }
    if record_timing {
        let secs = started.elapsed().as_secs_f64();
        for r in &mut out {
            r.wall_time = Some(secs);
        }
    }
    Ok(out)
}
