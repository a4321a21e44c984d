use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::EstimatorId;
use crate::experiments::cell::{run_cell, RunRecord};
use crate::experiments::config::EstimatorConfig;
use crate::sampling::ScenarioSpec;
use crate::special::CompensatedSum;

/// Replication average for one `(scenario, estimator, k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub scenario_id: String,
    pub estimator_id: EstimatorId,
    pub k: u64,
    pub mse: f64,
    pub mse_stderr: f64,
    pub mean_posterior_prob: Option<f64>,
    pub reps: u32,
}

/// A cell that failed twice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub scenario_id: String,
    pub k: u64,
    pub replication: u32,
    pub error: String,
}

/// Coordinates of one simulation cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId {
    pub scenario: usize,
    pub k: u64,
    pub replication: u32,
}

pub(crate) fn thread_pool(parallelism: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {parallelism} workers: {e}")))
}

/// Runs a cell, retrying once; panics count as failures.
pub(crate) fn run_cell_retrying(
    spec: &ScenarioSpec,
    cell: CellId,
    ids: &[EstimatorId],
    tolerance: f64,
    record_timing: bool,
) -> std::result::Result<Vec<RunRecord>, String> {
    let attempt = || {
        catch_unwind(AssertUnwindSafe(|| {
            run_cell(spec, cell.k, cell.replication, ids, tolerance, record_timing)
        }))
        .map_err(|p| {
            p.downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "worker panicked".into())
        })
        .and_then(|r| r.map_err(|e| e.to_string()))
    };
    attempt().or_else(|first| {
        log::warn!(
            "scenario {} k={} rep={} failed ({first}); retrying",
            spec.id,
            cell.k,
            cell.replication
        );
        attempt()
    })
}

/// Executes `cells` on `parallelism` workers. The result order follows
/// `cells`, whatever the scheduling.
pub(crate) fn execute<F>(
    scenarios: &[ScenarioSpec],
    cells: &[CellId],
    ids: &[EstimatorId],
    est: &EstimatorConfig,
    parallelism: usize,
    record_timing: bool,
    on_done: F,
) -> Result<Vec<std::result::Result<Vec<RunRecord>, String>>>
where
    F: Fn(&[RunRecord]) -> Result<()> + Sync,
{
    let pool = thread_pool(parallelism)?;
    let done = AtomicUsize::new(0);
    let total = cells.len();
    let step = (total / 20).max(1);
    pool.install(|| {
        cells
            .par_iter()
            .map(|&cell| {
                let spec = &scenarios[cell.scenario];
                let out = run_cell_retrying(spec, cell, ids, est.tolerance, record_timing);
                if let Ok(recs) = &out {
                    on_done(recs)?;
                }
                let d = done.fetch_add(1, Ordering::Relaxed) + 1;
                if d % step == 0 || d == total {
                    log::info!("{d}/{total} cells done");
                }
                Ok(out)
            })
            .collect()
    })
}

/// Averages records per `(scenario, estimator, k)`. Output is ordered by
/// scenario and estimator in order of first appearance, then by `k`.
pub fn aggregate(records: &[RunRecord]) -> Vec<CurvePoint> {
    let mut scen: Vec<&str> = Vec::new();
    let mut ests: Vec<String> = Vec::new();
    struct Acc {
        n: u32,
        sum: CompensatedSum,
        sum_sq: CompensatedSum,
        prob: CompensatedSum,
        has_prob: bool,
    }
    let mut groups: BTreeMap<(usize, usize, u64), (EstimatorId, Acc)> = BTreeMap::new();
    for r in records {
        let si = match scen.iter().position(|s| *s == r.scenario_id) {
            Some(i) => i,
            None => {
                scen.push(&r.scenario_id);
                scen.len() - 1
            }
        };
        let name = r.estimator_id.to_string();
        let ei = match ests.iter().position(|s| *s == name) {
            Some(i) => i,
            None => {
                ests.push(name);
                ests.len() - 1
            }
        };
        let (_, acc) = groups.entry((si, ei, r.k)).or_insert_with(|| {
            (
                r.estimator_id,
                Acc {
                    n: 0,
                    sum: CompensatedSum::new(),
                    sum_sq: CompensatedSum::new(),
                    prob: CompensatedSum::new(),
                    has_prob: false,
                },
            )
        });
        acc.n += 1;
        acc.sum.add(r.squared_error);
        acc.sum_sq.add(r.squared_error * r.squared_error);
        if let Some(p) = r.posterior_prob_true {
            acc.prob.add(p);
            acc.has_prob = true;
        }
    }
    groups
        .into_iter()
        .map(|((si, _, k), (id, acc))| {
            let n = acc.n as f64;
            let mse = acc.sum.value() / n;
            let stderr = if acc.n > 1 {
                let var = ((acc.sum_sq.value() - n * mse * mse) / (n - 1.0)).max(0.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            CurvePoint {
                scenario_id: scen[si].to_string(),
                estimator_id: id,
                k,
                mse,
                mse_stderr: stderr,
                mean_posterior_prob: acc.has_prob.then(|| (acc.prob.value() / n).clamp(0.0, 1.0)),
                reps: acc.n,
            }
        })
        .collect()
}

/// All cells of a scenario in `(k, replication)` order.
pub(crate) fn cells_of(scenario: usize, ks: &[u64], replications: u32) -> Vec<CellId> {
    ks.iter()
        .flat_map(|&k| (0..replications).map(move |replication| CellId { scenario, k, replication }))
        .collect()
}

/// Records of a whole scenario grid plus the cells that failed.
#[derive(Clone, Debug, Default)]
pub struct GridOutput {
    pub records: Vec<RunRecord>,
    pub gaps: Vec<Gap>,
}

/// Simulates every `(k, replication)` cell of the scenario without
/// persisting anything.
pub fn simulate_grid(spec: &ScenarioSpec, est: &EstimatorConfig, parallelism: usize) -> Result<GridOutput> {
    let ks = spec.validate()?;
    let ids = est.estimators()?;
    let cells = cells_of(0, &ks, spec.replications);
    let results = execute(std::slice::from_ref(spec), &cells, &ids, est, parallelism, false, |_| Ok(()))?;
    let mut out = GridOutput::default();
    for (cell, r) in cells.iter().zip(results) {
        match r {
            Ok(recs) => out.records.extend(recs),
            Err(error) => out.gaps.push(Gap {
                scenario_id: spec.id.clone(),
                k: cell.k,
                replication: cell.replication,
                error,
            }),
        }
    }
    Ok(out)
}

/// MSE and posterior-probability curves of one scenario.
pub fn run_grid(spec: &ScenarioSpec, est: &EstimatorConfig, parallelism: usize) -> Result<Vec<CurvePoint>> {
    let out = simulate_grid(spec, est, parallelism)?;
    for g in &out.gaps {
        log::warn!("missing cell k={} rep={}: {}", g.k, g.replication, g.error);
    }
    Ok(aggregate(&out.records))
}
