//! Crash-safe persistence: records are appended to `records.jsonl` as cells
//! finish; finalizing rewrites them sorted and emits `curves.csv`.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::cell::RunRecord;
use crate::experiments::config::ExperimentConfig;
use crate::experiments::grid::{aggregate, cells_of, execute, CellId, CurvePoint, Gap};
use crate::sampling::GENERATOR;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const CURVES_FILE: &str = "curves.csv";
pub const GAPS_FILE: &str = "gaps.jsonl";
pub const MANIFEST_FILE: &str = "run.json";

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub parallelism: usize,
    /// Store per-cell wall time in the records (breaks byte-reproducibility).
    pub record_timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
            record_timing: false,
        }
    }
}

#[derive(Serialize, Deserialize, PartialEq)]
struct Manifest {
    generator: String,
    config: ExperimentConfig,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub curves: Vec<CurvePoint>,
    pub gaps: Vec<Gap>,
    pub computed_cells: usize,
    pub reused_cells: usize,
    pub records_path: PathBuf,
    pub curves_path: PathBuf,
}

fn write_atomic(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let run = || -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(&tmp)?);
        write(&mut w)?;
        w.flush()?;
        w.get_ref().sync_all()?;
        drop(w);
        fs::rename(&tmp, path)
    };
    run().map_err(|e| Error::io(path, e))
}

fn write_jsonl<T: Serialize>(w: &mut impl Write, items: &[T]) -> std::io::Result<()> {
    for it in items {
        serde_json::to_writer(&mut *w, it)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes curve points as CSV with the standard header.
pub fn write_curves_csv(path: &Path, curves: &[CurvePoint]) -> Result<()> {
    write_atomic(path, |w| {
        let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        csv.write_record(["scenario_id", "estimator_id", "k", "mse", "mse_stderr", "mean_posterior_prob", "reps"])?;
        for c in curves {
            csv.serialize(c)?;
        }
        csv.flush()
    })
}

/// Reads curve points written by [`write_curves_csv`].
pub fn read_curves_csv(path: &Path) -> Result<Vec<CurvePoint>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rd = csv::Reader::from_reader(file);
    rd.deserialize()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Config(format!("{}: row {}: {e}", path.display(), i + 2)))
        })
        .collect()
}

/// Reads complete record lines; a torn final line from an interrupted run
/// is dropped.
pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let mut lines = BufReader::new(file).lines().peekable();
    let mut lineno = 0;
    while let Some(line) = lines.next() {
        lineno += 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RunRecord>(&line) {
            Ok(r) => out.push(r),
            Err(_) if lines.peek().is_none() => {
                log::warn!("{}: dropping incomplete final line", path.display());
            }
            Err(e) => {
                return Err(Error::Config(format!("{}: line {lineno}: {e}", path.display())));
            }
        }
    }
    Ok(out)
}

/// Runs every scenario of `config`, persisting into `out_dir`. Cells already
/// present from an earlier run with the same configuration are reused.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path, opts: &RunOptions) -> Result<RunSummary> {
    config.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let ids = config.estimators.estimators()?;
    let est_rank: HashMap<String, usize> = ids.iter().enumerate().map(|(i, id)| (id.to_string(), i)).collect();
    let scen_rank: HashMap<&str, usize> =
        config.scenarios.iter().enumerate().map(|(i, s)| (s.id.as_str(), i)).collect();

    let manifest = Manifest {
        generator: GENERATOR.to_string(),
        config: config.clone(),
    };
    let manifest_path = out_dir.join(MANIFEST_FILE);
    let records_path = out_dir.join(RECORDS_FILE);

    // Reuse complete cells of a matching earlier run.
    let mut done: BTreeMap<CellId, Vec<RunRecord>> = BTreeMap::new();
    if records_path.exists() {
        let same = fs::read_to_string(&manifest_path)
            .ok()
            .and_then(|t| serde_json::from_str::<Manifest>(&t).ok())
            .is_some_and(|m| m == manifest);
        if !same {
            return Err(Error::Config(format!(
                "{} holds results of a different configuration; use a fresh output directory",
                out_dir.display()
            )));
        }
        for r in read_records(&records_path)? {
            let Some(&scenario) = scen_rank.get(r.scenario_id.as_str()) else { continue };
            let cell = CellId { scenario, k: r.k, replication: r.replication };
            done.entry(cell).or_default().push(r);
        }
        done.retain(|_, recs| {
            let mut seen: Vec<usize> = recs.iter().filter_map(|r| est_rank.get(&r.estimator_id.to_string()).copied()).collect();
            seen.sort_unstable();
            seen.dedup();
            seen.len() == ids.len() && recs.len() == ids.len()
        });
    }
    write_atomic(&manifest_path, |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest)?;
        w.write_all(b"\n")
    })?;

    let mut cells = Vec::new();
    for (si, s) in config.scenarios.iter().enumerate() {
        let ks = s.validate()?;
        cells.extend(cells_of(si, &ks, s.replications));
    }
    let reused_cells = cells.iter().filter(|c| done.contains_key(c)).count();
    let todo: Vec<CellId> = cells.iter().copied().filter(|c| !done.contains_key(c)).collect();
    log::info!("{} cells to compute, {} reused", todo.len(), reused_cells);

    // Drop torn lines and partial cells before appending.
    let kept: Vec<&RunRecord> = done.values().flatten().collect();
    write_atomic(&records_path, |w| write_jsonl(w, &kept))?;
    let sink = OpenOptions::new()
        .append(true)
        .open(&records_path)
        .map_err(|e| Error::io(&records_path, e))?;
    let sink = Mutex::new(BufWriter::new(sink));

    let results = execute(
        &config.scenarios,
        &todo,
        &ids,
        &config.estimators,
        opts.parallelism,
        opts.record_timing,
        |recs| {
            let mut w = sink.lock().unwrap_or_else(|p| p.into_inner());
            write_jsonl(&mut *w, recs)
                .and_then(|_| w.flush())
                .map_err(|e| Error::io(&records_path, e))
        },
    )?;
    drop(sink);

    let mut gaps = Vec::new();
    for (cell, r) in todo.iter().zip(results) {
        match r {
            Ok(recs) => {
                done.insert(*cell, recs);
            }
            Err(error) => gaps.push(Gap {
                scenario_id: config.scenarios[cell.scenario].id.clone(),
                k: cell.k,
                replication: cell.replication,
                error,
            }),
        }
    }

    // Finalize: deterministic order (scenario, k, replication, estimator).
    let mut all: Vec<RunRecord> = done.into_values().flatten().collect();
    all.sort_by_key(|r| {
        (
            scen_rank[r.scenario_id.as_str()],
            r.k,
            r.replication,
            est_rank[&r.estimator_id.to_string()],
        )
    });
    write_atomic(&records_path, |w| write_jsonl(w, &all))?;
    let curves = aggregate(&all);
    let curves_path = out_dir.join(CURVES_FILE);
    write_curves_csv(&curves_path, &curves)?;
    let gaps_path = out_dir.join(GAPS_FILE);
    if gaps.is_empty() {
        if gaps_path.exists() {
            fs::remove_file(&gaps_path).map_err(|e| Error::io(&gaps_path, e))?;
        }
    } else {
        log::warn!("{} cells failed twice; see {}", gaps.len(), gaps_path.display());
        write_atomic(&gaps_path, |w| write_jsonl(w, &gaps))?;
    }
    Ok(RunSummary {
        curves,
        gaps,
        computed_cells: todo.len(),
        reused_cells,
        records_path,
        curves_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{"version":1,
                "scenarios":[{"id":"s","regime":{"kind":"coupled","alpha":4,"w":8,"mu":25},
                              "k_grid":[1e4,1e5],"replications":4,"seed":3}],
                "estimators":{"scale":{"gamma":[1],"a":[1],"b":[1]},"mle":true,"sample_max":true}}"#,
        )
        .unwrap()
    }

    fn opts(p: usize) -> RunOptions {
        RunOptions { parallelism: p, record_timing: false }
    }

    #[test]
    fn resume_recomputes_only_missing_cells() {
        let full = tempfile::tempdir().unwrap();
        let s = run_experiment(&config(), full.path(), &opts(2)).unwrap();
        assert_eq!((s.computed_cells, s.reused_cells), (8, 0));
        let reference = fs::read(full.path().join(RECORDS_FILE)).unwrap();

        // Keep the first five cells and a torn sixth.
        let part = tempfile::tempdir().unwrap();
        fs::copy(full.path().join(MANIFEST_FILE), part.path().join(MANIFEST_FILE)).unwrap();
        let text = String::from_utf8(reference.clone()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let mut partial = lines[..15].join("\n");
        partial.push('\n');
        partial.push_str(&lines[15][..20]);
        fs::write(part.path().join(RECORDS_FILE), partial).unwrap();

        let s = run_experiment(&config(), part.path(), &opts(3)).unwrap();
        assert_eq!((s.computed_cells, s.reused_cells), (3, 5));
        assert_eq!(fs::read(part.path().join(RECORDS_FILE)).unwrap(), reference);
        assert_eq!(
            fs::read(part.path().join(CURVES_FILE)).unwrap(),
            fs::read(full.path().join(CURVES_FILE)).unwrap()
        );
    }

    #[test]
    fn refuses_foreign_results() {
        let dir = tempfile::tempdir().unwrap();
        run_experiment(&config(), dir.path(), &opts(1)).unwrap();
        let mut other = config();
        other.override_seed(99);
        assert!(matches!(run_experiment(&other, dir.path(), &opts(1)), Err(Error::Config(_))));
    }

    #[test]
    fn curves_round_trip_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let s = run_experiment(&config(), dir.path(), &opts(1)).unwrap();
        let back = read_curves_csv(&s.curves_path).unwrap();
        assert_eq!(back, s.curves);
        let header = fs::read_to_string(&s.curves_path).unwrap();
        assert!(header.starts_with("scenario_id,estimator_id,k,mse,mse_stderr,mean_posterior_prob,reps\n"));
    }
}
