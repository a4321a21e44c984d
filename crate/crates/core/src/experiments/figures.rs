//! Bundled configurations for the figures of the simulation study.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::experiments::ExperimentConfig;
use crate::sampling::KGrid;

pub const FIGURE_IDS: [&str; 7] = ["fig1a", "fig1b", "fig1c", "fig2", "fig3a", "fig3b", "fig3c"];

const DESK_K_MAX: f64 = 1e9;
const DESK_REPS: u32 = 100;
const FULL_K_MAX: f64 = 1e11;
const FULL_REPS: u32 = 200;

/// Size of a reproduction run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    /// `k <= 10^9`, 100 replications.
    Desk,
    /// `k <= 10^11`, 200 replications.
    Full,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            _ => Err(Error::Config(format!("unknown scale `{s}` (expected desk or full)"))),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Desk => "desk",
            Scale::Full => "full",
        })
    }
}

fn source(id: &str) -> Option<&'static str> {
    Some(match id {
        "fig1a" => include_str!("../../configs/fig1a.json"),
        "fig1b" => include_str!("../../configs/fig1b.json"),
        "fig1c" => include_str!("../../configs/fig1c.json"),
        "fig2" => include_str!("../../configs/fig2.json"),
        "fig3a" => include_str!("../../configs/fig3a.json"),
        "fig3b" => include_str!("../../configs/fig3b.json"),
        "fig3c" => include_str!("../../configs/fig3c.json"),
        _ => return None,
    })
}

/// The bundled config of a figure at the given scale. The files are written
/// at desk scale; full scale stretches grids that end at the desk cap.
pub fn figure_config(id: &str, scale: Scale) -> Result<ExperimentConfig> {
    let text = source(id).ok_or_else(|| {
        Error::Config(format!("unknown figure `{id}` (expected one of {})", FIGURE_IDS.join(", ")))
    })?;
    let mut cfg = ExperimentConfig::from_json(text)
        .map_err(|e| Error::Config(format!("bundled config {id}: {e}")))?;
    for s in &mut cfg.scenarios {
        match scale {
            Scale::Desk => s.replications = s.replications.min(DESK_REPS),
            Scale::Full => {
                s.replications = FULL_REPS;
                if let KGrid::Geometric { to, .. } = &mut s.k_grid {
                    if *to == DESK_K_MAX {
                        *to = FULL_K_MAX;
                    }
                }
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Layout;

    #[test]
    fn every_bundled_config_loads() {
        for id in FIGURE_IDS {
            for scale in [Scale::Desk, Scale::Full] {
                let c = figure_config(id, scale).unwrap();
                assert!(c.analysis.is_some(), "{id}");
                for s in &c.scenarios {
                    let grid = s.validate().unwrap();
                    let top = *grid.last().unwrap() as f64;
                    match scale {
                        Scale::Desk => assert!(top <= DESK_K_MAX && s.replications <= DESK_REPS),
                        Scale::Full => assert!(top <= FULL_K_MAX && s.replications == FULL_REPS),
                    }
                }
            }
        }
        assert!(matches!(figure_config("fig9", Scale::Desk), Err(Error::Config(_))));
    }

    #[test]
    fn figure_shapes() {
        let c = figure_config("fig2", Scale::Desk).unwrap();
        let alphas: Vec<f64> = c.scenarios.iter().filter_map(|s| crate::analysis::alpha_of(&s.regime)).collect();
        assert_eq!(alphas, [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        assert_eq!(c.analysis.unwrap().layout, Layout::AlphaBeta);
        assert_eq!(figure_config("fig3b", Scale::Desk).unwrap().scenarios.len(), 4);
        let a = figure_config("fig1a", Scale::Desk).unwrap();
        assert_eq!(a.estimators.estimators().unwrap().len(), 8);
        let full = figure_config("fig1a", Scale::Full).unwrap();
        assert_eq!(*full.scenarios[0].validate().unwrap().last().unwrap(), 100_000_000_000);
        assert_eq!("full".parse::<Scale>().unwrap(), Scale::Full);
    }
}
