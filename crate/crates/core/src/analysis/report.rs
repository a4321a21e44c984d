//! Per-figure data files, as CSV or as gnuplot data with a plot script.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::slope::{split_curves, SlopeFit};
use crate::analysis::sweep::AlphaStar;
use crate::error::{Error, Result};
use crate::experiments::CurvePoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Gnuplot,
}

/// What a figure plots.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// MSE against `k`, log-log.
    #[default]
    Mse,
    /// Mean posterior mass at the true `n` against `k`.
    PosteriorProb,
    /// Fitted slope against `α`.
    AlphaBeta,
}

/// Everything one figure needs.
#[derive(Clone, Debug)]
pub struct FigureData<'a> {
    pub name: &'a str,
    pub layout: Layout,
    pub curves: &'a [CurvePoint],
    pub fits: &'a [SlopeFit],
    /// Labelled `β(α)` sweeps.
    pub sweeps: &'a [(String, AlphaStar)],
}

const CURVE_HEADER: &str = "scenario_id,estimator_id,k,mse,mse_stderr,mean_posterior_prob,reps";
const FIT_HEADER: &str = "#fit,scenario_id,estimator_id,beta,stderr_beta,r2,k_lo,k_hi,n_points,knee";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fit_row(f: &SlopeFit) -> String {
    format!(
        "#fit,{},{},{},{},{},{},{},{},{}",
        f.scenario_id,
        f.estimator_id,
        f.beta,
        f.stderr_beta,
        f.r2,
        f.k_lo,
        f.k_hi,
        f.n_points,
        opt(f.knee)
    )
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf> {
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn curves_csv(fig: &FigureData) -> String {
    let mut s = String::new();
    writeln!(s, "{CURVE_HEADER}").unwrap();
    for c in fig.curves {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            c.scenario_id,
            c.estimator_id,
            c.k,
            c.mse,
            c.mse_stderr,
            opt(c.mean_posterior_prob),
            c.reps
        )
        .unwrap();
    }
    if !fig.fits.is_empty() {
        writeln!(s, "{FIT_HEADER}").unwrap();
        for f in fig.fits {
            writeln!(s, "{}", fit_row(f)).unwrap();
        }
    }
    s
}

fn sweep_csv(fig: &FigureData) -> String {
    let mut s = String::from("series,alpha,beta\n");
    for (label, sw) in fig.sweeps {
        for (a, b) in sw.alpha_values.iter().zip(&sw.betas) {
            writeln!(s, "{label},{a},{b}").unwrap();
        }
    }
    if !fig.sweeps.is_empty() {
        s.push_str("#alpha_star,series,alpha_star,bracket_lo,bracket_hi\n");
        for (label, sw) in fig.sweeps {
            writeln!(s, "#alpha_star,{label},{},{},{}", sw.alpha_star, sw.bracket.0, sw.bracket.1).unwrap();
        }
    }
    s
}

fn curves_gnuplot(fig: &FigureData) -> (String, String) {
    let series = split_curves(fig.curves);
    let mut dat = String::new();
    for (i, s) in series.iter().enumerate() {
        if i > 0 {
            dat.push_str("\n\n");
        }
        writeln!(dat, "# {} {}", s[0].scenario_id, s[0].estimator_id).unwrap();
        writeln!(dat, "# k mse mse_stderr mean_posterior_prob").unwrap();
        for c in s {
            let prob = c.mean_posterior_prob.map_or("NaN".to_string(), |v| v.to_string());
            writeln!(dat, "{} {} {} {}", c.k, c.mse, c.mse_stderr, prob).unwrap();
        }
    }
    let dat_name = format!("{}.dat", fig.name);
    let mut gp = String::new();
    writeln!(gp, "set logscale x").unwrap();
    writeln!(gp, "set xlabel 'k'").unwrap();
    let col = match fig.layout {
        Layout::PosteriorProb => {
            writeln!(gp, "set ylabel 'mean posterior probability of the true n'").unwrap();
            writeln!(gp, "set yrange [0:1]").unwrap();
            4
        }
        _ => {
            writeln!(gp, "set logscale y").unwrap();
            writeln!(gp, "set ylabel 'MSE'").unwrap();
            2
        }
    };
    writeln!(gp, "set key outside right").unwrap();
    let plots: Vec<String> = series
        .iter()
        .enumerate()
        .map(|(i, s)| {
            format!(
                "'{dat_name}' index {i} using 1:{col} with linespoints title '{} {}'",
                s[0].scenario_id, s[0].estimator_id
            )
        })
        .collect();
    if plots.is_empty() {
        writeln!(gp, "# no curves").unwrap();
    } else {
        writeln!(gp, "plot {}", plots.join(", \\\n     ")).unwrap();
    }
    (dat, gp)
}

fn sweep_gnuplot(fig: &FigureData) -> (String, String) {
    let mut dat = String::new();
    for (i, (label, sw)) in fig.sweeps.iter().enumerate() {
        if i > 0 {
            dat.push_str("\n\n");
        }
        writeln!(dat, "# {label} alpha_star={}", sw.alpha_star).unwrap();
        writeln!(dat, "# alpha beta").unwrap();
        for (a, b) in sw.alpha_values.iter().zip(&sw.betas) {
            writeln!(dat, "{a} {b}").unwrap();
        }
    }
    let dat_name = format!("{}.dat", fig.name);
    let mut gp = String::from("set xlabel 'alpha'\nset ylabel 'beta'\nset xzeroaxis\n");
    let plots: Vec<String> = fig
        .sweeps
        .iter()
        .enumerate()
        .map(|(i, (label, _))| format!("'{dat_name}' index {i} using 1:2 with linespoints title '{label}'"))
        .collect();
    if plots.is_empty() {
        gp.push_str("# no sweeps\n");
    } else {
        writeln!(gp, "plot {}", plots.join(", \\\n     ")).unwrap();
    }
    (dat, gp)
}

/// Writes the figure's data files into `out_dir` and returns their paths.
pub fn emit_report(fig: &FigureData, format: ReportFormat, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    match format {
        ReportFormat::Csv => {
            let text = match fig.layout {
                Layout::AlphaBeta => sweep_csv(fig),
                _ => curves_csv(fig),
            };
            Ok(vec![write(out_dir.join(format!("{}.csv", fig.name)), &text)?])
        }
        ReportFormat::Gnuplot => {
            let (dat, gp) = match fig.layout {
                Layout::AlphaBeta => sweep_gnuplot(fig),
                _ => curves_gnuplot(fig),
            };
            let d = write(out_dir.join(format!("{}.dat", fig.name)), &dat)?;
            let g = write(out_dir.join(format!("{}.gp", fig.name)), &gp)?;
            Ok(vec![d, g])
        }
    }
}
