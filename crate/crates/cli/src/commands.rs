use std::path::{Path, PathBuf};

use binq_core::analysis::{
    emit_report, fit_curves, sweep_fits, AlphaStar, AnalysisSpec, FigureData, Layout, SlopeFit,
};
use binq_core::experiments::{
    figure_config, read_curves_csv, run_experiment, CurvePoint, ExperimentConfig, RunOptions, Scale,
};
use binq_core::experiments::store::{CURVES_FILE, GAPS_FILE};
use binq_core::{check_tail_bound, in_class_m_lambda, Error, PriorSpec, TailBoundParams};

use crate::{AnalyzeArgs, Failure, ReproduceArgs, RunArgs, ScaleArg, SimulateArgs, ValidateArgs};

type CmdResult = std::result::Result<(), Failure>;

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn runtime(e: Error) -> Failure {
    Failure::Runtime(e.to_string())
}

fn load_config(path: &Path) -> std::result::Result<ExperimentConfig, Failure> {
    ExperimentConfig::from_path(path).map_err(usage)
}

fn options(run: &RunArgs, timing: bool) -> std::result::Result<RunOptions, Failure> {
    let mut opts = RunOptions { record_timing: timing, ..RunOptions::default() };
    if let Some(p) = run.parallelism {
        if p == 0 {
            return Err(Failure::Usage("--parallelism must be at least 1".into()));
        }
        opts.parallelism = p;
    }
    Ok(opts)
}

fn run(config: &mut ExperimentConfig, run: &RunArgs, timing: bool, out: &Path) -> std::result::Result<Vec<CurvePoint>, Failure> {
    if let Some(seed) = run.seed {
        config.override_seed(seed);
    }
    let opts = options(run, timing)?;
    let summary = run_experiment(config, out, &opts).map_err(|e| match e {
        Error::Config(_) => usage(e),
        other => runtime(other),
    })?;
    println!(
        "{} cells computed, {} reused; records: {}; curves: {}",
        summary.computed_cells,
        summary.reused_cells,
        summary.records_path.display(),
        summary.curves_path.display()
    );
    if !summary.gaps.is_empty() {
        return Err(Failure::Runtime(format!(
            "{} cells failed twice; see {}",
            summary.gaps.len(),
            out.join(GAPS_FILE).display()
        )));
    }
    Ok(summary.curves)
}

pub fn simulate(args: SimulateArgs) -> CmdResult {
    let mut config = load_config(&args.config)?;
    run(&mut config, &args.run, args.timing, &args.run.out).map(|_| ())
}

fn print_fits(fits: &[SlopeFit]) {
    println!("scenario_id,estimator_id,beta,stderr_beta,r2,k_lo,k_hi,n_points,knee");
    for f in fits {
        println!(
            "{},{},{:.4},{:.4},{:.4},{:e},{:e},{},{}",
            f.scenario_id,
            f.estimator_id,
            f.beta,
            f.stderr_beta,
            f.r2,
            f.k_lo,
            f.k_hi,
            f.n_points,
            f.knee.map(|k| k.to_string()).unwrap_or_default()
        );
    }
}

fn print_sweeps(sweeps: &[(String, AlphaStar)]) {
    for (label, s) in sweeps {
        println!("{label}: alpha* = {:.4} (bracket {} .. {})", s.alpha_star, s.bracket.0, s.bracket.1);
        for (a, b) in s.alpha_values.iter().zip(&s.betas) {
            println!("  alpha={a} beta={b:.4}");
        }
    }
}

/// Fits, optional sweep and report files for one set of curves.
fn report(
    name: &str,
    curves: &[CurvePoint],
    spec: &AnalysisSpec,
    config: Option<&ExperimentConfig>,
    sweep: bool,
    format: crate::Format,
    out: &Path,
) -> CmdResult {
    let fits = fit_curves(curves, spec);
    print_fits(&fits);
    let mut layout = spec.layout;
    let mut sweeps = Vec::new();
    if sweep || layout == Layout::AlphaBeta {
        let config = config.ok_or_else(|| Failure::Usage("a sweep needs --config to know each scenario's alpha".into()))?;
        sweeps = sweep_fits(&fits, &config.scenarios).map_err(runtime)?;
        print_sweeps(&sweeps);
        layout = Layout::AlphaBeta;
    }
    let fig = FigureData { name, layout, curves, fits: &fits, sweeps: &sweeps };
    let paths = emit_report(&fig, format.into(), out).map_err(runtime)?;
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

pub fn analyze(args: AnalyzeArgs, sweep: bool) -> CmdResult {
    let input = if args.input.is_dir() { args.input.join(CURVES_FILE) } else { args.input.clone() };
    if !input.is_file() {
        return Err(Failure::Usage(format!("input {} does not exist", input.display())));
    }
    let curves = read_curves_csv(&input).map_err(usage)?;
    let config = args.config.as_deref().map(load_config).transpose()?;
    let base = config.as_ref().and_then(|c| c.analysis.clone()).unwrap_or_default();
    let spec = base.with_overrides(args.kmin, args.kmax, args.threshold);
    if let Some(c) = &config {
        spec.validate(&c.scenarios).map_err(usage)?;
    } else {
        spec.validate(&[]).map_err(usage)?;
    }
    let out = match &args.out {
        Some(o) => o.clone(),
        None => input.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf),
    };
    let name = args.name.clone().unwrap_or_else(|| if sweep { "sweep" } else { "analysis" }.to_string());
    report(&name, &curves, &spec, config.as_ref(), sweep, args.format, &out)
}

pub fn reproduce(args: ReproduceArgs) -> CmdResult {
    let scale = match args.scale {
        ScaleArg::Desk => Scale::Desk,
        ScaleArg::Full => Scale::Full,
    };
    let mut config = figure_config(&args.figure, scale).map_err(usage)?;
    let out = args.run.out.join(&args.figure);
    let curves = run(&mut config, &args.run, false, &out)?;
    let spec = config.analysis.clone().unwrap_or_default();
    report(&args.figure, &curves, &spec, Some(&config), false, args.format, &out)
}

pub fn validate(args: ValidateArgs) -> CmdResult {
    let config = load_config(&args.config)?;
    let v = config.validate.as_ref();
    let lambda = args.lambda.or(v.map(|v| v.lambda));
    let tail_alpha = args.tail_alpha.or(v.map(|v| v.tail_alpha));
    let tail_beta = args.tail_beta.or(v.map(|v| v.tail_beta));
    let m_max = args.m_max.or(v.map(|v| v.m_max)).unwrap_or(10_000);

    match lambda {
        Some(lambda) => {
            println!("scenario_id,k,n,p,np,in_M_lambda");
            for s in &config.scenarios {
                for k in s.validate().map_err(usage)? {
                    let (n, p) = s.regime.parameters(k).map_err(usage)?;
                    let member = if k < 2 {
                        "undefined (k < 2)".to_string()
                    } else {
                        in_class_m_lambda(n, p, k, lambda).map_err(usage)?.to_string()
                    };
                    println!("{},{k},{n},{p},{},{member}", s.id, n as f64 * p);
                }
            }
        }
        None => println!("class check skipped: no lambda given"),
    }

    let (Some(ta), Some(tb)) = (tail_alpha, tail_beta) else {
        println!("tail-bound check skipped: no tail_alpha/tail_beta given");
        return Ok(());
    };
    let params = TailBoundParams::new(ta, tb).map_err(usage)?;
    let mut gammas: Vec<f64> = v.map(|v| v.gammas.clone()).unwrap_or_default();
    if gammas.is_empty() {
        for id in config.estimators.estimators().map_err(usage)? {
            if let Some(p) = id.prior() {
                if !gammas.contains(&p.gamma()) {
                    gammas.push(p.gamma());
                }
            }
        }
    }
    for g in gammas {
        let line = match PriorSpec::new(g, 1.0, 1.0) {
            Ok(prior) if prior.is_proper() => match check_tail_bound(&prior, &params, m_max).map_err(usage)? {
                None => format!("tail bound satisfied up to m={m_max}"),
                Some(m) => format!("tail bound violated at m={m}"),
            },
            Ok(_) => "not applicable: improper prior".to_string(),
            Err(e) => format!("invalid prior: {e}"),
        };
        println!("gamma={g}: {line}");
    }
    Ok(())
}
