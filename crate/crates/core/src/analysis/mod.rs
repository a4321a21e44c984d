//! Slopes of MSE curves, the β(α) sweep and report files.

pub mod plan;
pub mod report;
pub mod sample_max;
pub mod slope;
pub mod sweep;

pub use plan::{alpha_of, fit_curves, sweep_fits, AnalysisSpec, FitWindow};
pub use report::{emit_report, FigureData, Layout, ReportFormat};
pub use sample_max::sample_max_mse;
pub use slope::{
    detect_phase_transition, fit_slope, fit_slope_before_knee, split_curves, SlopeFit,
    DEFAULT_K_HI, DEFAULT_K_LO, DEFAULT_THRESHOLD,
};
pub use sweep::{sweep_beta_of_alpha, AlphaStar};
