//! Scenario parameterization and exact generation of outcome histograms.

pub mod binomial;
pub mod multinomial;
pub mod scenario;
pub mod stream;

pub use binomial::{binomial_variate, Binomial};
pub use multinomial::{draw_counts, CountSampler};
pub use scenario::{derive_parameters, KGrid, Regime, ScenarioSpec};
pub use stream::{derive_stream, scenario_key, Stream, GENERATOR};
