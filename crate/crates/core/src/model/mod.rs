//! Sufficient statistics, priors, likelihood and posterior over `N`.

pub mod class;
pub mod counts;
pub mod likelihood;
pub mod posterior;
pub mod prior;

pub use class::{in_class_m_lambda, prob_sample_max_correct};
pub use counts::SampleCounts;
pub use likelihood::{log_beta_binomial_likelihood, LikelihoodKernel};
pub use posterior::{build_posterior, build_with_kernel, PosteriorTable, DEFAULT_TOLERANCE};
pub use prior::{check_tail_bound, log_prior_n, PriorSpec, TailBoundParams};
