//! Bayesian estimation of the binomial `n` when `p` is unknown, and the
//! simulation study of its consistency as `n` grows with the sample size.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod model;
pub mod sampling;
pub mod special;

pub use error::{Error, Result};
pub use model::{
    build_posterior, check_tail_bound, in_class_m_lambda, log_beta_binomial_likelihood,
    log_prior_n, prob_sample_max_correct, PosteriorTable, PriorSpec, SampleCounts,
    TailBoundParams,
};
