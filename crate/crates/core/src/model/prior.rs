use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::zeta;

/// Product prior on `(N, P)`: `P ~ Beta(a, b)` and `Π_N(m) ∝ m^{-γ}` on
/// `m = 1, 2, …`.
///
/// The posterior over `N` is well defined whenever `γ + a > 1`, including
/// the improper range `γ <= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPrior", into = "RawPrior")]
pub struct PriorSpec {
    a: f64,
    b: f64,
    gamma: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrior {
    gamma: f64,
    a: f64,
    b: f64,
}

impl PriorSpec {
    pub fn new(gamma: f64, a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) || !(b.is_finite() && b > 0.0) {
            return Err(Error::domain(format!(
                "Beta shapes must be positive and finite (a={a}, b={b})"
            )));
        }
        if !gamma.is_finite() {
            return Err(Error::domain("gamma must be finite"));
        }
        if gamma + a <= 1.0 {
            return Err(Error::domain(format!(
                "gamma + a must exceed 1 for a proper posterior (gamma={gamma}, a={a})"
            )));
        }
        Ok(PriorSpec { a, b, gamma })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// True iff the prior on `N` is normalizable (`γ > 1`).
    pub fn is_proper(&self) -> bool {
        self.gamma > 1.0
    }

    /// Asymptotic decay exponent of the posterior weights in `m`.
    pub fn tail_exponent(&self) -> f64 {
        self.a + self.gamma
    }
}

impl TryFrom<RawPrior> for PriorSpec {
    type Error = Error;

    fn try_from(r: RawPrior) -> Result<Self> {
        PriorSpec::new(r.gamma, r.a, r.b)
    }
}

impl From<PriorSpec> for RawPrior {
    fn from(p: PriorSpec) -> Self {
        RawPrior {
            gamma: p.gamma,
            a: p.a,
            b: p.b,
        }
    }
}

impl fmt::Display for PriorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g={};a={};b={}", self.gamma, self.a, self.b)
    }
}

/// Unnormalized log prior mass `-γ ln m`.
pub fn log_prior_n(m: u64, prior: &PriorSpec) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("prior on N is supported on m >= 1"));
    }
    Ok(-prior.gamma * (m as f64).ln())
}

/// Constants of the lower-bound condition `Π_N(m) >= β e^{-α m²}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBoundParams {
    pub alpha_tb: f64,
    pub beta_tb: f64,
}

impl TailBoundParams {
    pub fn new(alpha_tb: f64, beta_tb: f64) -> Result<Self> {
        if !(alpha_tb > 0.0 && alpha_tb.is_finite()) || !(beta_tb > 0.0 && beta_tb.is_finite()) {
            return Err(Error::domain(format!(
                "tail-bound constants must be positive (alpha={alpha_tb}, beta={beta_tb})"
            )));
        }
        Ok(TailBoundParams { alpha_tb, beta_tb })
    }
}

/// Scans `m = 1..=m_max` for the first `m` where the normalized power-law
/// prior falls below `β e^{-α m²}`. Returns `None` when the bound holds
/// throughout.
pub fn check_tail_bound(
    prior: &PriorSpec,
    params: &TailBoundParams,
    m_max: u64,
) -> Result<Option<u64>> {
    if !prior.is_proper() {
        return Err(Error::domain(format!(
            "tail-bound check needs a proper prior (gamma={} <= 1)",
            prior.gamma
        )));
    }
    if m_max == 0 {
        return Err(Error::domain("m_max must be at least 1"));
    }
    let log_z = zeta(prior.gamma).ln();
    let log_beta = params.beta_tb.ln();
    for m in 1..=m_max {
        let mf = m as f64;
        let log_prior = -prior.gamma * mf.ln() - log_z;
        let log_bound = log_beta - params.alpha_tb * mf * mf;
        if log_prior < log_bound {
            return Ok(Some(m));
        }
        // The bound decays faster than any power, so once it is far below
        // the prior it stays there.
        if log_bound < log_prior - 50.0 && params.alpha_tb * mf > prior.gamma {
            break;
        }
    }
    Ok(None)
}
