//! Beta-binomial marginal likelihood of a frequency histogram.
//!
//! For a sample with histogram `c_x`, `k = Σ c_x` and `S = Σ x c_x`,
//!
//! ```text
//! L(m) = Π_x C(m, x)^{c_x} · B(a + S, b + k m − S) / B(a, b)
//! ```
//!
//! Evaluation is split into a data-only constant and an m-dependent
//! "shape". The shape is assembled from pieces that are each small in
//! magnitude, so it stays accurate to roughly `1e-16 · (S²/km)` in absolute
//! terms even when `k m` reaches 1e18:
//!
//! * `σ(m) = Σ_x c_x [ln (m)_x − x ln m]`, where `(m)_x` is the falling
//!   factorial, via a Stirling difference per distinct outcome, or via a
//!   power-sum series in `1/m` once `m >= 3 · max x`;
//! * the Beta ratio with its `S ln m` growth cancelled analytically against
//!   the `S ln m` hidden in the binomial coefficients.

use crate::error::{Error, Result};
use crate::model::counts::SampleCounts;
use crate::model::prior::PriorSpec;
use crate::special::{count_lgamma, ln_beta, ln_gamma, log1pmx, stirling_tail, STIRLING_MIN};

const SERIES_TERMS: usize = 48;
const SERIES_RATIO: f64 = 3.0;

/// Precomputed likelihood evaluator for one sample and one Beta prior.
#[derive(Clone, Debug)]
pub struct LikelihoodKernel {
    k: u64,
    k_f: f64,
    s: u64,
    s_f: f64,
    max_x: u64,
    a: f64,
    b: f64,
    /// `(x, c_x)` for outcomes `x >= 2`; smaller outcomes have `σ_x ≡ 0`.
    cells: Vec<(f64, f64)>,
    /// `Σ_{j≥1} G(j) (j/X)^r / r` with `G(j) = #{i : x_i > j}`, `X = max x`.
    series: Vec<f64>,
    series_min_m: f64,
    log_const: f64,
}

impl LikelihoodKernel {
    pub fn new(counts: &SampleCounts, a: f64, b: f64) -> Self {
        let cells: Vec<(f64, f64)> = counts
            .distinct()
            .filter(|&(x, _)| x >= 2)
            .map(|(x, c)| (x as f64, c as f64))
            .collect();
        let max_x = counts.max();
        let s = counts.sum();
        let k = counts.k();

        let mut series = Vec::new();
        if max_x >= 2 {
            let freqs = counts.frequencies();
            let big_x = max_x as f64;
            let mut acc = vec![0.0; SERIES_TERMS];
            // G(j) = number of observations strictly greater than j.
            let mut above: u64 = freqs.iter().skip(2).sum();
            for j in 1..max_x {
                let g = above as f64;
                if g > 0.0 {
                    let ratio = j as f64 / big_x;
                    let mut pw = g;
                    for slot in acc.iter_mut() {
                        pw *= ratio;
                        *slot += pw;
                    }
                }
                above -= freqs[(j + 1) as usize];
            }
            series = acc
                .into_iter()
                .enumerate()
                .map(|(r, t)| t / (r + 1) as f64)
                .collect();
        }

        let s_f = s as f64;
        let k_f = k as f64;
        let log_fact: f64 = counts
            .distinct()
            .filter(|&(x, _)| x >= 2)
            .map(|(x, c)| c as f64 * ln_gamma(x as f64 + 1.0))
            .sum();
        let ln_k_term = if s == 0 { 0.0 } else { s_f * k_f.ln() };
        let log_const = -ln_k_term - log_fact + ln_gamma(a + s_f) - ln_beta(a, b);

        LikelihoodKernel {
            k,
            k_f,
            s,
            s_f,
            max_x,
            a,
            b,
            cells,
            series,
            series_min_m: SERIES_RATIO * max_x as f64,
            log_const,
        }
    }

    pub fn for_prior(counts: &SampleCounts, prior: &PriorSpec) -> Self {
        Self::new(counts, prior.a(), prior.b())
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn sum(&self) -> u64 {
        self.s
    }

    pub fn max_x(&self) -> u64 {
        self.max_x
    }

    /// Data-only part of the log-likelihood: `log L(m) = log_constant() + shape(m)`.
    pub fn log_constant(&self) -> f64 {
        self.log_const
    }

    /// `k·m` with overflow detection.
    pub fn km(&self, m: u64) -> Result<f64> {
        self.k
            .checked_mul(m)
            .map(|v| v as f64)
            .ok_or_else(|| Error::Overflow(format!("k·m overflows u64 (k={}, m={m})", self.k)))
    }

    /// `Σ_x c_x [ln (m)_x − x ln m]` for real `m >= max x`.
    pub fn sigma(&self, m: f64) -> f64 {
        if self.cells.is_empty() {
            return 0.0;
        }
        if m >= self.series_min_m {
            return -self.sigma_series(m);
        }
        let mut acc = 0.0;
        let mut c_st = 0.0;
        let mut xc_st = 0.0;
        let mut direct = 0.0;
        let mut direct_n = 0.0;
        let mut direct_xc = 0.0;
        for &(x, c) in &self.cells {
            let z = m + 1.0 - x;
            if z >= STIRLING_MIN {
                let v = x / z;
                acc += c * (z * log1pmx(v) - 0.5 * v.ln_1p() - stirling_tail(z));
                c_st += c;
                xc_st += x * c;
            } else {
                direct -= c * libm::lgamma(z);
                direct_n += c;
                direct_xc += x * c;
            }
        }
        count_lgamma(self.cells.len() as u64);
        if c_st > 0.0 {
            acc += xc_st * (1.0 / m).ln_1p() + c_st * stirling_tail(m + 1.0);
        }
        if direct_n > 0.0 {
            acc += direct + direct_n * libm::lgamma(m + 1.0) - direct_xc * m.ln();
        }
        acc
    }

    fn sigma_series(&self, m: f64) -> f64 {
        let rho = self.max_x as f64 / m;
        let mut pw = 1.0;
        let mut total = 0.0;
        for &t in &self.series {
            pw *= rho;
            let term = t * pw;
            total += term;
            if term <= 1e-17 * total {
                break;
            }
        }
        total
    }

    /// `ln B(a+S, b+km−S) + S ln(km)` without the data-only constant, with
    /// the `S ln(km)` growth removed analytically.
    fn beta_part(&self, km: f64) -> f64 {
        let z = self.b + km - self.s_f;
        let delta = self.a + self.s_f;
        count_lgamma(2);
        if z >= STIRLING_MIN {
            let u = delta / z;
            let ab = self.a + self.b;
            let growth = if self.s == 0 {
                0.0
            } else {
                -self.s_f * (ab / km).ln_1p()
            };
            growth - self.a * (km + ab).ln() - z * log1pmx(u) + 0.5 * u.ln_1p() + stirling_tail(z)
                - stirling_tail(z + delta)
        } else {
            let growth = if self.s == 0 { 0.0 } else { self.s_f * km.ln() };
            growth + libm::lgamma(z) - libm::lgamma(z + delta)
        }
    }

    /// m-dependent part of the log-likelihood at integer `m >= max(max x, 1)`.
    pub fn shape(&self, m: u64) -> Result<f64> {
        let km = self.km(m)?;
        Ok(self.sigma(m as f64) + self.beta_part(km))
    }

    /// Shape at real `m`; used by the tail quadrature beyond the dense table.
    pub fn shape_real(&self, m: f64) -> f64 {
        self.sigma(m) + self.beta_part(self.k_f * m)
    }

    /// Full log-likelihood at integer `m`.
    pub fn log_likelihood(&self, m: u64) -> Result<f64> {
        if m < self.max_x {
            return Err(Error::domain(format!(
                "likelihood is zero below the sample maximum (m={m} < {}); caller must not request it",
                self.max_x
            )));
        }
        if m == 0 {
            // Only the all-zero sample reaches here: L(0) = 1.
            return Ok(0.0);
        }
        Ok(self.log_const + self.shape(m)?)
    }

    /// m-dependent part of the profile log-likelihood
    /// `Σ c_x ln C(m,x) + S ln p̂ + (km−S) ln(1−p̂)`, `p̂ = S/(km)`.
    pub fn profile_shape(&self, m: u64) -> Result<f64> {
        let km = self.km(m)?;
        let u = self.s_f / km;
        Ok(self.sigma(m as f64) + km * crate::special::one_minus_log_one_minus(u))
    }

    /// Data-only part of the profile log-likelihood.
    pub fn profile_constant(&self) -> f64 {
        let log_fact: f64 = self
            .cells
            .iter()
            .map(|&(x, c)| c * libm::lgamma(x + 1.0))
            .sum();
        let s_term = if self.s == 0 {
            0.0
        } else {
            self.s_f * (self.s_f / self.k_f).ln() - self.s_f
        };
        s_term - log_fact
    }
}

/// `log L_{a,b}(m)` for the sample, where `L_{a,b}` is the beta-binomial
/// marginal likelihood under `P ~ Beta(a, b)`.
///
/// Cost is proportional to the number of distinct outcomes; `k` never
/// enters the loop bounds.
pub fn log_beta_binomial_likelihood(
    counts: &SampleCounts,
    m: u64,
    prior: &PriorSpec,
) -> Result<f64> {
    if m < counts.max() {
        return Err(Error::domain(format!(
            "likelihood is zero below the sample maximum (m={m} < {}); caller must not request it",
            counts.max()
        )));
    }
    counts
        .k()
        .checked_mul(m)
        .ok_or_else(|| Error::Overflow(format!("k·m overflows u64 (k={}, m={m})", counts.k())))?;
    LikelihoodKernel::for_prior(counts, prior).log_likelihood(m)
}
