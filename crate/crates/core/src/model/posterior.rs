//! Truncated posterior over `N`.
//!
//! Weights are stored without the data-only likelihood constant, so they
//! keep full absolute precision however large `k` is. The constant is kept
//! separately in [`PosteriorTable::log_offset`].
//!
//! Truncation: terms decay like `m^{-(a+γ)}`. The dense walk stops once the
//! power-tail bound `w_m · m / (s − 1)` falls below `tol` times the running
//! total. When that would need far more terms than the posterior has
//! structure (exponents near 2 with a flat posterior), the remainder is
//! integrated instead: Gauss–Legendre in `ln m` plus the Euler–Maclaurin
//! midpoint correction, closed by the analytic power-law remainder.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::model::counts::SampleCounts;
use crate::model::likelihood::LikelihoodKernel;
use crate::model::prior::PriorSpec;
use crate::special::{gauss_legendre, log_add_exp, CompensatedSum, LogSumExp};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const MAX_TERMS: usize = 10_000_000;
const MIN_TERMS: u64 = 64;
const TAIL_SWITCH_LEN: usize = 1024;

/// Moment orders tracked for the modelled tail: `E[N^j]` for `j = -2..=1`.
const MOMENTS: [i32; 4] = [-2, -1, 0, 1];

#[derive(Clone, Debug)]
struct TailModel {
    /// `ln Σ_{m > m_stop} m^j w_m`, indexed like [`MOMENTS`]; `+inf` when
    /// the moment diverges.
    log_moments: [f64; 4],
}

#[derive(Clone, Debug)]
struct Source {
    kernel: Arc<LikelihoodKernel>,
    gamma: f64,
}

impl Source {
    fn log_weight(&self, m: u64) -> Result<f64> {
        Ok(self.kernel.shape(m)? - self.gamma * (m as f64).ln())
    }

    fn log_weight_real(&self, x: f64) -> f64 {
        self.kernel.shape_real(x) - self.gamma * x.ln()
    }
}

/// Log-weights of the posterior of `N` on `m_start..=m_stop`, with
/// normalization metadata.
#[derive(Clone, Debug)]
pub struct PosteriorTable {
    m_start: u64,
    log_weights: Vec<f64>,
    log_norm: f64,
    tail_bound_rel: f64,
    log_offset: f64,
    tail: Option<TailModel>,
    source: Option<Source>,
}

impl PosteriorTable {
    /// Table from explicit log-weights. `-inf` entries are allowed (zero
    /// mass), NaN and `+inf` are not.
    pub fn from_log_weights(m_start: u64, log_weights: Vec<f64>) -> Result<Self> {
        if m_start == 0 {
            return Err(Error::domain("posterior support starts at m >= 1"));
        }
        if log_weights.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
            return Err(Error::Numeric("log-weights must not be NaN or +inf".into()));
        }
        let mut acc = LogSumExp::new();
        for &w in &log_weights {
            acc.add(w);
        }
        let log_norm = acc.value();
        if !log_norm.is_finite() {
            return Err(Error::Numeric("posterior table has no mass".into()));
        }
        Ok(PosteriorTable {
            m_start,
            log_weights,
            log_norm,
            tail_bound_rel: 0.0,
            log_offset: 0.0,
            tail: None,
            source: None,
        })
    }

    pub fn m_start(&self) -> u64 {
        self.m_start
    }

    /// Last support point held densely.
    pub fn m_stop(&self) -> u64 {
        self.m_start + self.log_weights.len() as u64 - 1
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Log of the total posterior mass, including a modelled tail if any.
    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// Bound on the relative mass that is neither held densely nor
    /// modelled.
    pub fn tail_bound_rel(&self) -> f64 {
        self.tail_bound_rel
    }

    /// Add to a log-weight to obtain `ln(L(m) Π_N(m))`.
    pub fn log_offset(&self) -> f64 {
        self.log_offset
    }

    /// Whether the mass beyond `m_stop` is carried by the quadrature model.
    pub fn has_tail_model(&self) -> bool {
        self.tail.is_some()
    }

    /// Posterior mass beyond `m_stop` accounted for in `log_norm`.
    pub fn tail_mass(&self) -> f64 {
        match &self.tail {
            Some(t) => (t.log_moments[2] - self.log_norm).exp(),
            None => 0.0,
        }
    }

    /// Normalized dense weights.
    pub fn weights(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.log_weights
            .iter()
            .enumerate()
            .map(move |(i, &w)| (self.m_start + i as u64, (w - self.log_norm).exp()))
    }

    /// Unnormalized log-weight at any `m`. Beyond `m_stop` it is recomputed
    /// from the likelihood when the table was built from data.
    pub fn log_weight_at(&self, m: u64) -> Option<f64> {
        if m < self.m_start {
            return None;
        }
        let i = (m - self.m_start) as usize;
        if let Some(&w) = self.log_weights.get(i) {
            return Some(w);
        }
        self.source.as_ref().and_then(|s| s.log_weight(m).ok())
    }

    /// `Σ w_m m^j (m − m_start) / Σ w_m m^j`. Measuring from `m_start`
    /// keeps ratio estimators exact on degenerate tables.
    pub fn weighted_offset(&self, j: i32) -> f64 {
        let jf = j as f64;
        let m0 = self.m_start as f64;
        let mut num = CompensatedSum::new();
        let mut den = CompensatedSum::new();
        for (i, &w) in self.log_weights.iter().enumerate() {
            let m = (self.m_start + i as u64) as f64;
            let q = (w + jf * m.ln() - self.log_norm).exp();
            num.add(q * i as f64);
            den.add(q);
        }
        if let Some(t) = &self.tail {
            let at = |q: i32| {
                let idx = MOMENTS.iter().position(|&v| v == q);
                idx.map_or(f64::INFINITY, |i| t.log_moments[i])
            };
            let lo = at(j);
            let hi = at(j + 1);
            if lo == f64::INFINITY || hi == f64::INFINITY {
                return f64::INFINITY;
            }
            let tj = (lo - self.log_norm).exp();
            num.add((hi - self.log_norm).exp() - m0 * tj);
            den.add(tj);
        }
        num.value() / den.value()
    }

    /// `ln E[N^j | data]` over dense support plus modelled tail.
    pub fn log_moment(&self, j: i32) -> f64 {
        let mut acc = LogSumExp::new();
        let jf = j as f64;
        for (i, &w) in self.log_weights.iter().enumerate() {
            let m = (self.m_start + i as u64) as f64;
            acc.add(w + jf * m.ln());
        }
        let mut total = acc.value();
        if let Some(t) = &self.tail {
            if let Some(idx) = MOMENTS.iter().position(|&q| q == j) {
                total = log_add_exp(total, t.log_moments[idx]);
                if t.log_moments[idx] == f64::INFINITY {
                    total = f64::INFINITY;
                }
            }
        }
        total - self.log_norm
    }
}

/// Builds the posterior table of `N` for the sample under `prior`.
pub fn build_posterior(counts: &SampleCounts, prior: &PriorSpec, tol: f64) -> Result<PosteriorTable> {
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(Error::domain(format!("truncation tolerance must lie in (0, 1e-6], got {tol}")));
    }
    let kernel = Arc::new(LikelihoodKernel::for_prior(counts, prior));
    build_with_kernel(kernel, prior, tol)
}

/// As [`build_posterior`] with a kernel shared across calls.
pub fn build_with_kernel(
    kernel: Arc<LikelihoodKernel>,
    prior: &PriorSpec,
    tol: f64,
) -> Result<PosteriorTable> {
    let source = Source {
        kernel: Arc::clone(&kernel),
        gamma: prior.gamma(),
    };
    let m_start = kernel.max_x().max(1);
    let s_asym = prior.tail_exponent();
    let big_x = kernel.max_x() as f64;
    let ln_tol = tol.ln();

    let mut log_weights: Vec<f64> = Vec::new();
    let mut acc = LogSumExp::new();
    let mut mode_lw = f64::NEG_INFINITY;
    let mut m = m_start;
    let mut last_s = f64::NAN;
    loop {
        let lw = source.log_weight(m)?;
        if !lw.is_finite() {
            return Err(Error::Numeric(format!("non-finite posterior log-weight at m={m}")));
        }
        acc.add(lw);
        log_weights.push(lw);
        if lw > mode_lw {
            mode_lw = lw;
        }
        let total = acc.value();

        if m >= m_start + MIN_TERMS {
            let prev = log_weights[log_weights.len() - 2];
            let mf = m as f64;
            let s_loc = (prev - lw) / (mf / (mf - 1.0)).ln();
            last_s = s_loc;
            let s_eff = s_loc.min(s_asym);
            if s_eff > 1.0 {
                let log_bound = lw + mf.ln() - (s_eff - 1.0).ln();
                if log_bound - total < ln_tol {
                    return Ok(PosteriorTable {
                        m_start,
                        log_weights,
                        log_norm: total,
                        tail_bound_rel: (log_bound - total).exp(),
                        log_offset: kernel.log_constant(),
                        tail: None,
                        source: Some(source),
                    });
                }
                // Projected stop point under the current decay; switch to
                // the tail model when it is far away.
                let past_mode = lw < mode_lw;
                if log_weights.len() >= TAIL_SWITCH_LEN
                    && mf >= 3.0 * big_x
                    && s_loc < s_asym + 1.0
                    && past_mode
                {
                    let excess = log_bound - total - ln_tol;
                    let projected = mf * (excess / (s_eff - 1.0)).exp();
                    if projected > 2.0 * mf && power_law_ahead(&source, mf + 0.5, s_asym) {
                        return finish_with_tail(m_start, log_weights, total, &source, s_asym, tol, kernel.log_constant());
                    }
                }
            }
        }

        if log_weights.len() >= MAX_TERMS {
            if last_s <= 1.0 {
                return Err(Error::Numeric(format!(
                    "posterior weights not summable: local decay exponent {last_s:.4} <= 1 at m={m}"
                )));
            }
            return Err(Error::Truncation {
                tol,
                terms: log_weights.len(),
            });
        }
        m += 1;
    }
}

fn gl_rules() -> &'static [(Vec<f64>, Vec<f64>); 2] {
    static RULES: OnceLock<[(Vec<f64>, Vec<f64>); 2]> = OnceLock::new();
    RULES.get_or_init(|| [gauss_legendre(12), gauss_legendre(20)])
}

/// Local decay exponent `-d ln w / d ln x` at real `x`.
fn local_exponent(source: &Source, x: f64) -> f64 {
    let h: f64 = 1e-3;
    (source.log_weight_real(x * (-h).exp()) - source.log_weight_real(x * h.exp())) / (2.0 * h)
}

/// Whether the decay stays power-law-like over the first quadrature panels
/// past `x0`. The integer exponent alone also passes through `(1, s_asym+1)`
/// just past the mode of a sharply peaked posterior.
fn power_law_ahead(source: &Source, x0: f64, s_asym: f64) -> bool {
    (0..=4).all(|i| {
        let s = local_exponent(source, x0 * (0.5 * i as f64).exp());
        s > 1.0 && s < s_asym + 1.0
    })
}

fn finish_with_tail(
    m_start: u64,
    log_weights: Vec<f64>,
    dense_total: f64,
    source: &Source,
    s_asym: f64,
    tol: f64,
    log_offset: f64,
) -> Result<PosteriorTable> {
    let m_stop = m_start + log_weights.len() as u64 - 1;
    let x0 = m_stop as f64 + 0.5;
    let ln_x0 = x0.ln();
    let h0 = source.log_weight_real(x0);
    let s0 = local_exponent(source, x0);
    let [(n12, w12), (n20, w20)] = gl_rules();

    const PANEL: f64 = 0.5;
    const MAX_U: f64 = 300.0;

    let mut log_moments = [f64::INFINITY; 4];
    let mut log_err0 = f64::NEG_INFINITY;
    for (idx, &j) in MOMENTS.iter().enumerate() {
        let jf = j as f64;
        if s_asym <= jf + 1.0 {
            continue; // diverges
        }
        // Everything below is scaled by exp(-(h0 + (j+1) ln x0)).
        let scale = h0 + (jf + 1.0) * ln_x0;
        let integrand = |u: f64| {
            let x = x0 * u.exp();
            (source.log_weight_real(x) + (jf + 1.0) * x.ln() - scale).exp()
        };
        let mut i20 = 0.0;
        let mut i12 = 0.0;
        let mut u = 0.0;
        let remainder;
        let remainder_err;
        loop {
            let mid = u + 0.5 * PANEL;
            let half = 0.5 * PANEL;
            i20 += half * n20.iter().zip(w20).map(|(t, w)| w * integrand(mid + half * t)).sum::<f64>();
            i12 += half * n12.iter().zip(w12).map(|(t, w)| w * integrand(mid + half * t)).sum::<f64>();
            u += PANEL;
            let x_end = x0 * u.exp();
            let s_end = local_exponent(source, x_end);
            if s_end > jf + 1.0 {
                let r = integrand(u) / (s_end - jf - 1.0);
                // The exponent beyond lies between s_end and s_asym.
                let r_err = r * (s_end - s_asym).abs() / (s_end.min(s_asym) - jf - 1.0);
                if r_err <= 1e-16 * i20 || r <= 1e-17 * i20 {
                    remainder = r;
                    remainder_err = r_err;
                    break;
                }
            }
            if u >= MAX_U {
                return Err(Error::Numeric(format!(
                    "posterior tail did not settle to a power law by m={x_end:.3e}"
                )));
            }
        }
        // Σ_{m>m_stop} f(m) = ∫_{x0}^∞ f + f'(x0)/24 − 7 f'''(x0)/5760 + …
        // with f_j(x) = x^j w(x) locally ∝ x^{j−s0}.
        let e = jf - s0;
        let f_x0 = 1.0 / x0; // f_j(x0) in scaled units
        let d1 = e * f_x0 / x0;
        let d3 = e * (e - 1.0) * (e - 2.0) * f_x0 / (x0 * x0 * x0);
        let d5 = d3 * (e - 3.0) * (e - 4.0) / (x0 * x0);
        let total_scaled = i20 + remainder + d1 / 24.0 - 7.0 * d3 / 5760.0;
        if !(total_scaled > 0.0) {
            return Err(Error::Numeric("tail quadrature produced a non-positive mass".into()));
        }
        log_moments[idx] = scale + total_scaled.ln();
        if j == 0 {
            let err = (i20 - i12).abs() + 31.0 * d5.abs() / 967_680.0 + remainder_err;
            log_err0 = err.ln() + scale;
        }
    }
    let log_norm = log_add_exp(dense_total, log_moments[2]);
    let tail_bound_rel = (log_err0 - log_norm).exp();
    if !(tail_bound_rel <= tol) {
        log::warn!("posterior tail model error {tail_bound_rel:.3e} exceeds tolerance {tol:.1e}");
    }
    Ok(PosteriorTable {
        m_start,
        log_weights,
        log_norm,
        tail_bound_rel,
        log_offset,
        tail: Some(TailModel { log_moments }),
        source: Some(source.clone()),
    })
}
