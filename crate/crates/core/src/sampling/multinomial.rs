//! Histogram of `k` binomial draws via the conditional-binomial chain.
//!
//! `c_0 ~ Bin(k, q_0)`, `c_x ~ Bin(k − Σ_{y<x} c_y, q_x / Σ_{y≥x} q_y)`; the
//! last cell takes the remainder. Exact, `O(n)` per histogram whatever `k`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::SampleCounts;
use crate::sampling::binomial::Binomial;
use crate::special::log_add_exp;

/// Reusable sampler for the outcome histogram of `Bin(n, p)` draws.
#[derive(Clone, Debug)]
pub struct CountSampler {
    n: u64,
    /// `q_x / Σ_{y≥x} q_y`, clamped to `[0, 1]`.
    cond: Vec<f64>,
}

impl CountSampler {
    pub fn new(n: u64, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n must be at least 1"));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("p must lie in [0, 1], got {p}")));
        }
        let len = usize::try_from(n + 1).map_err(|_| Error::domain("n too large"))?;
        let mut cond = vec![0.0; len];
        if p == 0.0 {
            cond[0] = 1.0;
        } else if p == 1.0 {
            cond[len - 1] = 1.0;
        } else {
            let nf = n as f64;
            let lp = p.ln();
            let lq = (-p).ln_1p();
            let ln_n1 = libm::lgamma(nf + 1.0);
            let log_q: Vec<f64> = (0..len)
                .map(|x| {
                    let xf = x as f64;
                    ln_n1 - libm::lgamma(xf + 1.0) - libm::lgamma(nf - xf + 1.0) + xf * lp + (nf - xf) * lq
                })
                .collect();
            // Suffix sums in log space; the tail is summed from its small end.
            let mut suffix = f64::NEG_INFINITY;
            for x in (0..len).rev() {
                suffix = log_add_exp(suffix, log_q[x]);
                cond[x] = (log_q[x] - suffix).exp().clamp(0.0, 1.0);
            }
        }
        cond[len - 1] = 1.0;
        Ok(CountSampler { n, cond })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Histogram of `k` independent `Bin(n, p)` draws.
    pub fn draw<R: Rng + ?Sized>(&self, k: u64, rng: &mut R) -> Result<SampleCounts> {
        if k == 0 {
            return Err(Error::domain("k must be at least 1"));
        }
        let mut counts = Vec::with_capacity(self.cond.len());
        let mut left = k;
        for (x, &q) in self.cond.iter().enumerate() {
            let c = if x + 1 == self.cond.len() {
                left
            } else {
                Binomial::new(left, q)?.sample(rng)
            };
            counts.push(c);
            left -= c;
            if left == 0 {
                break;
            }
        }
        SampleCounts::from_frequencies(counts)
    }
}

/// Histogram of `k` independent `Bin(n, p)` draws.
pub fn draw_counts<R: Rng + ?Sized>(k: u64, n: u64, p: f64, rng: &mut R) -> Result<SampleCounts> {
    CountSampler::new(n, p)?.draw(k, rng)
}
