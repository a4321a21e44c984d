use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome-frequency histogram of `k` draws from a binomial distribution.
///
/// `counts[x]` is the number of draws equal to `x`. The histogram is the
/// sufficient statistic for every likelihood computed in this crate, so
/// memory and time scale with the largest observed value, never with `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct SampleCounts {
    k: u64,
    counts: Vec<u64>,
    sum_s: u64,
    max_m: u64,
}

impl SampleCounts {
    /// Builds the histogram from a dense frequency vector indexed by outcome.
    pub fn from_frequencies(mut counts: Vec<u64>) -> Result<Self> {
        while counts.len() > 1 && counts.last() == Some(&0) {
            counts.pop();
        }
        if counts.is_empty() {
            counts.push(0);
        }
        let mut k: u64 = 0;
        let mut sum_s: u64 = 0;
        for (x, &c) in counts.iter().enumerate() {
            k = k
                .checked_add(c)
                .ok_or_else(|| Error::Overflow("total draw count exceeds u64".into()))?;
            let xc = (x as u64)
                .checked_mul(c)
                .ok_or_else(|| Error::Overflow("sum of observations exceeds u64".into()))?;
            sum_s = sum_s
                .checked_add(xc)
                .ok_or_else(|| Error::Overflow("sum of observations exceeds u64".into()))?;
        }
        if k == 0 {
            return Err(Error::domain("sample must contain at least one draw"));
        }
        let max_m = (counts.len() - 1) as u64;
        Ok(SampleCounts {
            k,
            counts,
            sum_s,
            max_m,
        })
    }

    /// Builds the histogram from `(outcome, frequency)` pairs. Repeated
    /// outcomes are merged.
    pub fn from_pairs(pairs: &[(u64, u64)]) -> Result<Self> {
        let len = pairs.iter().map(|&(x, _)| x + 1).max().unwrap_or(1);
        let len = usize::try_from(len).map_err(|_| Error::domain("outcome too large"))?;
        let mut counts = vec![0u64; len];
        for &(x, c) in pairs {
            let slot = &mut counts[x as usize];
            *slot = slot
                .checked_add(c)
                .ok_or_else(|| Error::Overflow("frequency exceeds u64".into()))?;
        }
        Self::from_frequencies(counts)
    }

    /// Builds the histogram from individual observations.
    pub fn from_observations(xs: &[u64]) -> Result<Self> {
        let len = xs.iter().copied().max().map_or(1, |m| m as usize + 1);
        let mut counts = vec![0u64; len];
        for &x in xs {
            counts[x as usize] += 1;
        }
        Self::from_frequencies(counts)
    }

    /// Total number of draws.
    pub fn k(&self) -> u64 {
        self.k
    }

    /// `S = Σ x_i`.
    pub fn sum(&self) -> u64 {
        self.sum_s
    }

    /// The sample maximum `M_k` (0 for the all-zero sample).
    pub fn max(&self) -> u64 {
        self.max_m
    }

    /// Frequency of outcome `x`.
    pub fn count(&self, x: u64) -> u64 {
        self.counts.get(x as usize).copied().unwrap_or(0)
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.counts
    }

    /// Outcomes with nonzero frequency, ascending.
    pub fn distinct(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(x, &c)| (x as u64, c))
    }

    pub fn num_distinct(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

impl TryFrom<Vec<u64>> for SampleCounts {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        Self::from_frequencies(v)
    }
}

impl From<SampleCounts> for Vec<u64> {
    fn from(c: SampleCounts) -> Self {
        c.counts
    }
}
