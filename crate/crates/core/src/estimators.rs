//! Point estimators of `n` and posterior summaries.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LikelihoodKernel, PosteriorTable, PriorSpec, SampleCounts};

/// Estimator identifier. The string form (`scale[g=1;a=1;b=1]`, `mle`, …)
/// is what appears in persisted records.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EstimatorId {
    Scale(PriorSpec),
    PostMean(PriorSpec),
    PostMode(PriorSpec),
    Mle,
    SampleMax,
}

impl EstimatorId {
    /// Prior behind a Bayes estimator.
    pub fn prior(&self) -> Option<&PriorSpec> {
        match self {
            EstimatorId::Scale(p) | EstimatorId::PostMean(p) | EstimatorId::PostMode(p) => Some(p),
            EstimatorId::Mle | EstimatorId::SampleMax => None,
        }
    }

    pub fn is_bayes(&self) -> bool {
        self.prior().is_some()
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorId::Scale(p) => write!(f, "scale[{p}]"),
            EstimatorId::PostMean(p) => write!(f, "post_mean[{p}]"),
            EstimatorId::PostMode(p) => write!(f, "post_mode[{p}]"),
            EstimatorId::Mle => f.write_str("mle"),
            EstimatorId::SampleMax => f.write_str("sample_max"),
        }
    }
}

impl FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mle" => return Ok(EstimatorId::Mle),
            "sample_max" => return Ok(EstimatorId::SampleMax),
            _ => {}
        }
        let bad = || Error::Config(format!("unknown estimator id `{s}`"));
        let (name, rest) = s.split_once('[').ok_or_else(bad)?;
        let body = rest.strip_suffix(']').ok_or_else(bad)?;
        let (mut g, mut a, mut b) = (None, None, None);
        for part in body.split(';') {
            let (key, val) = part.split_once('=').ok_or_else(bad)?;
            let v: f64 = val.parse().map_err(|_| bad())?;
            match key {
                "g" => g = Some(v),
                "a" => a = Some(v),
                "b" => b = Some(v),
                _ => return Err(bad()),
            }
        }
        let prior = PriorSpec::new(g.ok_or_else(bad)?, a.ok_or_else(bad)?, b.ok_or_else(bad)?)?;
        match name {
            "scale" => Ok(EstimatorId::Scale(prior)),
            "post_mean" => Ok(EstimatorId::PostMean(prior)),
            "post_mode" => Ok(EstimatorId::PostMode(prior)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for EstimatorId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EstimatorId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One estimate of `n`, with the posterior mass at the true `n` for Bayes
/// estimators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub estimator_id: EstimatorId,
    pub value: f64,
    pub aux: Option<f64>,
}

/// `E[1/N | data] / E[1/N² | data]`, the Bayes estimator under relative
/// quadratic loss.
pub fn scale_estimator(posterior: &PosteriorTable) -> f64 {
    posterior.m_start() as f64 + posterior.weighted_offset(-2)
}

/// `E[N | data]`; `+inf` when the posterior tail exponent is at most 2.
pub fn posterior_mean(posterior: &PosteriorTable) -> f64 {
    posterior.m_start() as f64 + posterior.weighted_offset(0)
}

/// Argmax of the posterior; ties go to the smaller `m`.
pub fn posterior_mode(posterior: &PosteriorTable) -> u64 {
    let mut best = 0;
    let mut best_w = f64::NEG_INFINITY;
    for (i, &w) in posterior.log_weights().iter().enumerate() {
        if w > best_w {
            best_w = w;
            best = i;
        }
    }
    posterior.m_start() + best as u64
}

/// Posterior mass at `n_true`.
pub fn posterior_prob_of(posterior: &PosteriorTable, n_true: u64) -> f64 {
    match posterior.log_weight_at(n_true) {
        Some(w) => (w - posterior.log_norm()).exp().clamp(0.0, 1.0),
        None => 0.0,
    }
}

/// Profile maximum-likelihood estimate of `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MleEstimate {
    pub n: u64,
    /// The profile was still nondecreasing at the cap.
    pub divergent: bool,
    /// `S = 0`: `p̂ = 0` and every `n` fits equally well.
    pub degenerate: bool,
}

const MLE_PATIENCE: u32 = 50;

/// Default search cap `100 · max(M_k, 1)`.
pub fn default_mle_cap(counts: &SampleCounts) -> u64 {
    100 * counts.max().max(1)
}

/// Maximizes the profile likelihood in `m` over `[max(M_k, 1), m_cap]` by a
/// forward scan that stops after 50 consecutive decreases.
pub fn mle_n(counts: &SampleCounts, m_cap: u64) -> Result<MleEstimate> {
    let m0 = counts.max().max(1);
    if m_cap < counts.max() {
        return Err(Error::domain(format!(
            "m_cap={m_cap} lies below the sample maximum {}",
            counts.max()
        )));
    }
    if counts.sum() == 0 {
        return Ok(MleEstimate {
            n: m0,
            divergent: false,
            degenerate: true,
        });
    }
    let m_cap = m_cap.max(m0);
    let kernel = LikelihoodKernel::new(counts, 1.0, 1.0);
    let mut best = m0;
    let mut best_v = kernel.profile_shape(m0)?;
    let mut prev = best_v;
    let mut falling = 0;
    let mut m = m0;
    while m < m_cap {
        m += 1;
        let v = kernel.profile_shape(m)?;
        if v > best_v {
            best_v = v;
            best = m;
        }
        if v < prev {
            falling += 1;
            if falling >= MLE_PATIENCE {
                return Ok(MleEstimate {
                    n: best,
                    divergent: false,
                    degenerate: false,
                });
            }
        } else {
            falling = 0;
        }
        prev = v;
    }
    let divergent = m_cap > m0 && falling == 0;
    Ok(MleEstimate {
        n: if divergent { m_cap } else { best },
        divergent,
        degenerate: false,
    })
}

/// The sample maximum `M_k`.
pub fn sample_max(counts: &SampleCounts) -> u64 {
    counts.max()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_posterior;

    const ZETA3: f64 = 1.202_056_903_159_594_3;

    fn prior(g: f64, a: f64, b: f64) -> PriorSpec {
        PriorSpec::new(g, a, b).unwrap()
    }

    fn pi2_6() -> f64 {
        std::f64::consts::PI.powi(2) / 6.0
    }

    #[test]
    fn scale_closed_form() {
        let c = SampleCounts::from_pairs(&[(1, 1)]).unwrap();
        let t = build_posterior(&c, &prior(1.0, 1.0, 1.0), 1e-12).unwrap();
        let want = (pi2_6() - 1.0) / (ZETA3 - pi2_6() + 1.0);
        let got = scale_estimator(&t);
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        assert!((want - 1.15761).abs() < 1e-5);
    }

    #[test]
    fn posterior_mean_closed_form() {
        let c = SampleCounts::from_pairs(&[(1, 1)]).unwrap();
        let t = build_posterior(&c, &prior(2.0, 1.0, 1.0), 1e-12).unwrap();
        let want = 1.0 / (pi2_6() - 1.0);
        let got = posterior_mean(&t);
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn prob_of_true_n_closed_form() {
        let c = SampleCounts::from_pairs(&[(0, 1)]).unwrap();
        let t = build_posterior(&c, &prior(2.0, 1.0, 1.0), 1e-12).unwrap();
        let want = 0.5 / (pi2_6() - 1.0);
        assert!((posterior_prob_of(&t, 1) - want).abs() < 1e-12);
        assert_eq!(posterior_mode(&t), 1);
    }

    #[test]
    fn degenerate_tables() {
        let t = PosteriorTable::from_log_weights(7, vec![0.0]).unwrap();
        assert_eq!(scale_estimator(&t), 7.0);
        assert_eq!(posterior_mean(&t), 7.0);
        assert_eq!(posterior_mode(&t), 7);
        assert_eq!(posterior_prob_of(&t, 7), 1.0);
        assert_eq!(posterior_prob_of(&t, 6), 0.0);
        let t = PosteriorTable::from_log_weights(3, vec![f64::NEG_INFINITY, 0.0]).unwrap();
        assert_eq!(scale_estimator(&t), 4.0);
    }

    #[test]
    fn mode_tie_goes_low() {
        let t = PosteriorTable::from_log_weights(4, vec![-1.0, 0.0, 0.0, -3.0]).unwrap();
        assert_eq!(posterior_mode(&t), 5);
    }

    #[test]
    fn mle_examples() {
        let c = SampleCounts::from_pairs(&[(4, 1)]).unwrap();
        assert_eq!(mle_n(&c, default_mle_cap(&c)).unwrap().n, 4);
        let c = SampleCounts::from_pairs(&[(2, 2)]).unwrap();
        assert_eq!(mle_n(&c, default_mle_cap(&c)).unwrap().n, 2);
        let c = SampleCounts::from_pairs(&[(0, 5)]).unwrap();
        let e = mle_n(&c, 100).unwrap();
        assert!(e.degenerate);
        assert_eq!(e.n, 1);
        assert!(mle_n(&SampleCounts::from_pairs(&[(9, 1)]).unwrap(), 3).is_err());
    }

    #[test]
    fn mle_matches_exhaustive_scan() {
        fn profile(xs: &[u64], m: u64) -> f64 {
            let k = xs.len() as f64;
            let s: u64 = xs.iter().sum();
            let p = s as f64 / (k * m as f64);
            let lg = libm::lgamma;
            let mf = m as f64;
            xs.iter()
                .map(|&x| {
                    let x = x as f64;
                    lg(mf + 1.0) - lg(x + 1.0) - lg(mf - x + 1.0) + x * p.ln() + (mf - x) * (-p).ln_1p()
                })
                .sum()
        }
        for xs in [vec![1u64, 3], vec![2, 5, 3, 4, 4], vec![7, 9, 8, 8, 10, 6]] {
            let c = SampleCounts::from_observations(&xs).unwrap();
            let mut best = (0, f64::NEG_INFINITY);
            for m in c.max()..=1000 {
                let v = profile(&xs, m);
                if v > best.1 + 1e-12 {
                    best = (m, v);
                }
            }
            let got = mle_n(&c, 1000).unwrap();
            if got.divergent {
                assert_eq!(best.0, 1000, "{xs:?}");
            } else {
                assert_eq!(got.n, best.0, "{xs:?}");
            }
        }
    }

    #[test]
    fn mle_flags_divergence() {
        // Overdispersed relative to any binomial: the profile rises forever.
        let c = SampleCounts::from_observations(&[0, 0, 0, 6, 6, 6]).unwrap();
        let e = mle_n(&c, 500).unwrap();
        assert!(e.divergent);
        assert_eq!(e.n, 500);
    }

    #[test]
    fn estimator_ids_round_trip() {
        for s in ["scale[g=1;a=1;b=1]", "post_mean[g=0.5;a=5;b=1]", "post_mode[g=1;a=1;b=5]", "mle", "sample_max"] {
            let id: EstimatorId = s.parse().unwrap();
            assert_eq!(id.to_string(), s);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(serde_json::from_str::<EstimatorId>(&json).unwrap(), id);
        }
        assert!("scale[g=0.5;a=0.4;b=1]".parse::<EstimatorId>().is_err());
        assert!("median".parse::<EstimatorId>().is_err());
    }

    #[test]
    fn sample_max_examples() {
        assert_eq!(sample_max(&SampleCounts::from_pairs(&[(0, 5)]).unwrap()), 0);
        assert_eq!(sample_max(&SampleCounts::from_pairs(&[(2, 1), (7, 3)]).unwrap()), 7);
    }
}
