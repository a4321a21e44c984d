//! Special functions and log-space accumulation used by the likelihood and
//! posterior code.
//!
//! `ln_gamma` delegates to the `libm` port of the musl `lgamma`, which is a
//! pure-Rust implementation and therefore bit-identical across platforms.
//! Large-argument differences of log-gamma values are never formed by
//! subtracting two `ln_gamma` results; they go through [`stirling_tail`] and
//! [`log1pmx`] so that the m-dependent part of a log-likelihood keeps its
//! absolute precision even when `k·m` is of order 1e18.

use std::cell::Cell;

/// Arguments at or above this value use the Stirling series.
pub const STIRLING_MIN: f64 = 10.0;

thread_local! {
    static LGAMMA_EVALS: Cell<u64> = const { Cell::new(0) };
}

/// Number of log-gamma evaluations (direct or Stirling-based) performed on
/// the current thread since the last [`reset_lgamma_evals`].
pub fn lgamma_evals() -> u64 {
    LGAMMA_EVALS.with(|c| c.get())
}

pub fn reset_lgamma_evals() {
    LGAMMA_EVALS.with(|c| c.set(0));
}

#[inline]
pub(crate) fn count_lgamma(n: u64) {
    LGAMMA_EVALS.with(|c| c.set(c.get() + n));
}

/// Natural log of the gamma function for `x > 0`.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    count_lgamma(1);
    libm::lgamma(x)
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    if a >= STIRLING_MIN && b >= STIRLING_MIN {
        // Avoids cancellation between three large log-gamma values.
        let s = a + b;
        count_lgamma(3);
        return 0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * s.ln()
            + (a - 0.5) * (a / s).ln()
            + (b - 0.5) * (b / s).ln()
            + stirling_tail(a)
            + stirling_tail(b)
            - stirling_tail(s);
    }
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Remainder of the Stirling series,
/// `ln Γ(x) - [(x - 1/2) ln x - x + ln(2π)/2]`, for `x >= STIRLING_MIN`.
#[inline]
pub fn stirling_tail(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0
        + r2 * (-1.0 / 360.0
            + r2 * (1.0 / 1260.0
                + r2 * (-1.0 / 1680.0
                    + r2 * (1.0 / 1188.0 + r2 * (-691.0 / 360_360.0 + r2 * (1.0 / 156.0)))))))
}

/// `ln(1 + u) - u`, accurate for small `|u|`.
pub fn log1pmx(u: f64) -> f64 {
    if !(-0.5..=1.0).contains(&u) {
        return u.ln_1p() - u;
    }
    // ln(1+u) = 2 atanh(t), t = u / (2 + u); the leading 2t - u term folds
    // into -u t exactly.
    let t = u / (2.0 + u);
    let t2 = t * t;
    let mut pow = t2;
    let mut acc = 0.0;
    let mut j = 3.0;
    loop {
        let term = pow / j;
        acc += term;
        if term.abs() <= 1e-18 * acc.abs() || j > 81.0 {
            break;
        }
        pow *= t2;
        j += 2.0;
    }
    -u * t + 2.0 * t * acc
}

/// `(1 - u) ln(1 - u) + u` for `u` in `[0, 1]`, accurate for small `u`.
pub fn one_minus_log_one_minus(u: f64) -> f64 {
    if u >= 1.0 {
        return 1.0;
    }
    if u <= 0.0 {
        return 0.0;
    }
    (1.0 - u) * log1pmx(-u) + u * u
}

/// Riemann zeta function for real `s > 1`, by Euler–Maclaurin summation.
pub fn zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

/// Hurwitz zeta `Σ_{n≥0} (n + q)^{-s}` for `s > 1`, `q > 0`.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    debug_assert!(s > 1.0 && q > 0.0);
    // B_{2j} / (2j)!
    const B2J_OVER_FACT: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
        1.0 / 74_724_249_600.0,
        -3617.0 / 10_670_622_842_880_000.0,
    ];
    let shift = 24usize;
    let mut head = CompensatedSum::new();
    for n in 0..shift {
        head.add((n as f64 + q).powf(-s));
    }
    let a = shift as f64 + q;
    let mut tail = a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // s (s+1) ... (s+2j-2) a^{-s-2j+1}
    let mut rising = s;
    let mut pow = a.powf(-s - 1.0);
    let a2 = a * a;
    for (j, c) in B2J_OVER_FACT.iter().enumerate() {
        tail += c * rising * pow;
        let m = 2.0 * j as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        pow /= a2;
    }
    head.value() + tail
}

/// Streaming log-sum-exp with max shift.
#[derive(Clone, Copy, Debug)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    /// `ln Σ exp(x_i)`; `-inf` when empty.
    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Neumaier-compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
