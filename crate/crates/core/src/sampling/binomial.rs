//! Exact binomial variates for up to ~1e15 trials.
//!
//! Inversion (BINV) when `n·min(p, 1−p) < 30`, otherwise the BTPE
//! triangle/parallelogram/exponential rejection sampler of Kachitvichyanukul
//! and Schmeiser (1988). Expected time is bounded in `n` for both.

use rand::Rng;

use crate::error::{Error, Result};

const INVERSION_LIMIT: f64 = 30.0;

#[derive(Clone, Copy, Debug)]
enum Method {
    Constant(u64),
    Inversion { qn: f64, r: f64, q: f64, bound: f64 },
    Btpe(Btpe),
}

#[derive(Clone, Copy, Debug)]
struct Btpe {
    r: f64,
    q: f64,
    nrq: f64,
    m: f64,
    xm: f64,
    xl: f64,
    xr: f64,
    c: f64,
    laml: f64,
    lamr: f64,
    p1: f64,
    p2: f64,
    p3: f64,
    p4: f64,
}

/// `Binomial(n, p)` sampler with precomputed setup.
#[derive(Clone, Copy, Debug)]
pub struct Binomial {
    n: u64,
    flip: bool,
    method: Method,
}

impl Binomial {
    pub fn new(n: u64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("binomial probability must lie in [0, 1], got {p}")));
        }
        if n == 0 || p == 0.0 {
            return Ok(Binomial { n, flip: false, method: Method::Constant(0) });
        }
        if p == 1.0 {
            return Ok(Binomial { n, flip: false, method: Method::Constant(n) });
        }
        let flip = p > 0.5;
        let r = if flip { 1.0 - p } else { p };
        let q = 1.0 - r;
        let nf = n as f64;
        let np = nf * r;
        let method = if np < INVERSION_LIMIT {
            Method::Inversion {
                qn: (nf * (-r).ln_1p()).exp(),
                r,
                q,
                bound: nf.min(np + 10.0 * (np * q + 1.0).sqrt()),
            }
        } else {
            let fm = np + r;
            let m = fm.floor();
            let nrq = np * q;
            let p1 = (2.195 * nrq.sqrt() - 4.6 * q).floor() + 0.5;
            let xm = m + 0.5;
            let xl = xm - p1;
            let xr = xm + p1;
            let c = 0.134 + 20.5 / (15.3 + m);
            let a = (fm - xl) / (fm - xl * r);
            let laml = a * (1.0 + 0.5 * a);
            let a = (xr - fm) / (xr * q);
            let lamr = a * (1.0 + 0.5 * a);
            let p2 = p1 * (1.0 + 2.0 * c);
            let p3 = p2 + c / laml;
            let p4 = p3 + c / lamr;
            Method::Btpe(Btpe { r, q, nrq, m, xm, xl, xr, c, laml, lamr, p1, p2, p3, p4 })
        };
        Ok(Binomial { n, flip, method })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let y = match self.method {
            Method::Constant(v) => return v,
            Method::Inversion { qn, r, q, bound } => inversion(self.n, qn, r, q, bound, rng),
            Method::Btpe(ref b) => btpe(self.n, b, rng),
        };
        if self.flip {
            self.n - y
        } else {
            y
        }
    }
}

/// One `Binomial(trials, prob)` draw.
pub fn binomial_variate<R: Rng + ?Sized>(trials: u64, prob: f64, rng: &mut R) -> Result<u64> {
    Ok(Binomial::new(trials, prob)?.sample(rng))
}

fn inversion<R: Rng + ?Sized>(n: u64, qn: f64, r: f64, q: f64, bound: f64, rng: &mut R) -> u64 {
    let nf = n as f64;
    loop {
        let mut x = 0u64;
        let mut px = qn;
        let mut u: f64 = rng.gen();
        loop {
            if u <= px {
                return x;
            }
            x += 1;
            if x as f64 > bound {
                break;
            }
            u -= px;
            px *= (nf - x as f64 + 1.0) * r / (x as f64 * q);
        }
    }
}

// Stirling correction terms of the BTPE final test.
#[inline]
fn corr(a: f64) -> f64 {
    let a2 = a * a;
    (13860.0 - (462.0 - (132.0 - (99.0 - 140.0 / a2) / a2) / a2) / a2) / a / 166_320.0
}

fn btpe<R: Rng + ?Sized>(n: u64, b: &Btpe, rng: &mut R) -> u64 {
    let nf = n as f64;
    loop {
        let u = rng.gen::<f64>() * b.p4;
        let mut v: f64 = rng.gen();
        let y;
        if u <= b.p1 {
            // Triangular region: accept immediately.
            return (b.xm - b.p1 * v + u).floor() as u64;
        } else if u <= b.p2 {
            let x = b.xl + (u - b.p1) / b.c;
            v = v * b.c + 1.0 - (b.m - x + 0.5).abs() / b.p1;
            if v > 1.0 {
                continue;
            }
            y = x.floor();
        } else if u <= b.p3 {
            let x = (b.xl + v.ln() / b.laml).floor();
            if x < 0.0 {
                continue;
            }
            v *= (u - b.p2) * b.laml;
            y = x;
        } else {
            let x = (b.xr - v.ln() / b.lamr).floor();
            if x > nf {
                continue;
            }
            v *= (u - b.p3) * b.lamr;
            y = x;
        }

        let k = (y - b.m).abs();
        if k <= 20.0 || k >= 0.5 * b.nrq - 1.0 {
            // Explicit evaluation of f(y)/f(m).
            let s = b.r / b.q;
            let a = s * (nf + 1.0);
            let mut f = 1.0;
            if b.m < y {
                let mut i = b.m + 1.0;
                while i <= y {
                    f *= a / i - s;
                    i += 1.0;
                }
            } else if b.m > y {
                let mut i = y + 1.0;
                while i <= b.m {
                    f /= a / i - s;
                    i += 1.0;
                }
            }
            if v <= f {
                return y as u64;
            }
            continue;
        }

        // Squeeze on ln v using the normal approximation of ln f(y)/f(m).
        let rho = (k / b.nrq) * ((k * (k / 3.0 + 0.625) + 1.0 / 6.0) / b.nrq + 0.5);
        let t = -k * k / (2.0 * b.nrq);
        let big_a = v.ln();
        if big_a < t - rho {
            return y as u64;
        }
        if big_a > t + rho {
            continue;
        }
        let x1 = y + 1.0;
        let f1 = b.m + 1.0;
        let z = nf + 1.0 - b.m;
        let w = nf - y + 1.0;
        let bound = b.xm * (f1 / x1).ln()
            + (nf - b.m + 0.5) * (z / w).ln()
            + (y - b.m) * (w * b.r / (x1 * b.q)).ln()
            + corr(f1)
            + corr(z)
            + corr(x1)
            + corr(w);
        if big_a <= bound {
            return y as u64;
        }
    }
}
