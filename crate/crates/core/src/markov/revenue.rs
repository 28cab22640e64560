use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::expansion::RevenueProfile;

type RateFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;
type SizeFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// Fee `a` per served customer, waiting cost `b` per customer per unit time
/// and penalty `d` per rejected customer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Economic {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

impl Economic {
    pub fn new(a: f64, b: f64, d: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(invalid("fee a must be positive"));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(invalid("waiting cost b must be positive"));
        }
        if !(d.is_finite() && d >= 0.0) {
            return Err(invalid("rejection penalty d must be nonnegative"));
        }
        Ok(Self { a, b, d })
    }

    /// Economics with `a / (a + d) = r1` and `(a + d) / b = r2`, normalised to `a + d = 1`.
    pub fn from_ratios(r1: f64, r2: f64) -> Result<Self> {
        if !(r1 > 0.0 && r1 <= 1.0) {
            return Err(invalid("ratio a/(a+d) must lie in (0, 1]"));
        }
        if !(r2.is_finite() && r2 > 0.0) {
            return Err(invalid("ratio (a+d)/b must be positive"));
        }
        Self::new(r1, 1.0 / r2, 1.0 - r1)
    }

    /// Revenue rate with `k` customers present at size `s` and slack `gamma`.
    pub fn rate(&self, s: u64, gamma: f64, k: u64) -> f64 {
        let sf = s as f64;
        let base = self.d * gamma * sf.sqrt();
        if k < s {
            self.a * k as f64 + base - self.d * (s - k) as f64
        } else {
            self.a * sf + base - self.b * (k - s) as f64
        }
    }

    /// Limiting profile `r(x)` of `(r_s(k) - a s) / sqrt(s)` at slack `gamma`.
    pub fn profile(&self, gamma: f64) -> RevenueProfile {
        let level = self.d * gamma;
        RevenueProfile::Piecewise {
            left: [level, self.a + self.d, 0.0, 0.0],
            right: [level, -self.b, 0.0, 0.0],
        }
    }
}

/// How revenue accrues as a function of the number of customers present.
#[derive(Clone)]
pub enum RevenueStructure {
    /// Arbitrary rates `r(k)`.
    ExactRates(RateFn),
    /// `r_s(k) = n_s + q_s r((k - s) / sqrt(s))` with centering `n_s` and scale `q_s > 0`.
    Scaled { centering: SizeFn, scale: SizeFn, profile: RevenueProfile },
    Economic(Economic),
}

impl RevenueStructure {
    pub fn exact<F>(r: F) -> Self
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        RevenueStructure::ExactRates(Arc::new(r))
    }

    pub fn scaled<N, Q>(centering: N, scale: Q, profile: RevenueProfile) -> Self
    where
        N: Fn(u64) -> f64 + Send + Sync + 'static,
        Q: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        RevenueStructure::Scaled { centering: Arc::new(centering), scale: Arc::new(scale), profile }
    }

    /// Rate function `k -> r_s(k)` for a system of size `s` at slack `gamma`.
    pub(crate) fn rates(&self, s: u64, gamma: f64) -> Result<Box<dyn Fn(u64) -> f64 + '_>> {
        Ok(match self {
            RevenueStructure::ExactRates(r) => Box::new(move |k| r(k)),
            RevenueStructure::Scaled { centering, scale, profile } => {
                let (n, q) = (centering(s), scale(s));
                if !(q > 0.0) {
                    return Err(invalid(format!("revenue scale q_s must be positive (got {q} at s = {s})")));
                }
                let root = (s as f64).sqrt();
                Box::new(move |k| n + q * profile.eval((k as f64 - s as f64) / root))
            }
            RevenueStructure::Economic(e) => {
                let e = *e;
                Box::new(move |k| e.rate(s, gamma, k))
            }
        })
    }
}

impl fmt::Debug for RevenueStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RevenueStructure::ExactRates(_) => f.write_str("ExactRates(..)"),
            RevenueStructure::Scaled { profile, .. } => write!(f, "Scaled({profile:?})"),
            RevenueStructure::Economic(e) => write!(f, "Economic({e:?})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_reconstruct_economics() {
        let e = Economic::from_ratios(0.3, 2.0).unwrap();
        assert!((e.a / (e.a + e.d) - 0.3).abs() < 1e-15);
        assert!(((e.a + e.d) / e.b - 2.0).abs() < 1e-15);
    }

    #[test]
    fn economic_rates_scale_to_profile() {
        let e = Economic::new(0.4, 1.3, 0.7).unwrap();
        let (s, gamma) = (49u64, 0.8);
        let prof = e.profile(gamma);
        for k in [0u64, 10, 48, 49, 50, 70] {
            let scaled = (e.rate(s, gamma, k) - e.a * s as f64) / 7.0;
            let x = (k as f64 - 49.0) / 7.0;
            assert!((scaled - prof.eval(x)).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn rejects_bad_economics() {
        assert!(Economic::new(0.0, 1.0, 0.0).is_err());
        assert!(Economic::new(1.0, -1.0, 0.0).is_err());
        assert!(Economic::new(1.0, 1.0, -0.1).is_err());
    }
}
