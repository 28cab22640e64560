use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};

type JoinFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;
type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Join probabilities `p(i)` of a finite system, indexed by the number `i`
/// of customers already waiting when an arrival finds all servers busy.
#[derive(Clone)]
pub struct JoinSequence {
    kind: JoinKind,
}

#[derive(Clone)]
enum JoinKind {
    Constant(f64),
    /// Join iff fewer than `K` customers are waiting.
    Threshold(usize),
    /// `p(i) = 1 / (1 + (i + 1) theta / s)`, the M/M/s+M abandonment model.
    Abandonment { theta: f64, servers: f64 },
    Custom { p: JoinFn, nonincreasing: bool, label: String },
    /// Exact sequence induced by a scaled profile at a given system size.
    Profile { profile: ScaledProfile, sqrt_s: f64 },
}

impl JoinSequence {
    /// `p = 1`: the M/M/s queue.
    pub fn always() -> Self {
        Self { kind: JoinKind::Constant(1.0) }
    }

    /// `p = 0`: the M/M/s/s loss system.
    pub fn never() -> Self {
        Self { kind: JoinKind::Constant(0.0) }
    }

    pub fn constant(p: f64) -> Result<Self> {
        check_probability(p)?;
        Ok(Self { kind: JoinKind::Constant(p) })
    }

    /// Arrivals join iff fewer than `max_waiting` customers are waiting, so
    /// at most `max_waiting` customers ever wait.
    pub fn threshold(max_waiting: usize) -> Self {
        Self { kind: JoinKind::Threshold(max_waiting) }
    }

    /// M/M/s+M with abandonment rate `theta` per waiting customer.
    pub fn abandonment(theta: f64, servers: u64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(invalid("abandonment rate theta must be positive"));
        }
        Ok(Self { kind: JoinKind::Abandonment { theta, servers: servers as f64 } })
    }

    /// Arbitrary join probabilities. Declaring the sequence nonincreasing lets
    /// the stationary solver certify truncation even when the load exceeds one.
    pub fn from_fn<F>(label: impl Into<String>, nonincreasing: bool, p: F) -> Self
    where
        F: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        Self { kind: JoinKind::Custom { p: Arc::new(p), nonincreasing, label: label.into() } }
    }

    /// Join probability when `waiting` customers are already queued.
    pub fn p(&self, waiting: usize) -> f64 {
        match &self.kind {
            JoinKind::Constant(p) => *p,
            JoinKind::Threshold(k) => {
                if waiting < *k {
                    1.0
                } else {
                    0.0
                }
            }
            JoinKind::Abandonment { theta, servers } => {
                1.0 / (1.0 + (waiting as f64 + 1.0) * theta / servers)
            }
            JoinKind::Custom { p, .. } => p(waiting),
            JoinKind::Profile { profile, sqrt_s } => {
                let hi = profile.eval((waiting as f64 + 1.0) / sqrt_s);
                if waiting == 0 {
                    return hi;
                }
                let lo = profile.eval(waiting as f64 / sqrt_s);
                if lo <= 0.0 {
                    0.0
                } else {
                    (hi / lo).min(1.0)
                }
            }
        }
    }

    /// Product `p(0) p(1) ... p(n)`.
    pub fn prefix_product(&self, n: usize) -> f64 {
        match &self.kind {
            JoinKind::Profile { profile, sqrt_s } => profile.eval((n as f64 + 1.0) / sqrt_s),
            _ => (0..=n).map(|i| self.p(i)).product(),
        }
    }

    /// Returns an error when the sequence can be shown, without iterating,
    /// to produce an infinite queue at relative load `rho`.
    pub(crate) fn check_stable(&self, rho: f64) -> Result<()> {
        let unstable = match &self.kind {
            JoinKind::Constant(p) => *p > 0.0 && rho * p >= 1.0,
            JoinKind::Profile { profile, sqrt_s } => {
                rho >= 1.0 && rho * (-profile.envelope_rate / sqrt_s).exp() >= 1.0
            }
            _ => false,
        };
        if unstable {
            return Err(crate::Error::Unstable { policy: self.describe(), rho });
        }
        Ok(())
    }

    /// Certified upper bound on `sum_{m > n+1} (1 + m) w(s + m)` (tail mass
    /// plus tail queue-length moment), in the same unnormalised units as
    /// `last = w(s + n + 1)` and `at_s = w(s)`. `None` means no certificate
    /// is available yet.
    pub(crate) fn tail_bound(&self, n: usize, last: f64, at_s: f64, rho: f64) -> Option<f64> {
        let a = n as f64 + 2.0;
        let geometric = |q: f64| (q < 1.0).then(|| last * (a * q / (1.0 - q) + q / ((1.0 - q) * (1.0 - q))));
        let mut best = if rho < 1.0 { geometric(rho) } else { None };
        let mut consider = |b: Option<f64>| {
            if let Some(b) = b {
                best = Some(best.map_or(b, |x: f64| x.min(b)));
            }
        };
        match &self.kind {
            JoinKind::Constant(p) => consider(geometric(rho * p)),
            JoinKind::Threshold(_) => {}
            JoinKind::Abandonment { .. } | JoinKind::Custom { nonincreasing: true, .. } => {
                consider(geometric(rho * self.p(n + 1)))
            }
            JoinKind::Custom { .. } => {}
            JoinKind::Profile { profile, sqrt_s } => {
                let q = rho * (-profile.envelope_rate / sqrt_s).exp();
                if q < 1.0 {
                    let c = profile.envelope_scale;
                    let weight = (a + 1.0) / (1.0 - q) + q / ((1.0 - q) * (1.0 - q));
                    consider(Some(at_s * c * q.powi(n as i32 + 2) * weight));
                }
            }
        }
        best
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            JoinKind::Constant(p) if *p == 1.0 => "always-join policy (M/M/s)".into(),
            JoinKind::Constant(p) if *p == 0.0 => "loss policy (M/M/s/s)".into(),
            JoinKind::Constant(p) => format!("constant join probability {p}"),
            JoinKind::Threshold(k) => format!("threshold policy (at most {k} waiting)"),
            JoinKind::Abandonment { theta, .. } => format!("abandonment policy (theta = {theta})"),
            JoinKind::Custom { label, .. } => format!("join sequence '{label}'"),
            JoinKind::Profile { profile, .. } => format!("scaled profile '{}'", profile.label),
        }
    }
}

impl fmt::Debug for JoinSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// A scaled admission profile `f(x)`: the limit of `p(0)...p(n)` at
/// `x = (n + 1) / sqrt(s)`. Must be nonincreasing with values in `[0, 1]`.
///
/// The profile carries an exponential envelope `f(x) <= scale * exp(-rate x)`
/// which certifies truncation of the right-hand integrals and of the finite
/// system's queue. Integrals are finite for `gamma > -rate`.
#[derive(Clone)]
pub struct ScaledProfile {
    f: ProfileFn,
    envelope_scale: f64,
    envelope_rate: f64,
    label: String,
}

impl ScaledProfile {
    /// Validates monotonicity, range and the envelope on a grid over `[0, 50]`.
    pub fn new<F>(label: impl Into<String>, f: F, envelope_scale: f64, envelope_rate: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let label = label.into();
        if !(envelope_scale.is_finite() && envelope_scale > 0.0) {
            return Err(invalid("profile envelope scale must be positive"));
        }
        if !(envelope_rate.is_finite() && envelope_rate >= 0.0) {
            return Err(invalid("profile envelope rate must be nonnegative"));
        }
        let mut prev = f64::INFINITY;
        for i in 0..=5000 {
            let x = i as f64 * 0.01;
            let v = f(x);
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(format!("profile '{label}' leaves [0, 1] at x = {x}: {v}")));
            }
            if v > prev + 1e-14 {
                return Err(invalid(format!("profile '{label}' increases near x = {x}")));
            }
            if v > envelope_scale * (-envelope_rate * x).exp() * (1.0 + 1e-12) {
                return Err(invalid(format!("profile '{label}' exceeds its envelope at x = {x}")));
            }
            prev = v;
        }
        Ok(Self { f: Arc::new(f), envelope_scale, envelope_rate, label })
    }

    /// `f(x) = exp(-rate x)`.
    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(format!("exp(-{rate} x)"), move |x| (-rate * x).exp(), 1.0, rate)
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    /// Certified lower end of the slack domain on which `int f(x) e^{-gamma x}` is finite.
    pub fn gamma_min(&self) -> f64 {
        -self.envelope_rate
    }

    pub fn envelope(&self) -> (f64, f64) {
        (self.envelope_scale, self.envelope_rate)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for ScaledProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScaledProfile({})", self.label)
    }
}

/// Admission control, either exact at a fixed size or as a scaled profile
/// that induces an exact sequence for every `s`.
#[derive(Clone, Debug)]
pub enum AdmissionPolicy {
    Exact(JoinSequence),
    /// `f(x) = 1{x <= eta}`; `eta = +inf` means every arrival joins.
    Threshold { eta: f64 },
    Profile(ScaledProfile),
}

impl AdmissionPolicy {
    pub fn threshold(eta: f64) -> Result<Self> {
        if eta.is_nan() || eta < 0.0 {
            return Err(invalid("threshold eta must be nonnegative"));
        }
        Ok(AdmissionPolicy::Threshold { eta })
    }

    /// The exact join sequence used at system size `s`.
    pub fn join_sequence(&self, s: u64) -> JoinSequence {
        match self {
            AdmissionPolicy::Exact(seq) => seq.clone(),
            AdmissionPolicy::Threshold { eta } if eta.is_infinite() => JoinSequence::always(),
            AdmissionPolicy::Threshold { eta } => JoinSequence::threshold(threshold_level(*eta, s)),
            AdmissionPolicy::Profile(profile) => JoinSequence {
                kind: JoinKind::Profile { profile: profile.clone(), sqrt_s: (s as f64).sqrt() },
            },
        }
    }

    pub fn is_scaled(&self) -> bool {
        !matches!(self, AdmissionPolicy::Exact(_))
    }

    pub fn describe(&self) -> String {
        match self {
            AdmissionPolicy::Exact(seq) => seq.describe(),
            AdmissionPolicy::Threshold { eta } => format!("scaled threshold eta = {eta}"),
            AdmissionPolicy::Profile(p) => format!("scaled profile '{}'", p.label),
        }
    }
}

/// Maximum queue length `floor(eta sqrt(s))` of the threshold policy at size `s`.
pub fn threshold_level(eta: f64, s: u64) -> usize {
    let x = eta * (s as f64).sqrt();
    // absorb representation error when eta * sqrt(s) is an integer
    (x * (1.0 + 4.0 * f64::EPSILON)).floor() as usize
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("join probability {p} outside [0, 1]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_level_floors() {
        assert_eq!(threshold_level(2.0, 10), 6);
        assert_eq!(threshold_level(2.0, 25), 10);
        assert_eq!(threshold_level(0.0, 100), 0);
        assert_eq!(threshold_level(0.7, 100), 7);
    }

    #[test]
    fn threshold_sequence_caps_queue() {
        let seq = AdmissionPolicy::threshold(2.0).unwrap().join_sequence(10);
        assert_eq!(seq.p(5), 1.0);
        assert_eq!(seq.p(6), 0.0);
    }

    #[test]
    fn profile_sequence_reproduces_products() {
        let prof = ScaledProfile::exponential(1.5).unwrap();
        let seq = AdmissionPolicy::Profile(prof.clone()).join_sequence(16);
        let direct: f64 = (0..=7).map(|i| seq.p(i)).product();
        assert!((direct - prof.eval(8.0 / 4.0)).abs() < 1e-14);
        assert!((seq.prefix_product(7) - direct).abs() < 1e-14);
    }

    #[test]
    fn rejects_increasing_profile() {
        assert!(ScaledProfile::new("bad", |x| (x / 60.0).min(1.0), 1.0, 0.0).is_err());
        assert!(ScaledProfile::new("big", |_| 1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn abandonment_probabilities() {
        let seq = JoinSequence::abandonment(2.0, 10).unwrap();
        assert!((seq.p(0) - 1.0 / 1.2).abs() < 1e-15);
        assert!((seq.p(4) - 1.0 / 2.0).abs() < 1e-15);
        assert!(JoinSequence::constant(1.5).is_err());
    }
}
