//! Exact evaluation of the finite birth-death system.
//!
//! States `k = 0, 1, ...` count customers present. Arrivals occur at rate
//! `lambda = s - gamma sqrt(s)`; when all `s` servers are busy an arrival that
//! finds `i` customers waiting joins with probability `p(i)`. Service is
//! exponential with unit rate per busy server.

mod policy;
mod revenue;

pub use policy::{threshold_level, AdmissionPolicy, JoinSequence, ScaledProfile};
pub use revenue::{Economic, RevenueStructure};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Truncation target for infinite-support policies, relative to the computed mass.
pub const TAIL_TOLERANCE: f64 = 1e-14;

const MAX_QUEUE_STATES: usize = 50_000_000;
const RESCALE_ABOVE: f64 = 1e250;

/// A concrete system: `s` servers, slack `gamma` and an admission policy.
#[derive(Clone, Debug)]
pub struct SystemConfig {
    pub s: u64,
    pub gamma: f64,
    pub policy: AdmissionPolicy,
}

impl SystemConfig {
    pub fn new(s: u64, gamma: f64, policy: AdmissionPolicy) -> Result<Self> {
        if s == 0 {
            return Err(invalid("number of servers s must be positive"));
        }
        if !gamma.is_finite() {
            return Err(invalid("gamma must be finite"));
        }
        let cfg = Self { s, gamma, policy };
        if !(cfg.lambda() > 0.0) {
            return Err(invalid("lambda must be positive (gamma < sqrt(s))"));
        }
        Ok(cfg)
    }

    /// Configuration with an explicit arrival rate instead of a slack.
    pub fn with_lambda(s: u64, lambda: f64, policy: AdmissionPolicy) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda must be positive"));
        }
        let root = (s as f64).sqrt();
        Self::new(s, (s as f64 - lambda) / root, policy)
    }

    pub fn lambda(&self) -> f64 {
        let s = self.s as f64;
        s - self.gamma * s.sqrt()
    }

    pub fn rho(&self) -> f64 {
        self.lambda() / self.s as f64
    }
}

/// Stationary probabilities `pi(k)` for `k = 0..=k_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub servers: u64,
    pub lambda: f64,
    pub probs: Vec<f64>,
    /// Join probabilities `p(k - s)` for `k = s..=k_max`.
    pub join: Vec<f64>,
    /// Certified upper bound on the mass beyond `k_max` (zero for finite support).
    pub tail_mass_bound: f64,
}

impl StationaryDistribution {
    pub fn k_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// `p(k - s)` for a state `k >= s` inside the support.
    pub fn join_prob(&self, k: usize) -> f64 {
        self.join[k - self.servers as usize]
    }
}

/// Solves the balance equations of the birth-death chain.
///
/// Weights are built by ratio recursions anchored at the mode of the
/// `k <= s` segment, so no factorial or power is ever formed and every
/// intermediate stays in range for very large `s`.
pub fn stationary_distribution(config: &SystemConfig) -> Result<StationaryDistribution> {
    let s = usize::try_from(config.s).map_err(|_| invalid("s too large"))?;
    let lambda = config.lambda();
    if !(lambda > 0.0) {
        return Err(invalid("lambda must be positive"));
    }
    let rho = lambda / s as f64;
    let seq = config.policy.join_sequence(config.s);
    seq.check_stable(rho)?;

    let mut w = vec![0.0; s + 1];
    let mode = (lambda.floor() as usize).min(s);
    w[mode] = 1.0;
    for k in mode + 1..=s {
        w[k] = w[k - 1] * lambda / k as f64;
    }
    for k in (1..=mode).rev() {
        w[k - 1] = w[k] * k as f64 / lambda;
    }

    let mut at_s = w[s];
    let mut mass = neumaier(w.iter().copied());
    let mut join = Vec::new();
    let mut tail = 0.0;
    let mut last = at_s;
    // sum of m w(s + m): the scale of the queue-length measures
    let mut moment = 0.0;
    let mut n = 0usize;
    loop {
        let p = seq.p(n);
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("{} returned p({n}) = {p}, outside [0, 1]", seq.describe())));
        }
        join.push(p);
        if p == 0.0 {
            break;
        }
        last *= rho * p;
        w.push(last);
        mass += last;
        moment += (n + 1) as f64 * last;
        if last > RESCALE_ABOVE {
            w.iter_mut().for_each(|x| *x /= RESCALE_ABOVE);
            mass /= RESCALE_ABOVE;
            moment /= RESCALE_ABOVE;
            at_s /= RESCALE_ABOVE;
            last /= RESCALE_ABOVE;
        }
        if let Some(bound) = seq.tail_bound(n, last, at_s, rho) {
            // small against the total mass and against the delay/queue scale
            if bound <= TAIL_TOLERANCE * mass.min(at_s + moment) {
                tail = bound;
                join.push(seq.p(n + 1));
                break;
            }
        }
        n += 1;
        if n > MAX_QUEUE_STATES {
            return Err(Error::Unstable { policy: seq.describe(), rho });
        }
    }

    let total = neumaier(w.iter().copied());
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Numerical(format!("stationary weights summed to {total}")));
    }
    let probs = w.into_iter().map(|x| x / total).collect();
    Ok(StationaryDistribution {
        servers: config.s,
        lambda,
        probs,
        join,
        tail_mass_bound: tail / total,
    })
}

/// Erlang B blocking probability `B_s(rho)` with offered load `A = s rho`,
/// via `B(k) = A B(k-1) / (k + A B(k-1))`.
pub fn erlang_b(s: u64, rho: f64) -> Result<f64> {
    if s == 0 {
        return Err(invalid("erlang_b requires s >= 1"));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid("erlang_b requires rho > 0"));
    }
    let load = s as f64 * rho;
    let mut b = 1.0;
    for k in 1..=s {
        b = load * b / (k as f64 + load * b);
    }
    Ok(b)
}

/// Stationary performance measures of a finite system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerformanceMetrics {
    /// Probability that all servers are busy.
    pub delay_prob: f64,
    /// Probability that an arrival is rejected.
    pub rejection_prob: f64,
    /// Mean number of waiting customers.
    pub mean_queue: f64,
    /// Mean number of idle servers.
    pub mean_idle: f64,
    /// Mean waiting time of an arbitrary arrival (rejected arrivals wait zero).
    pub expected_wait: f64,
    /// Long-run revenue rate.
    pub revenue_rate: f64,
}

pub fn performance_metrics(config: &SystemConfig, revenue: &RevenueStructure) -> Result<PerformanceMetrics> {
    let dist = stationary_distribution(config)?;
    metrics_from_distribution(config, &dist, revenue)
}

pub fn metrics_from_distribution(
    config: &SystemConfig,
    dist: &StationaryDistribution,
    revenue: &RevenueStructure,
) -> Result<PerformanceMetrics> {
    let s = config.s as usize;
    let sf = s as f64;
    let rates = revenue.rates(config.s, config.gamma)?;
    let pi = &dist.probs;

    let busy = &pi[s..];
    let delay_prob = neumaier(busy.iter().copied());
    let rejection_prob =
        neumaier(busy.iter().zip(&dist.join).map(|(p, j)| (1.0 - j) * p));
    let mean_queue = neumaier(busy.iter().enumerate().map(|(i, p)| i as f64 * p));
    let mean_idle = neumaier(pi[..s].iter().enumerate().map(|(k, p)| (s - k) as f64 * p));
    let expected_wait = neumaier(
        busy.iter()
            .zip(&dist.join)
            .enumerate()
            .map(|(i, (p, j))| (i as f64 + 1.0) / sf * j * p),
    );
    let revenue_rate = neumaier(pi.iter().enumerate().map(|(k, p)| rates(k as u64) * p));
    if !revenue_rate.is_finite() {
        return Err(Error::Numerical("revenue rate is not finite".into()));
    }
    Ok(PerformanceMetrics { delay_prob, rejection_prob, mean_queue, mean_idle, expected_wait, revenue_rate })
}

/// Centered and scaled economic objective `(R_s - a s) / sqrt(s)`, i.e.
/// `d gamma - (a + d) I_s / sqrt(s) - b Q_s / sqrt(s)`.
pub fn revenue_rate_hat(config: &SystemConfig, econ: &Economic) -> Result<f64> {
    let m = performance_metrics(config, &RevenueStructure::Economic(*econ))?;
    Ok(rhat_from_metrics(config, econ, &m))
}

pub(crate) fn rhat_from_metrics(config: &SystemConfig, econ: &Economic, m: &PerformanceMetrics) -> f64 {
    let root = (config.s as f64).sqrt();
    econ.d * config.gamma - (econ.a + econ.d) * m.mean_idle / root - econ.b * m.mean_queue / root
}

/// Compensated summation.
pub(crate) fn neumaier(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    fn always() -> AdmissionPolicy {
        AdmissionPolicy::Exact(JoinSequence::always())
    }

    fn loss() -> AdmissionPolicy {
        AdmissionPolicy::Exact(JoinSequence::never())
    }

    #[test]
    fn mm1_is_geometric() {
        let cfg = SystemConfig::new(1, 0.5, always()).unwrap();
        let d = stationary_distribution(&cfg).unwrap();
        for (k, p) in d.probs.iter().enumerate().take(40) {
            let exact = 0.5f64.powi(k as i32 + 1);
            assert!((p - exact).abs() <= 1e-14 * exact.max(1e-300) + 1e-16, "k = {k}");
        }
        assert!(d.tail_mass_bound <= 1e-12);
        let m = performance_metrics(&cfg, &RevenueStructure::exact(|_| 0.0)).unwrap();
        assert!((m.delay_prob - 0.5).abs() < 1e-13);
        assert!((m.mean_queue - 0.5).abs() < 1e-13);
    }

    #[test]
    fn pure_loss_two_states() {
        let cfg = SystemConfig::with_lambda(1, 1.0, loss()).unwrap();
        let d = stationary_distribution(&cfg).unwrap();
        assert_eq!(d.probs.len(), 2);
        assert!((d.probs[0] - 0.5).abs() < 1e-15);
        assert!((d.probs[1] - 0.5).abs() < 1e-15);
        assert_eq!(d.tail_mass_bound, 0.0);
    }

    #[test]
    fn loss_rejection_is_erlang_b() {
        let cfg = SystemConfig::with_lambda(5, 4.5, loss()).unwrap();
        let m = performance_metrics(&cfg, &RevenueStructure::exact(|_| 0.0)).unwrap();
        let b = erlang_b(5, 0.9).unwrap();
        assert!((m.rejection_prob - b).abs() < 1e-14);
    }

    #[test]
    fn erlang_b_small_cases() {
        assert!((erlang_b(1, 1.0).unwrap() - 0.5).abs() < 1e-16);
        assert!((erlang_b(2, 0.5).unwrap() - 0.2).abs() < 1e-16);
        assert!(erlang_b(0, 1.0).is_err());
        assert!(erlang_b(3, 0.0).is_err());
    }

    #[test]
    fn threshold_support_is_finite() {
        let cfg = SystemConfig::new(10, 2.0, AdmissionPolicy::threshold(2.0).unwrap()).unwrap();
        let d = stationary_distribution(&cfg).unwrap();
        assert_eq!(d.k_max(), 16);
        assert_eq!(d.tail_mass_bound, 0.0);
        assert_eq!(d.join_prob(16), 0.0);
    }

    #[test]
    fn rejects_nonpositive_lambda() {
        let err = SystemConfig::new(10, 4.0, always()).unwrap_err();
        assert!(err.to_string().contains("lambda must be positive"));
    }

    #[test]
    fn unstable_queue_is_diagnosed() {
        let cfg = SystemConfig::new(10, -0.5, always()).unwrap();
        match stationary_distribution(&cfg) {
            Err(Error::Unstable { policy, .. }) => assert!(policy.contains("M/M/s")),
            other => panic!("expected instability, got {other:?}"),
        }
        let cfg = SystemConfig::new(10, 0.0, always()).unwrap();
        assert!(matches!(stationary_distribution(&cfg), Err(Error::Unstable { .. })));
    }

    #[test]
    fn overloaded_abandonment_is_stable() {
        let seq = JoinSequence::abandonment(1.0, 20).unwrap();
        let cfg = SystemConfig::new(20, -1.5, AdmissionPolicy::Exact(seq)).unwrap();
        let d = stationary_distribution(&cfg).unwrap();
        let total: f64 = d.probs.iter().sum();
        assert!((total + d.tail_mass_bound - 1.0).abs() < 1e-12);
    }

    #[test]
    fn huge_system_stays_finite() {
        let cfg = SystemConfig::new(1_000_000, 1.0, AdmissionPolicy::threshold(1.0).unwrap()).unwrap();
        let d = stationary_distribution(&cfg).unwrap();
        assert!(d.probs.iter().all(|p| p.is_finite() && *p >= 0.0));
        let total = neumaier(d.probs.iter().copied());
        assert!((total - 1.0).abs() < 1e-12);
        // far from the mode, even for large slack
        let cfg = SystemConfig::new(1_000_000, 900.0, AdmissionPolicy::threshold(1.0).unwrap()).unwrap();
        let d = stationary_distribution(&cfg).unwrap();
        assert!(d.probs.iter().all(|p| p.is_finite()));
    }

    #[test]
    fn rhat_identity() {
        let econ = Economic::new(0.3, 1.2, 0.4).unwrap();
        let cfg = SystemConfig::new(30, 0.7, AdmissionPolicy::threshold(1.5).unwrap()).unwrap();
        let m = performance_metrics(&cfg, &RevenueStructure::Economic(econ)).unwrap();
        let via_rates = (m.revenue_rate - econ.a * 30.0) / 30f64.sqrt();
        let via_counts = revenue_rate_hat(&cfg, &econ).unwrap();
        assert!((via_rates - via_counts).abs() < 1e-10);
    }
}
