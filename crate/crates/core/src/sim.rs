//! Discrete-event simulation of the birth-death system, used as an
//! independent check of the exact stationary analysis.
//!
//! The simulator shares nothing with [`crate::markov`] beyond the model
//! definition (arrival rate, join probabilities, unit service rate).

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{invalid, Error, Result};
use crate::markov::SystemConfig;

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub system: SystemConfig,
    /// Total number of events, warm-up included.
    pub horizon_events: u64,
    pub warmup_events: u64,
    pub batches: usize,
    pub seed: u64,
}

impl SimConfig {
    /// Defaults: 2e6 events, 1e5 warm-up events, 20 batches.
    pub fn new(system: SystemConfig, seed: u64) -> Self {
        Self { system, horizon_events: 2_000_000, warmup_events: 100_000, batches: 20, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.batches < 10 {
            return Err(invalid("at least 10 batches are required"));
        }
        if self.horizon_events <= self.warmup_events {
            return Err(invalid("horizon must exceed the warm-up"));
        }
        if (self.horizon_events - self.warmup_events) < 10 * self.batches as u64 {
            return Err(invalid("too few post-warm-up events for the requested batches"));
        }
        Ok(())
    }
}

/// Batch-means point estimate with the half-width of its 99% confidence interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricEstimate {
    pub mean: f64,
    pub halfwidth_99: f64,
}

impl MetricEstimate {
    pub fn covers(&self, value: f64) -> bool {
        (value - self.mean).abs() <= self.halfwidth_99
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub delay_prob: MetricEstimate,
    pub rejection_prob: MetricEstimate,
    pub mean_queue: MetricEstimate,
    pub mean_idle: MetricEstimate,
    pub expected_wait: MetricEstimate,
    pub simulated_time: f64,
}

#[derive(Default, Clone, Copy)]
struct Batch {
    time: f64,
    busy: f64,
    rejecting: f64,
    queue: f64,
    idle: f64,
    wait: f64,
    arrivals: u64,
}

fn estimate(values: &[f64], quantile: f64) -> MetricEstimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    MetricEstimate { mean, halfwidth_99: quantile * (var / n).sqrt() }
}

/// Simulates the chain event by event. Time averages give the delay,
/// rejection (via PASTA), queue and idle measures; waiting times of
/// individual customers, with rejected arrivals counted as zero, give `W`.
pub fn simulate(config: &SimConfig) -> Result<SimEstimate> {
    config.validate()?;
    let sys = &config.system;
    let s = usize::try_from(sys.s).map_err(|_| invalid("s too large"))?;
    let lambda = sys.lambda();
    if !(lambda > 0.0) {
        return Err(invalid("lambda must be positive"));
    }
    let seq = sys.policy.join_sequence(sys.s);
    seq.check_stable(sys.rho())?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let per_batch = (config.horizon_events - config.warmup_events) / config.batches as u64;
    let mut batches = vec![Batch::default(); config.batches];
    let mut waiting: VecDeque<f64> = VecDeque::new();
    let mut k = 0usize;
    let mut now = 0.0f64;
    let mut total_time = 0.0;
    let end = config.warmup_events + per_batch * config.batches as u64;

    for event in 0..end {
        let servers_busy = k.min(s);
        let rate = lambda + servers_busy as f64;
        let u: f64 = rng.random();
        let dt = -(1.0 - u).ln() / rate;
        let slot = (event >= config.warmup_events).then(|| ((event - config.warmup_events) / per_batch) as usize);
        if let Some(b) = slot {
            let bt = &mut batches[b];
            bt.time += dt;
            if k >= s {
                let p = seq.p(k - s);
                bt.busy += dt;
                bt.rejecting += dt * (1.0 - p);
                bt.queue += dt * (k - s) as f64;
            } else {
                bt.idle += dt * (s - k) as f64;
            }
            total_time += dt;
        }
        now += dt;

        let v: f64 = rng.random::<f64>() * rate;
        if v < lambda {
            if let Some(b) = slot {
                batches[b].arrivals += 1;
            }
            if k < s {
                k += 1;
            } else {
                let p = seq.p(k - s);
                if p >= 1.0 || rng.random::<f64>() < p {
                    waiting.push_back(now);
                    k += 1;
                }
            }
        } else {
            // departure; the head of the queue (if any) enters service
            if k > s {
                let arrived = waiting.pop_front().expect("queue length matches waiting list");
                if let Some(b) = slot {
                    batches[b].wait += now - arrived;
                }
            }
            k -= 1;
        }
        if k > s && waiting.len() != k - s {
            return Err(Error::Numerical("simulator lost track of the waiting line".into()));
        }
    }

    let q = StudentsT::new(0.0, 1.0, (config.batches - 1) as f64)
        .map_err(|e| Error::Numerical(format!("t distribution: {e}")))?
        .inverse_cdf(0.995);
    let per = |f: fn(&Batch) -> f64| -> Vec<f64> { batches.iter().map(f).collect() };
    Ok(SimEstimate {
        delay_prob: estimate(&per(|b| b.busy / b.time), q),
        rejection_prob: estimate(&per(|b| b.rejecting / b.time), q),
        mean_queue: estimate(&per(|b| b.queue / b.time), q),
        mean_idle: estimate(&per(|b| b.idle / b.time), q),
        expected_wait: estimate(&per(|b| if b.arrivals > 0 { b.wait / b.arrivals as f64 } else { 0.0 }), q),
        simulated_time: total_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{AdmissionPolicy, JoinSequence};

    fn short(system: SystemConfig, seed: u64) -> SimConfig {
        SimConfig { horizon_events: 200_000, warmup_events: 10_000, ..SimConfig::new(system, seed) }
    }

    #[test]
    fn reproducible_from_seed() {
        let sys = SystemConfig::new(3, 0.4, AdmissionPolicy::threshold(1.0).unwrap()).unwrap();
        let a = simulate(&short(sys.clone(), 7)).unwrap();
        let b = simulate(&short(sys.clone(), 7)).unwrap();
        let c = simulate(&short(sys, 8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_settings() {
        let sys = SystemConfig::new(3, 0.4, AdmissionPolicy::threshold(1.0).unwrap()).unwrap();
        let mut cfg = short(sys.clone(), 1);
        cfg.batches = 5;
        assert!(simulate(&cfg).unwrap_err().is_validation());
        let unstable = SystemConfig::with_lambda(2, 3.0, AdmissionPolicy::Exact(JoinSequence::always())).unwrap();
        assert!(matches!(simulate(&short(unstable, 1)), Err(Error::Unstable { .. })));
    }

    #[test]
    fn mm1_queue_length() {
        let sys = SystemConfig::with_lambda(1, 0.5, AdmissionPolicy::Exact(JoinSequence::always())).unwrap();
        let est = simulate(&SimConfig { horizon_events: 1_000_000, ..SimConfig::new(sys, 11) }).unwrap();
        assert!(est.mean_queue.covers(0.5), "{:?}", est.mean_queue);
        assert!(est.delay_prob.covers(0.5), "{:?}", est.delay_prob);
    }
}
