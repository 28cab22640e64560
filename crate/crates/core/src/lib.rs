//! Exact and asymptotic analysis of many-server birth-death queues operating
//! in the QED (Halfin-Whitt) regime, where the arrival rate is coupled to the
//! number of servers through `lambda = s - gamma * sqrt(s)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`markov`] evaluates the finite-`s` system exactly: stationary
//!   distribution, delay/rejection probabilities, queue and idle counts,
//!   waiting time and revenue rates.
//! * [`expansion`] computes the QED limit and the first-order correction of
//!   any revenue functional, including the delay and queue-length
//!   specialisations and the economic objective.
//! * [`dimensioning`] solves exact and asymptotic dimensioning problems:
//!   revenue maximisation over the slack, delay-constrained staffing, joint
//!   slack/threshold optimisation and refined (series-corrected) staffing.
//! * [`gap_lab`] measures optimality gaps over a range of system sizes and
//!   fits decay laws to them.
//! * [`sim`] is an independent discrete-event simulator used to validate
//!   [`markov`].
//! * [`report`] holds the CSV/JSON output schemas.

pub mod dimensioning;
pub mod error;
pub mod expansion;
pub mod gap_lab;
pub mod markov;
pub mod report;
pub mod sim;

pub use error::{Error, Result};
pub use expansion::{mills_ratio, ExpansionCoefficients, PolicyTransform, RevenueProfile};
pub use markov::{
    erlang_b, performance_metrics, revenue_rate_hat, stationary_distribution, AdmissionPolicy,
    Economic, JoinSequence, PerformanceMetrics, RevenueStructure, ScaledProfile,
    StationaryDistribution, SystemConfig,
};
