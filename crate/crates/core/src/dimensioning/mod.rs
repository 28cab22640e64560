//! Exact and asymptotic dimensioning: revenue maximisation over the slack,
//! delay-constrained staffing, joint slack/threshold optimisation and the
//! refined staffing series.

mod refined;
pub mod search;

pub use refined::{refined_gamma, RefinedGamma};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::expansion::{delay_coeffs, expansion_coeffs, rhat0};
use crate::markov::{
    performance_metrics, revenue_rate_hat, AdmissionPolicy, Economic, RevenueStructure, SystemConfig,
};
use search::{find_root, golden_section, maximize_scalar};

/// Bracket width at which scalar searches stop.
pub const SEARCH_TOL: f64 = 1e-8;
/// Residual at which delay roots stop.
pub const ROOT_TOL: f64 = 1e-10;

/// Compact slack interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaInterval {
    pub lo: f64,
    pub hi: f64,
}

impl GammaInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid(format!("interval [{lo}, {hi}] must be finite with lo < hi")));
        }
        Ok(Self { lo, hi })
    }

    fn check_finite_s(&self, s: u64) -> Result<()> {
        let root = (s as f64).sqrt();
        if self.hi >= root {
            return Err(invalid(format!(
                "interval upper end {} must stay below sqrt(s) = {root} (lambda must be positive)",
                self.hi
            )));
        }
        Ok(())
    }
}

impl Default for GammaInterval {
    fn default() -> Self {
        Self { lo: -2.0, hi: 3.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimResult {
    pub gamma_star: f64,
    pub value: f64,
    /// Expansion order `j`, or -1 for the exact finite-`s` objective.
    pub order: i32,
    pub iterations: usize,
    pub bracket_width: f64,
    /// The maximiser sits at an end of the interval.
    pub at_boundary: bool,
}

/// Maximises an arbitrary objective over the interval.
pub fn maximize<F>(objective: F, interval: &GammaInterval, order: i32) -> Result<OptimResult>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = maximize_scalar(objective, interval.lo, interval.hi, SEARCH_TOL)?;
    if m.at_boundary {
        log::warn!("optimum of order {order} objective at interval boundary gamma = {}", m.x);
    }
    Ok(OptimResult {
        gamma_star: m.x,
        value: m.value,
        order,
        iterations: m.iterations,
        bracket_width: m.bracket_width,
        at_boundary: m.at_boundary,
    })
}

/// `gamma*_s = argmax R^_s(gamma)` for the exact system of size `s`.
pub fn maximize_exact(s: u64, econ: &Economic, policy: &AdmissionPolicy, interval: &GammaInterval) -> Result<OptimResult> {
    interval.check_finite_s(s)?;
    maximize(
        |g| revenue_rate_hat(&SystemConfig::new(s, g, policy.clone())?, econ),
        interval,
        -1,
    )
}

/// `R^0(gamma)` (order 0) or `R^0 + R^1/sqrt(s)` (order 1).
pub fn asymptotic_objective(order: u8, s: Option<u64>, econ: &Economic, policy: &AdmissionPolicy, gamma: f64) -> Result<f64> {
    let c = expansion_coeffs(&econ.profile(gamma), policy, gamma)?;
    match (order, s) {
        (0, _) => Ok(c.r0),
        (1, Some(s)) if s > 0 => Ok(c.approx(s as f64)),
        (1, _) => Err(invalid("order 1 needs the system size s")),
        _ => Err(invalid(format!("expansion order must be 0 or 1 (got {order})"))),
    }
}

/// `gamma_{j,s} = argmax` of the order-`j` asymptotic objective.
pub fn maximize_asymptotic(
    order: u8,
    s: Option<u64>,
    econ: &Economic,
    policy: &AdmissionPolicy,
    interval: &GammaInterval,
) -> Result<OptimResult> {
    if order > 1 {
        return Err(invalid(format!("expansion order must be 0 or 1 (got {order})")));
    }
    if order == 1 && s.is_none() {
        return Err(invalid("order 1 needs the system size s"));
    }
    maximize(|g| asymptotic_objective(order, s, econ, policy, g), interval, order as i32)
}

/// Which delay probability the staffing rule targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DelayObjective {
    Exact { s: u64 },
    Order0,
    Order1 { s: u64 },
}

impl DelayObjective {
    pub fn eval(&self, policy: &AdmissionPolicy, gamma: f64) -> Result<f64> {
        match *self {
            DelayObjective::Exact { s } => {
                let cfg = SystemConfig::new(s, gamma, policy.clone())?;
                Ok(performance_metrics(&cfg, &RevenueStructure::exact(|_| 0.0))?.delay_prob)
            }
            DelayObjective::Order0 => Ok(delay_coeffs(gamma, policy)?.0),
            DelayObjective::Order1 { s } => {
                let (d0, d1) = delay_coeffs(gamma, policy)?;
                Ok(d0 + d1 / (s as f64).sqrt())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StaffingResult {
    pub gamma: f64,
    /// `D(gamma) - epsilon` at the returned point.
    pub residual: f64,
    pub iterations: usize,
}

/// Solves `D(gamma) = epsilon` on the interval.
///
/// A 64-point scan must show exactly one crossing of `epsilon`, with the
/// objective decreasing across it; the root is then polished inside that
/// cell. Truncated expansions may turn non-monotone far into the tail
/// (where they fall below zero), which does not affect the crossing.
pub fn delay_staffing(
    epsilon: f64,
    objective: DelayObjective,
    policy: &AdmissionPolicy,
    interval: &GammaInterval,
) -> Result<StaffingResult> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("delay target epsilon must lie in (0, 1) (got {epsilon})")));
    }
    if let DelayObjective::Exact { s } | DelayObjective::Order1 { s } = objective {
        if s == 0 {
            return Err(invalid("s must be positive"));
        }
    }
    if let DelayObjective::Exact { s } = objective {
        interval.check_finite_s(s)?;
    }
    let d = |g: f64| objective.eval(policy, g);
    let n = search::SCAN_POINTS;
    let step = (interval.hi - interval.lo) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| interval.lo + i as f64 * step).collect();
    let values = grid.iter().map(|&g| d(g)).collect::<Result<Vec<_>>>()?;
    let crossings: Vec<usize> = (0..n - 1)
        .filter(|&i| (values[i] - epsilon) * (values[i + 1] - epsilon) <= 0.0 && values[i] != values[i + 1])
        .collect();
    let cell = match crossings.as_slice() {
        [] => {
            return Err(Error::NoSignChange {
                lo: interval.lo,
                hi: interval.hi,
                f_lo: values[0] - epsilon,
                f_hi: values[n - 1] - epsilon,
            })
        }
        [i] if values[*i] > values[*i + 1] => *i,
        [i] => {
            return Err(Error::Numerical(format!(
                "delay objective increases through epsilon near gamma = {}",
                grid[*i]
            )))
        }
        many => {
            return Err(Error::Numerical(format!(
                "delay objective crosses epsilon {} times on [{}, {}]; narrow the interval",
                many.len(),
                interval.lo,
                interval.hi
            )))
        }
    };
    let (lo, hi) = (grid[cell], if cell + 1 == n - 1 { interval.hi } else { grid[cell + 1] });
    let root = find_root(|g| Ok(d(g)? - epsilon), lo, hi, ROOT_TOL)?;
    Ok(StaffingResult { gamma: root.x, residual: root.residual, iterations: root.iterations })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JointOptimum {
    pub gamma: f64,
    pub eta: f64,
    pub value: f64,
    pub at_boundary: bool,
}

const JOINT_GRID: usize = 64;
const JOINT_TOL: f64 = 1e-7;

/// Maximises `R^0(gamma, eta)` over a box: 64x64 grid, then coordinate-wise
/// golden-section polish.
pub fn joint_optimum(econ: &Economic, gammas: &GammaInterval, etas: &GammaInterval) -> Result<JointOptimum> {
    if etas.lo < 0.0 {
        return Err(invalid("threshold range must be nonnegative"));
    }
    let f = |g: f64, e: f64| rhat0(econ, g, e);
    let gstep = (gammas.hi - gammas.lo) / (JOINT_GRID - 1) as f64;
    let estep = (etas.hi - etas.lo) / (JOINT_GRID - 1) as f64;
    let (mut g, mut e, mut best) = (gammas.lo, etas.lo, f64::NEG_INFINITY);
    for i in 0..JOINT_GRID {
        let gi = gammas.lo + i as f64 * gstep;
        for j in 0..JOINT_GRID {
            let ej = etas.lo + j as f64 * estep;
            let v = f(gi, ej)?;
            if v > best {
                (g, e, best) = (gi, ej, v);
            }
        }
    }
    for _ in 0..1000 {
        let g_lo = (g - gstep).max(gammas.lo);
        let g_hi = (g + gstep).min(gammas.hi);
        let mg = golden_section(&|x| f(x, e), g_lo, g_hi, 0.1 * JOINT_TOL)?;
        let new_g = if mg.value > best { mg.x } else { g };
        best = best.max(mg.value);
        let e_lo = (e - estep).max(etas.lo);
        let e_hi = (e + estep).min(etas.hi);
        let me = golden_section(&|y| f(new_g, y), e_lo, e_hi, 0.1 * JOINT_TOL)?;
        let new_e = if me.value > best { me.x } else { e };
        best = best.max(me.value);
        let moved = (new_g - g).abs().max((new_e - e).abs());
        (g, e) = (new_g, new_e);
        if moved < JOINT_TOL {
            break;
        }
    }
    let edge = 10.0 * JOINT_TOL;
    let at_boundary = g - gammas.lo < edge || gammas.hi - g < edge || e - etas.lo < edge || etas.hi - e < edge;
    if at_boundary {
        log::warn!("joint optimum ({g}, {e}) lies on the search box boundary");
    }
    Ok(JointOptimum { gamma: g, eta: e, value: f(g, e)?, at_boundary })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JointImprovement {
    pub joint: JointOptimum,
    /// `argmax_{gamma > 0} R^0(gamma, inf)`.
    pub gamma_inf: f64,
    pub value_inf: f64,
    pub gamma_ratio: f64,
    /// `100 (R^opt - R^opt_inf) / |R^opt_inf|`.
    pub pct_improvement: f64,
}

/// Gain of joint slack/threshold optimisation over slack-only optimisation
/// without admission control.
pub fn joint_improvement(econ: &Economic, gammas: &GammaInterval, etas: &GammaInterval) -> Result<JointImprovement> {
    let joint = joint_optimum(econ, gammas, etas)?;
    let lo = gammas.lo.max(1e-6);
    if lo >= gammas.hi {
        return Err(invalid("slack range must contain positive values for the eta = inf baseline"));
    }
    let m = maximize_scalar(|g| rhat0(econ, g, f64::INFINITY), lo, gammas.hi, SEARCH_TOL)?;
    if m.at_boundary {
        return Err(Error::Numerical(format!(
            "degenerate eta = inf baseline: optimum at the boundary gamma = {}",
            m.x
        )));
    }
    Ok(JointImprovement {
        joint,
        gamma_inf: m.x,
        value_inf: m.value,
        gamma_ratio: joint.gamma / m.x,
        pct_improvement: 100.0 * (joint.value - m.value) / m.value.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn thr(eta: f64) -> AdmissionPolicy {
        AdmissionPolicy::threshold(eta).unwrap()
    }

    #[test]
    fn synthetic_quadratic() {
        let r = maximize(|g| Ok(-(g - 1.0) * (g - 1.0)), &GammaInterval::default(), 0).unwrap();
        assert!((r.gamma_star - 1.0).abs() < 1e-7);
        assert!(r.bracket_width <= SEARCH_TOL);
    }

    #[test]
    fn order_zero_is_size_independent() {
        let e = Economic::new(0.1, 1.0, 0.0).unwrap();
        let a = maximize_asymptotic(0, Some(10), &e, &thr(2.0), &GammaInterval::default()).unwrap();
        let b = maximize_asymptotic(0, None, &e, &thr(2.0), &GammaInterval::default()).unwrap();
        assert_eq!(a.gamma_star, b.gamma_star);
    }

    #[test]
    fn exact_interval_must_respect_lambda() {
        let e = Economic::new(0.1, 1.0, 0.0).unwrap();
        let err = maximize_exact(4, &e, &thr(2.0), &GammaInterval::default()).unwrap_err();
        assert!(err.is_validation());
    }

    #[test]
    fn halfin_whitt_median_staffing() {
        // D0 = 1/(1 + gamma Phi/phi) = 1/2  <=>  gamma Phi(gamma)/phi(gamma) = 1
        let r = delay_staffing(0.5, DelayObjective::Order0, &thr(f64::INFINITY), &GammaInterval::new(0.05, 3.0).unwrap())
            .unwrap();
        assert!((r.gamma * crate::mills_ratio(r.gamma) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn staffing_without_sign_change() {
        let err =
            delay_staffing(0.999, DelayObjective::Order0, &thr(2.0), &GammaInterval::new(0.0, 3.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NoSignChange { .. }));
    }

    #[test]
    fn joint_cell_matches_table_entry() {
        let e = Economic::from_ratios(0.5, 1.0).unwrap();
        let j = joint_optimum(&e, &GammaInterval::new(-5.0, 5.0).unwrap(), &GammaInterval::new(0.0, 20.0).unwrap()).unwrap();
        assert!((j.gamma - 0.5).abs() < 0.05 && (j.eta - 0.8).abs() < 0.05, "{j:?}");
        assert!(!j.at_boundary);
    }

    #[test]
    fn refined_two_term_tracks_order_one_root() {
        let iv = GammaInterval::default();
        let p = thr(2.0);
        let r = refined_gamma(0.3, 400, &p, 1, &iv).unwrap();
        let root = delay_staffing(0.3, DelayObjective::Order1 { s: 400 }, &p, &iv).unwrap();
        assert!((r.gamma - root.gamma).abs() < 5e-3);
        let r3 = refined_gamma(0.3, 400, &p, 3, &iv).unwrap();
        assert!((r3.gamma - root.gamma).abs() < (r.gamma - root.gamma).abs());
    }
}
