//! Optimality-gap sweeps over the system size, decay-law fits and the
//! joint staffing/admission tables.

mod fit;

pub use fit::{fit_decay, DecayModel, FitResult};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dimensioning::{joint_improvement, maximize_asymptotic, maximize_exact, GammaInterval, JointImprovement};
use crate::error::{invalid, Error, Result};
use crate::expansion::rhat_coeffs;
use crate::markov::{revenue_rate_hat, AdmissionPolicy, Economic, SystemConfig};

/// Column names of a gap report, in order.
pub const GAP_COLUMNS: [&str; 6] = ["s", "err_expansion", "gap_gamma_0", "gap_gamma_1", "gap_value_0", "gap_value_1"];

/// Default ratios `a/(a+d)` of the cost-ratio tables.
pub const TABLE_R1: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
/// Default ratios `(a+d)/b` of the cost-ratio tables.
pub const TABLE_R2: [f64; 9] = [1.0 / 5.0, 1.0 / 4.0, 1.0 / 3.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub econ: Economic,
    pub eta: f64,
    /// Slack at which the expansion error is measured.
    pub gamma_eval: f64,
    pub s_values: Vec<u64>,
    pub interval: GammaInterval,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            econ: Economic { a: 0.1, b: 1.0, d: 0.0 },
            eta: 2.0,
            gamma_eval: 2.0,
            s_values: (10..=75).collect(),
            interval: GammaInterval::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub s: u64,
    /// `|R^_s - R^0 - R^1/sqrt(s)|` at `gamma_eval`.
    pub err_expansion: f64,
    /// `|gamma_0 - gamma*_s|`
    pub gap_gamma_0: f64,
    /// `|gamma_{1,s} - gamma*_s|`
    pub gap_gamma_1: f64,
    /// `|R^_s(gamma*_s) - R^_s(gamma_0)|`
    pub gap_value_0: f64,
    /// `|R^_s(gamma*_s) - R^_s(gamma_{1,s})|`
    pub gap_value_1: f64,
}

impl GapRow {
    pub fn values(&self) -> [f64; 6] {
        [self.s as f64, self.err_expansion, self.gap_gamma_0, self.gap_gamma_1, self.gap_value_0, self.gap_value_1]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub params: SweepParams,
    /// Order-0 maximiser, shared by every row.
    pub gamma_0: f64,
    pub rows: Vec<GapRow>,
}

impl GapReport {
    /// `(s, column)` pairs for fitting.
    pub fn series(&self, column: &str) -> Result<Vec<(f64, f64)>> {
        let idx = GAP_COLUMNS
            .iter()
            .position(|c| *c == column)
            .filter(|&i| i > 0)
            .ok_or_else(|| invalid(format!("unknown gap column '{column}'")))?;
        Ok(self.rows.iter().map(|r| (r.s as f64, r.values()[idx])).collect())
    }
}

/// Runs `f` on a pool of at most `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(invalid("thread count must be positive")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::Numerical(format!("could not start worker pool: {e}"))),
    }
}

fn gap_row(p: &SweepParams, policy: &AdmissionPolicy, gamma_0: f64, s: u64) -> Result<GapRow> {
    let rhat = |g: f64| revenue_rate_hat(&SystemConfig::new(s, g, policy.clone())?, &p.econ);
    let (r0, r1) = rhat_coeffs(&p.econ, p.gamma_eval, p.eta)?;
    let err_expansion = (rhat(p.gamma_eval)? - r0 - r1 / (s as f64).sqrt()).abs();
    let exact = maximize_exact(s, &p.econ, policy, &p.interval)?;
    let first = maximize_asymptotic(1, Some(s), &p.econ, policy, &p.interval)?;
    Ok(GapRow {
        s,
        err_expansion,
        gap_gamma_0: (gamma_0 - exact.gamma_star).abs(),
        gap_gamma_1: (first.gamma_star - exact.gamma_star).abs(),
        gap_value_0: (exact.value - rhat(gamma_0)?).abs(),
        gap_value_1: (exact.value - rhat(first.gamma_star)?).abs(),
    })
}

/// Expansion error and optimality gaps for every `s` in the sweep. Sizes are
/// evaluated in parallel; rows come back sorted by `s`.
pub fn gap_sweep(params: &SweepParams) -> Result<GapReport> {
    let mut sizes = params.s_values.clone();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.is_empty() {
        return Err(invalid("the sweep needs at least one system size"));
    }
    if sizes[0] == 0 {
        return Err(invalid("system sizes must be positive"));
    }
    let policy = AdmissionPolicy::threshold(params.eta)?;
    let gamma_0 = maximize_asymptotic(0, None, &params.econ, &policy, &params.interval)?.gamma_star;
    let rows = sizes
        .par_iter()
        .map(|&s| gap_row(params, &policy, gamma_0, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(GapReport { params: params.clone(), gamma_0, rows })
}

/// Rounds half away from zero to `digits` decimals.
pub fn round_half_away(x: f64, digits: i32) -> f64 {
    let scale = 10f64.powi(digits);
    let y = x * scale;
    // nudge values printed as exact halves (0.15 is 0.1499999... in binary)
    let nudged = y + y.signum() * 1e-9;
    nudged.round() / scale
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TableCell {
    pub r1: f64,
    pub r2: f64,
    pub result: JointImprovement,
}

impl TableCell {
    /// `(gamma_opt, eta_opt)` to one decimal.
    pub fn rounded_pair(&self) -> (f64, f64) {
        (round_half_away(self.result.joint.gamma, 1), round_half_away(self.result.joint.eta, 1))
    }

    /// `(gamma ratio, % improvement)` to one decimal and integer percent.
    pub fn rounded_improvement(&self) -> (f64, f64) {
        (round_half_away(self.result.gamma_ratio, 1), round_half_away(self.result.pct_improvement, 0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointTables {
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    /// Row-major: `cells[i][j]` belongs to `(r1[i], r2[j])`.
    pub cells: Vec<Vec<TableCell>>,
}

/// Joint optimum and its gain over `eta = inf` for every ratio pair, with
/// economics `a = r1`, `d = 1 - r1`, `b = 1/r2`.
pub fn joint_tables(r1: &[f64], r2: &[f64], gammas: &GammaInterval, etas: &GammaInterval) -> Result<JointTables> {
    if r1.is_empty() || r2.is_empty() {
        return Err(invalid("table grids must be nonempty"));
    }
    let cells = r1
        .par_iter()
        .map(|&x| {
            r2.iter()
                .map(|&y| {
                    let econ = Economic::from_ratios(x, y)?;
                    Ok(TableCell { r1: x, r2: y, result: joint_improvement(&econ, gammas, etas)? })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JointTables { r1: r1.to_vec(), r2: r2.to_vec(), cells })
}
