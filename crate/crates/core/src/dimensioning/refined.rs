//! Refined staffing under a delay constraint: the order-1 root written as
//! the order-0 root plus a Lagrange-inversion series.

use serde::Serialize;

use super::{delay_staffing, DelayObjective, GammaInterval};
use crate::error::{invalid, Error, Result};
use crate::expansion::{delay_coeffs, policy_transform};
use crate::markov::AdmissionPolicy;

/// Degree of the local polynomial models of `A` and `E`.
const DEGREE: usize = 10;
const MAX_RADIUS: f64 = 0.25;
/// Coefficients beyond this order lose more than ~1e-5 relative accuracy.
pub const MAX_SERIES_TERMS: usize = 5;

/// Truncated power series in `t`.
type Series = Vec<f64>;

fn mul(a: &[f64], b: &[f64], n: usize) -> Series {
    let mut out = vec![0.0; n];
    for (i, &x) in a.iter().enumerate().take(n) {
        for (j, &y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn reciprocal(a: &[f64], n: usize) -> Series {
    let mut out = vec![0.0; n];
    out[0] = 1.0 / a[0];
    for k in 1..n {
        let acc: f64 = (1..=k.min(a.len() - 1)).map(|j| a[j] * out[k - j]).sum();
        out[k] = -acc / a[0];
    }
    out
}

fn power(a: &[f64], e: usize, n: usize) -> Series {
    let mut out = vec![0.0; n];
    out[0] = 1.0;
    for _ in 0..e {
        out = mul(&out, a, n);
    }
    out
}

fn derivative(a: &[f64]) -> Series {
    a.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect()
}

/// Taylor coefficients at 0 of `f` on `[-r, r]` via Chebyshev interpolation
/// at `DEGREE + 1` first-kind nodes.
pub(crate) fn taylor_coefficients<F>(f: F, r: f64) -> Result<Series>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = DEGREE + 1;
    let nodes: Vec<f64> = (0..m).map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / m as f64).cos()).collect();
    let values = nodes.iter().map(|&t| f(r * t)).collect::<Result<Vec<_>>>()?;
    let mut cheb = vec![0.0; m];
    for (k, c) in cheb.iter_mut().enumerate() {
        let s: f64 = (0..m)
            .map(|j| values[j] * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / m as f64).cos())
            .sum();
        *c = 2.0 * s / m as f64;
    }
    cheb[0] *= 0.5;
    // monomial coefficients of T_k via T_{k+1} = 2 t T_k - T_{k-1}
    let mut mono = vec![0.0; m];
    let mut prev = vec![0.0; m];
    let mut cur = vec![0.0; m];
    prev[0] = 1.0;
    cur[1] = 1.0;
    for (i, v) in prev.iter().enumerate() {
        mono[i] += cheb[0] * v;
    }
    for (i, v) in cur.iter().enumerate() {
        mono[i] += cheb[1] * v;
    }
    for c in cheb.iter().skip(2) {
        let mut next = vec![0.0; m];
        for i in 0..m - 1 {
            next[i + 1] += 2.0 * cur[i];
        }
        for i in 0..m {
            next[i] -= prev[i];
        }
        for (i, v) in next.iter().enumerate() {
            mono[i] += c * v;
        }
        prev = cur;
        cur = next;
    }
    Ok(mono.iter().enumerate().map(|(k, &a)| a / r.powi(k as i32)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinedGamma {
    /// `gamma_0 + gamma_bar`.
    pub gamma: f64,
    pub gamma0: f64,
    /// Individual series terms (the two-term closed form when `n_max = 1`).
    pub terms: Vec<f64>,
    /// The series stopped contracting and the two-term form was used instead.
    pub fell_back: bool,
}

/// Order-1 staffing level for `D0 + D1/sqrt(s) = epsilon`, expressed around
/// the order-0 root `gamma_0`.
///
/// `n_max = 1` gives `gamma_0 - D1(gamma_0) / (sqrt(s) D0'(gamma_0))`;
/// larger `n_max` sums that many terms of the inversion series
/// `sum_n (-1)^n [t^{n-1}] (A' + E') (t/A)^{n+1} E^n` with
/// `A(t) = D0(gamma_0 + t) - epsilon` and `E(t) = D1(gamma_0 + t)/sqrt(s)`.
pub fn refined_gamma(
    epsilon: f64,
    s: u64,
    policy: &AdmissionPolicy,
    n_max: usize,
    interval: &GammaInterval,
) -> Result<RefinedGamma> {
    if n_max == 0 || n_max > MAX_SERIES_TERMS {
        return Err(invalid(format!("series truncation must lie in 1..={MAX_SERIES_TERMS}")));
    }
    if s == 0 {
        return Err(invalid("s must be positive"));
    }
    let gamma0 = delay_staffing(epsilon, DelayObjective::Order0, policy, interval)?.gamma;
    let gamma_min = policy_transform(policy, gamma0)?.gamma_min;
    let r = MAX_RADIUS.min(0.5 * (gamma0 - gamma_min));
    let root = (s as f64).sqrt();
    let a = taylor_coefficients(|t| Ok(delay_coeffs(gamma0 + t, policy)?.0 - epsilon), r)?;
    let e = taylor_coefficients(|t| Ok(delay_coeffs(gamma0 + t, policy)?.1 / root), r)?;
    if !(a[1].abs() > 1e-12) {
        return Err(Error::Singular(format!("D0'(gamma_0) vanishes at gamma_0 = {gamma0}")));
    }
    let two_term = -e[0] / a[1];
    if n_max == 1 {
        return Ok(RefinedGamma { gamma: gamma0 + two_term, gamma0, terms: vec![two_term], fell_back: false });
    }

    let n = n_max + 1;
    let a_over_t: Series = a[1..].to_vec();
    let t_over_a = reciprocal(&a_over_t, n);
    let lead: Series = derivative(&a).iter().zip(derivative(&e)).map(|(x, y)| x + y).collect();
    let mut terms = Vec::with_capacity(n_max);
    for k in 1..=n_max {
        let h = mul(&mul(&lead, &power(&t_over_a, k + 1, n), n), &power(&e, k, n), n);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(sign * h[k - 1]);
    }
    let contracting = terms.windows(2).all(|w| w[1].abs() <= w[0].abs()) && terms.iter().all(|t| t.is_finite());
    if !contracting {
        log::warn!("refinement series does not contract at s = {s}; using the two-term form");
        return Ok(RefinedGamma { gamma: gamma0 + two_term, gamma0, terms: vec![two_term], fell_back: true });
    }
    Ok(RefinedGamma { gamma: gamma0 + terms.iter().sum::<f64>(), gamma0, terms, fell_back: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_of_exponential() {
        let c = taylor_coefficients(|t| Ok((0.7 * t).exp()), 0.25).unwrap();
        let mut fact = 1.0;
        for (k, &ck) in c.iter().enumerate().take(7) {
            if k > 0 {
                fact *= k as f64;
            }
            let want = 0.7f64.powi(k as i32) / fact;
            let tol = if k <= 4 { 1e-8 } else { 1e-5 };
            assert!((ck - want).abs() < tol * want, "k = {k}: {ck} vs {want}");
        }
    }

    #[test]
    fn series_inverts_a_known_function() {
        // A(t) = t + t^2, E = c constant: root of t + t^2 + c = 0 near 0
        let c = 0.01;
        let a = vec![0.0, 1.0, 1.0];
        let e = vec![c];
        let n = 8;
        let t_over_a = reciprocal(&a[1..], n);
        let lead: Series = derivative(&a);
        let mut total = 0.0;
        for k in 1..=7 {
            let h = mul(&mul(&lead, &power(&t_over_a, k + 1, n), n), &power(&e, k, n), n);
            total += if k % 2 == 0 { h[k - 1] } else { -h[k - 1] };
        }
        let exact = (-1.0 + (1.0 - 4.0 * c as f64).sqrt()) / 2.0;
        assert!((total - exact).abs() < 1e-13, "{total} vs {exact}");
    }
}
