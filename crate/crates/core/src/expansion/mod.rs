//! QED limit and first-order correction of revenue functionals.
//!
//! Everything is expressed through a handful of building blocks: Gaussian
//! moments left of the origin, Laplace-type moments of the admission
//! profile right of it, and the Erlang B expansion `B0, B1`.

mod mills;
mod profile;
pub mod quadrature;

pub use mills::{erfcx, mills_ratio, normal_cdf, normal_pdf};
pub use profile::RevenueProfile;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::markov::{AdmissionPolicy, Economic, ScaledProfile};

/// Absolute tolerance of every quadrature in this module.
pub const QUAD_TOL: f64 = 1e-10;

/// Laplace transform `L = int_0^inf f(x) e^{-gamma x} dx` of the admission
/// profile with its first two derivatives in `gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PolicyTransform {
    pub l: f64,
    pub lp: f64,
    pub lpp: f64,
    /// `f(0+)`.
    pub f_at_zero: f64,
    pub gamma_min: f64,
}

/// `R_0`, `R_1` and the blocks they are assembled from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpansionCoefficients {
    pub r0: f64,
    pub r1: f64,
    pub w0l: f64,
    pub w1l: f64,
    pub w0r: f64,
    pub w1r: f64,
    pub b0: f64,
    pub b1: f64,
    pub f0: f64,
    pub f1: f64,
}

impl ExpansionCoefficients {
    /// Two-term approximation `R_0 + R_1 / sqrt(s)`.
    pub fn approx(&self, s: f64) -> f64 {
        self.r0 + self.r1 / s.sqrt()
    }
}

/// `M_n = int_{-inf}^0 x^n e^{-x^2/2 - gamma x} dx` for `n = 0..=n_max`.
///
/// Forward recursion `M_n = -gamma M_{n-1} + (n-1) M_{n-2}` from
/// `M_0 = Phi/phi`, `M_1 = -1 - gamma M_0`. For `gamma < -1` the recursion
/// cancels, so the moments above `M_0` are integrated directly instead.
pub fn gaussian_moments(gamma: f64, n_max: usize) -> Vec<f64> {
    let mut m = Vec::with_capacity(n_max + 1);
    m.push(mills_ratio(gamma));
    if gamma < -1.0 {
        for n in 1..=n_max {
            let v = quadrature::integrate(
                |x| x.powi(n as i32) * (-0.5 * x * x - gamma * x).exp(),
                f64::NEG_INFINITY,
                0.0,
                0.0,
            )
            .map(|e| e.value)
            .unwrap_or(f64::NAN);
            m.push(v);
        }
        return m;
    }
    if n_max >= 1 {
        m.push(-1.0 - gamma * m[0]);
    }
    for n in 2..=n_max {
        let next = -gamma * m[n - 1] + (n - 1) as f64 * m[n - 2];
        m.push(next);
    }
    m
}

/// `J_n = int_0^eta x^n e^{-gamma x} dx` for `n = 0..=n_max`.
///
/// Every branch sums positive terms only, so `gamma -> 0` needs no special
/// case. `eta = inf` requires `gamma > 0`.
pub fn threshold_moments(gamma: f64, eta: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(eta >= 0.0) {
        return Err(invalid("threshold eta must be nonnegative"));
    }
    if eta.is_infinite() {
        if !(gamma > 0.0) {
            return Err(Error::Divergent(format!(
                "int_0^inf x^n e^(-gamma x) dx diverges for gamma = {gamma} <= 0 (always-join policy)"
            )));
        }
        let mut out = Vec::with_capacity(n_max + 1);
        let mut v = 1.0 / gamma;
        for n in 0..=n_max {
            out.push(v);
            v *= (n + 1) as f64 / gamma;
        }
        return Ok(out);
    }
    if eta == 0.0 {
        return Ok(vec![0.0; n_max + 1]);
    }
    let x = gamma * eta;
    (0..=n_max)
        .map(|n| {
            let scale = eta.powi(n as i32 + 1);
            let nf = n as f64;
            if x <= 0.0 {
                // eta^{n+1} sum_m (-x)^m / (m! (n + m + 1))
                let y = -x;
                let (mut term, mut sum) = (1.0, 1.0 / (nf + 1.0));
                for m in 1..100_000 {
                    term *= y / m as f64;
                    let add = term / (nf + m as f64 + 1.0);
                    sum += add;
                    if add < 1e-17 * sum {
                        break;
                    }
                }
                Ok(scale * sum)
            } else if x <= nf + 1.0 {
                // eta^{n+1} e^{-x} sum_j n! x^j / (n + 1 + j)!
                let (mut term, mut sum) = (1.0 / (nf + 1.0), 1.0 / (nf + 1.0));
                for j in 1..10_000 {
                    term *= x / (nf + 1.0 + j as f64);
                    sum += term;
                    if term < 1e-17 * sum {
                        break;
                    }
                }
                Ok(scale * (-x).exp() * sum)
            } else {
                // n!/gamma^{n+1} (1 - e^{-x} sum_{k<=n} x^k / k!)
                let (mut term, mut head) = (1.0, 1.0);
                let mut fact = 1.0;
                for k in 1..=n {
                    term *= x / k as f64;
                    head += term;
                    fact *= k as f64;
                }
                Ok(fact / gamma.powi(n as i32 + 1) * (1.0 - (-x).exp() * head))
            }
        })
        .collect()
}

fn scaled_only() -> Error {
    invalid("asymptotic expansions need a scaled admission policy (threshold or profile)")
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("gamma must be finite (got {gamma})")))
    }
}

/// Right limit of integration beyond which `C (1+x)^n e^{-a x}` integrates to
/// less than `tol`.
fn certified_cutoff(c: f64, a: f64, n: usize, tol: f64) -> f64 {
    let nf = n as f64;
    let mut x = (2.0 * nf / a).max(1.0);
    // for a (1 + x) >= 2n the tail is at most 2 C (1+x)^n e^{-a x} / a
    while 2.0 * c * (1.0 + x).powf(nf) * (-a * x).exp() / a > tol {
        x *= 1.25;
    }
    x
}

/// `int_0^inf w(x) f(x) e^{-gamma x} dx` for a scaled profile, where
/// `|w(x)| <= w_scale (1+x)^degree`.
fn profile_integral<W: Fn(f64) -> f64>(
    profile: &ScaledProfile,
    gamma: f64,
    w: W,
    degree: usize,
    w_scale: f64,
) -> Result<f64> {
    let (c, kappa) = profile.envelope();
    let a = gamma + kappa;
    if !(a > 0.0) {
        return Err(Error::Divergent(format!(
            "gamma = {gamma} is not above gamma_min = {} of profile '{}'",
            -kappa,
            profile.label()
        )));
    }
    let upper = certified_cutoff(c * w_scale.max(1e-300), a, degree, 0.01 * QUAD_TOL);
    let e = quadrature::integrate(|x| w(x) * profile.eval(x) * (-gamma * x).exp(), 0.0, upper, QUAD_TOL)?;
    Ok(e.value)
}

/// Closed forms for thresholds, quadrature for general profiles.
pub fn policy_transform(policy: &AdmissionPolicy, gamma: f64) -> Result<PolicyTransform> {
    check_gamma(gamma)?;
    match policy {
        AdmissionPolicy::Exact(_) => Err(scaled_only()),
        AdmissionPolicy::Threshold { eta } => {
            let j = threshold_moments(gamma, *eta, 2)?;
            Ok(PolicyTransform {
                l: j[0],
                lp: -j[1],
                lpp: j[2],
                f_at_zero: if *eta > 0.0 { 1.0 } else { 0.0 },
                gamma_min: if eta.is_infinite() { 0.0 } else { f64::NEG_INFINITY },
            })
        }
        AdmissionPolicy::Profile(p) => Ok(PolicyTransform {
            l: profile_integral(p, gamma, |_| 1.0, 0, 1.0)?,
            lp: -profile_integral(p, gamma, |x| x, 1, 1.0)?,
            lpp: profile_integral(p, gamma, |x| x * x, 2, 1.0)?,
            f_at_zero: p.eval(0.0),
            gamma_min: p.gamma_min(),
        }),
    }
}

/// Scans a general profile for jumps away from the origin: a difference that
/// survives repeated bisection down to ~1e-14 is a discontinuity.
fn reject_interior_jumps(r: &RevenueProfile) -> Result<()> {
    const STEP: f64 = 1.0 / 64.0;
    const SPAN: i32 = 512;
    // left intervals end at 0 and see r(0-); right intervals start just above 0
    let g = |x: f64| if x == 0.0 { r.left_limit() } else { r.eval(x) };
    let mut intervals = Vec::new();
    let mut magnitude: f64 = 0.0;
    for i in 0..SPAN {
        let k = i as f64 * STEP;
        for (lo, hi) in [(-k - STEP, -k), (k.max(f64::MIN_POSITIVE), k + STEP)] {
            let (a, b) = (g(lo), g(hi));
            if !(a.is_finite() && b.is_finite()) {
                return Err(invalid("revenue profile is not finite on [-8, 8]"));
            }
            magnitude = magnitude.max(a.abs()).max(b.abs());
            intervals.push(((a - b).abs(), lo, hi));
        }
    }
    intervals.sort_by(|p, q| q.0.total_cmp(&p.0));
    let threshold = 1e-8 * (1.0 + magnitude);
    for &(_, mut lo, mut hi) in intervals.iter().take(8) {
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if (g(mid) - g(lo)).abs() >= (g(hi) - g(mid)).abs() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if (g(hi) - g(lo)).abs() > threshold {
            return Err(invalid(format!(
                "revenue profile jumps near x = {:.6}; only a jump at the origin is supported",
                0.5 * (lo + hi)
            )));
        }
    }
    Ok(())
}

/// Left-hand blocks `(W0L, int (x^3/3 - (1+gamma^2) x) r e dx)`.
fn left_blocks(r: &RevenueProfile, gamma: f64, m: &[f64]) -> Result<(f64, f64)> {
    let g2 = 1.0 + gamma * gamma;
    match r {
        RevenueProfile::Piecewise { left, .. } => {
            let w0: f64 = (0..4).map(|i| left[i] * m[i]).sum();
            let w1: f64 = (0..4).map(|i| left[i] * (m[i + 3] / 3.0 - g2 * m[i + 1])).sum();
            Ok((w0, w1))
        }
        RevenueProfile::General { r, .. } => {
            let kernel = |x: f64| (-0.5 * x * x - gamma * x).exp();
            let w0 = quadrature::integrate(|x| r(x) * kernel(x), f64::NEG_INFINITY, 0.0, QUAD_TOL)?;
            let w1 = quadrature::integrate(
                |x| (x * x * x / 3.0 - g2 * x) * r(x) * kernel(x),
                f64::NEG_INFINITY,
                0.0,
                QUAD_TOL,
            )?;
            Ok((w0.value, w1.value))
        }
    }
}

/// Right-hand moments `(int r f e dx, int x r f e dx)`.
fn right_moments(r: &RevenueProfile, policy: &AdmissionPolicy, gamma: f64) -> Result<(f64, f64)> {
    match (r, policy) {
        (_, AdmissionPolicy::Exact(_)) => Err(scaled_only()),
        (RevenueProfile::Piecewise { right, .. }, AdmissionPolicy::Threshold { eta }) => {
            let j = threshold_moments(gamma, *eta, 4)?;
            Ok(((0..4).map(|i| right[i] * j[i]).sum(), (0..4).map(|i| right[i] * j[i + 1]).sum()))
        }
        (RevenueProfile::Piecewise { right, .. }, AdmissionPolicy::Profile(p)) => {
            let scale: f64 = right.iter().map(|c| c.abs()).sum();
            let poly = |x: f64| r.eval(x);
            Ok((
                profile_integral(p, gamma, poly, 3, scale)?,
                profile_integral(p, gamma, |x| x * poly(x), 4, scale)?,
            ))
        }
        (RevenueProfile::General { r: rf, .. }, AdmissionPolicy::Threshold { eta }) => {
            if eta.is_infinite() && !(gamma > 0.0) {
                return Err(Error::Divergent(format!(
                    "right-hand revenue integral diverges for gamma = {gamma} <= 0 (always-join policy)"
                )));
            }
            let k = |x: f64| (-gamma * x).exp();
            let a = quadrature::integrate(|x| rf(x) * k(x), 0.0, *eta, QUAD_TOL)?;
            let b = quadrature::integrate(|x| x * rf(x) * k(x), 0.0, *eta, QUAD_TOL)?;
            Ok((a.value, b.value))
        }
        (RevenueProfile::General { r: rf, .. }, AdmissionPolicy::Profile(p)) => {
            if !(gamma > p.gamma_min()) {
                return Err(Error::Divergent(format!(
                    "gamma = {gamma} is not above gamma_min = {} of profile '{}'",
                    p.gamma_min(),
                    p.label()
                )));
            }
            let k = |x: f64| p.eval(x) * (-gamma * x).exp();
            let a = quadrature::integrate(|x| rf(x) * k(x), 0.0, f64::INFINITY, QUAD_TOL)?;
            let b = quadrature::integrate(|x| x * rf(x) * k(x), 0.0, f64::INFINITY, QUAD_TOL)?;
            Ok((a.value, b.value))
        }
    }
}

/// Coefficients of `(R_s - n_s)/q_s = R_0 + R_1/sqrt(s) + O(1/s)`.
///
/// The boundary term of `W1L` is `r(0+) - r(0-)/2`: a profile continuous at
/// the origin contributes `r(0)/2`, while a jump there (as for the delay
/// probability) adds the full right-hand value minus half the left limit.
pub fn expansion_coeffs(r: &RevenueProfile, policy: &AdmissionPolicy, gamma: f64) -> Result<ExpansionCoefficients> {
    check_gamma(gamma)?;
    if let RevenueProfile::General { .. } = r {
        reject_interior_jumps(r)?;
    }
    let pt = policy_transform(policy, gamma)?;
    let m = gaussian_moments(gamma, 6);
    let b0 = m[0];
    let b1 = (2.0 + gamma * gamma + gamma.powi(3) * b0) / 3.0;
    let f0 = pt.l;
    let f1 = 0.5 * gamma * gamma * pt.lp - 0.5 * pt.f_at_zero;

    let (r_plus, r_minus) = (r.at_origin(), r.left_limit());
    let (w0l, left_kernel) = left_blocks(r, gamma, &m)?;
    let w1l = 0.5 * left_kernel + r_plus - 0.5 * r_minus;
    let (rm0, rm1) = right_moments(r, policy, gamma)?;
    let w0r = rm0;
    let w1r = -0.5 * gamma * gamma * rm1 - 0.5 * r_plus * pt.f_at_zero;

    let denom = b0 + f0;
    let r0 = (w0l + w0r) / denom;
    let r1 = (w1l + w1r) / denom - (w0l + w0r) * (b1 + f1) / (denom * denom);
    if !(r0.is_finite() && r1.is_finite()) {
        return Err(Error::Numerical(format!("expansion coefficients are not finite at gamma = {gamma}")));
    }
    Ok(ExpansionCoefficients { r0, r1, w0l, w1l, w0r, w1r, b0, b1, f0, f1 })
}

/// `(D0, D1)` of the delay probability.
pub fn delay_coeffs(gamma: f64, policy: &AdmissionPolicy) -> Result<(f64, f64)> {
    let c = expansion_coeffs(&RevenueProfile::delay(), policy, gamma)?;
    Ok((c.r0, c.r1))
}

/// `(Q0, Q1)` of the mean queue length scaled by `sqrt(s)`.
pub fn queue_coeffs(gamma: f64, policy: &AdmissionPolicy) -> Result<(f64, f64)> {
    let c = expansion_coeffs(&RevenueProfile::queue(), policy, gamma)?;
    Ok((c.r0, c.r1))
}

/// `(I0, I1)` of the mean number of idle servers scaled by `sqrt(s)`.
pub fn idle_coeffs(gamma: f64, policy: &AdmissionPolicy) -> Result<(f64, f64)> {
    let c = expansion_coeffs(&RevenueProfile::idle(), policy, gamma)?;
    Ok((c.r0, c.r1))
}

/// `(R^0, R^1)` of the scaled economic revenue `(R_s - a s)/sqrt(s)` under
/// threshold `eta` (`inf` for no admission control).
pub fn rhat_coeffs(econ: &Economic, gamma: f64, eta: f64) -> Result<(f64, f64)> {
    let policy = AdmissionPolicy::threshold(eta)?;
    let c = expansion_coeffs(&econ.profile(gamma), &policy, gamma)?;
    Ok((c.r0, c.r1))
}

/// Closed-form limit
/// `R^0 = d gamma - ((a+d)(1 + gamma M0) + b J1) / (M0 + J0)`.
pub fn rhat0(econ: &Economic, gamma: f64, eta: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let m0 = mills_ratio(gamma);
    let j = threshold_moments(gamma, eta, 1)?;
    Ok(econ.d * gamma - ((econ.a + econ.d) * (1.0 + gamma * m0) + econ.b * j[1]) / (m0 + j[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn thr(eta: f64) -> AdmissionPolicy {
        AdmissionPolicy::threshold(eta).unwrap()
    }

    fn quad(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        quadrature::integrate(f, lo, hi, 1e-13).unwrap().value
    }

    #[test]
    fn threshold_transform_examples() {
        let t = policy_transform(&thr(2.0), 2.0).unwrap();
        assert_relative_eq!(t.l, (1.0 - (-4.0f64).exp()) / 2.0, max_relative = 1e-15);
        assert_relative_eq!(t.l, 0.4908421806, epsilon = 1e-10);
        for eta in [0.5, 1.0, 3.7] {
            assert_relative_eq!(policy_transform(&thr(eta), 0.0).unwrap().l, eta, max_relative = 1e-15);
        }
    }

    #[test]
    fn exponential_profile_transform() {
        let p = AdmissionPolicy::Profile(ScaledProfile::exponential(1.0).unwrap());
        let t = policy_transform(&p, 1.0).unwrap();
        assert!((t.l - 0.5).abs() < 1e-10);
        assert!((t.lp + 0.25).abs() < 1e-10);
        assert!((t.lpp - 0.25).abs() < 1e-10);
        assert_eq!(t.f_at_zero, 1.0);
    }

    #[test]
    fn threshold_moments_match_quadrature() {
        for &gamma in &[-5.0, -2.0, -1.0, -1e-9, 0.0, 1e-7, 0.3, 1.0, 2.0, 3.0, 40.0] {
            for &eta in &[0.5, 1.0, 2.0, 5.0, 20.0] {
                let j = threshold_moments(gamma, eta, 4).unwrap();
                for (n, &v) in j.iter().enumerate() {
                    let want = quad(|x| x.powi(n as i32) * (-gamma * x).exp(), 0.0, eta);
                    assert_relative_eq!(v, want, max_relative = 1e-12, epsilon = 1e-300);
                }
            }
        }
    }

    #[test]
    fn gaussian_moments_match_quadrature() {
        for &gamma in &[-8.0, -5.0, -1.5, -1.0, 0.0, 2.0, 4.0] {
            let m = gaussian_moments(gamma, 6);
            for (n, &v) in m.iter().enumerate() {
                let want = quad(|x| x.powi(n as i32) * (-0.5 * x * x - gamma * x).exp(), f64::NEG_INFINITY, 0.0);
                assert_relative_eq!(v, want, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn moment_recursion_holds_everywhere() {
        for &gamma in &[-6.0, -3.0, -1.2, 0.5] {
            let m = gaussian_moments(gamma, 6);
            assert_relative_eq!(m[1], -1.0 - gamma * m[0], max_relative = 1e-9);
            for n in 2..=6 {
                let next = -gamma * m[n - 1] + (n - 1) as f64 * m[n - 2];
                assert!((m[n] - next).abs() < 1e-9 * m[n - 2].abs().max(m[n].abs()), "gamma {gamma} n {n}");
            }
        }
    }

    #[test]
    fn unit_revenue_has_no_correction() {
        for policy in [thr(0.0), thr(2.0), thr(f64::INFINITY)] {
            let c = expansion_coeffs(&RevenueProfile::constant(1.0), &policy, 1.3).unwrap();
            assert!((c.r0 - 1.0).abs() < 1e-13, "{c:?}");
            assert!(c.r1.abs() < 1e-13, "{c:?}");
        }
    }

    #[test]
    fn loss_system_delay() {
        let (d0, d1) = delay_coeffs(0.7, &thr(0.0)).unwrap();
        assert_eq!(d0, 0.0);
        assert_relative_eq!(d1, 1.0 / mills_ratio(0.7), max_relative = 1e-14);
        let (q0, _) = queue_coeffs(0.7, &thr(0.0)).unwrap();
        assert_eq!(q0, 0.0);
    }

    #[test]
    fn halfin_whitt_delay() {
        let (d0, _) = delay_coeffs(1.0, &thr(f64::INFINITY)).unwrap();
        assert_relative_eq!(d0, 1.0 / (1.0 + mills_ratio(1.0)), max_relative = 1e-14);
        assert!((d0 - 0.223_361_275).abs() < 1e-9);
    }

    #[test]
    fn delay_blocks() {
        let gamma = 1.5;
        let t = policy_transform(&thr(2.0), gamma).unwrap();
        let c = expansion_coeffs(&RevenueProfile::delay(), &thr(2.0), gamma).unwrap();
        assert_eq!(c.w0l, 0.0);
        assert_relative_eq!(c.w0r, t.l, max_relative = 1e-15);
        assert_relative_eq!(c.w1l, 1.0);
        assert_relative_eq!(c.w1r, 0.5 * gamma * gamma * t.lp - 0.5, max_relative = 1e-14);
    }

    #[test]
    fn rhat0_closed_form_agrees_with_blocks() {
        let e = Economic::new(0.1, 1.0, 0.0).unwrap();
        let want = -(0.1 * (1.0 + 2.0 * mills_ratio(2.0)) + (1.0 - 5.0 * (-4.0f64).exp()) / 4.0)
            / (mills_ratio(2.0) + (1.0 - (-4.0f64).exp()) / 2.0);
        assert_relative_eq!(rhat0(&e, 2.0, 2.0).unwrap(), want, max_relative = 1e-14);
        assert!((want + 0.21231).abs() < 5e-6);
        let e = Economic::new(0.3, 0.8, 0.6).unwrap();
        for &(g, eta) in &[(-1.0, 1.0), (0.5, 3.0), (2.0, f64::INFINITY)] {
            let (r0, _) = rhat_coeffs(&e, g, eta).unwrap();
            assert_relative_eq!(r0, rhat0(&e, g, eta).unwrap(), max_relative = 1e-13);
        }
    }

    #[test]
    fn always_join_needs_positive_gamma() {
        let e = Economic::new(0.1, 1.0, 0.0).unwrap();
        assert!(matches!(rhat_coeffs(&e, -0.5, f64::INFINITY), Err(Error::Divergent(_))));
        assert!(matches!(rhat0(&e, 0.0, f64::INFINITY), Err(Error::Divergent(_))));
    }

    #[test]
    fn general_profile_matches_piecewise() {
        let e = Economic::new(0.4, 1.3, 0.7).unwrap();
        let gamma = 0.9;
        let pw = e.profile(gamma);
        let gen = RevenueProfile::general("econ", move |x| pw.eval(x));
        for policy in [thr(1.5), AdmissionPolicy::Profile(ScaledProfile::exponential(0.5).unwrap())] {
            let a = expansion_coeffs(&e.profile(gamma), &policy, gamma).unwrap();
            let b = expansion_coeffs(&gen, &policy, gamma).unwrap();
            assert!((a.r0 - b.r0).abs() < 1e-9 && (a.r1 - b.r1).abs() < 1e-9, "{a:?} {b:?}");
        }
    }

    #[test]
    fn interior_jump_is_rejected() {
        let r = RevenueProfile::general("step", |x| if x < 1.3 { 0.0 } else { 1.0 });
        let err = expansion_coeffs(&r, &thr(2.0), 1.0).unwrap_err();
        assert!(err.to_string().contains("jumps near x = 1.3"), "{err}");
        let ok = RevenueProfile::general("origin step", |x| if x < 0.0 { 0.0 } else { 1.0 + x.tanh() });
        assert!(expansion_coeffs(&ok, &thr(2.0), 1.0).is_ok());
    }

    #[test]
    fn below_gamma_min_diverges() {
        let p = AdmissionPolicy::Profile(ScaledProfile::exponential(1.0).unwrap());
        assert!(matches!(policy_transform(&p, -1.0), Err(Error::Divergent(_))));
        assert!(policy_transform(&AdmissionPolicy::Exact(crate::JoinSequence::always()), 1.0).is_err());
    }
}
