//! Globally adaptive 7/15-point Gauss-Kronrod quadrature.
//!
//! Infinite limits are mapped to `[0, 1)` with `x = a + t / (1 - t)`;
//! the Kronrod nodes never touch the singular endpoint.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 4000;
// Requested absolute tolerances below this fraction of the integral are unattainable in f64.
const RELATIVE_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

struct Piece {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kron += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Integrates `f` over `[lo, hi]` (either limit may be infinite) to an
/// absolute error of `tol`, or `1e-14` relative when that is larger.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Estimate> {
    integrate_dyn(&f, lo, hi, tol)
}

fn integrate_dyn(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<Estimate> {
    if lo.is_nan() || hi.is_nan() {
        return Err(Error::InvalidInput("integration limits must not be NaN".into()));
    }
    if lo == hi {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    if lo > hi {
        let e = integrate_dyn(f, hi, lo, tol)?;
        return Ok(Estimate { value: -e.value, error: e.error });
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => adaptive(&f, lo, hi, tol),
        (true, false) => adaptive(
            &|t: f64| {
                let u = 1.0 - t;
                f(lo + t / u) / (u * u)
            },
            0.0,
            1.0,
            tol,
        ),
        (false, true) => adaptive(
            &|t: f64| {
                let u = 1.0 - t;
                f(hi - t / u) / (u * u)
            },
            0.0,
            1.0,
            tol,
        ),
        (false, false) => {
            let left = integrate_dyn(f, f64::NEG_INFINITY, 0.0, 0.5 * tol)?;
            let right = integrate_dyn(f, 0.0, f64::INFINITY, 0.5 * tol)?;
            Ok(Estimate { value: left.value + right.value, error: left.error + right.error })
        }
    }
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> Result<Estimate> {
    let (value, error) = kronrod(f, lo, hi);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { lo, hi, value, error });
    let mut total = value;
    let mut total_err = error;
    while total_err > tol.max(RELATIVE_FLOOR * total.abs()) {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::Numerical(format!(
                "quadrature on [{lo}, {hi}] stalled at error {total_err:e} (tolerance {tol:e})"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            return Err(Error::Numerical("quadrature interval collapsed below machine resolution".into()));
        }
        let (v1, e1) = kronrod(f, worst.lo, mid);
        let (v2, e2) = kronrod(f, mid, worst.hi);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Piece { lo: worst.lo, hi: mid, value: v1, error: e1 });
        heap.push(Piece { lo: mid, hi: worst.hi, value: v2, error: e2 });
        // re-sum occasionally to shed accumulated cancellation in the running totals
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    let value: f64 = heap.iter().map(|p| p.value).sum();
    if !value.is_finite() {
        return Err(Error::Numerical("quadrature produced a non-finite value".into()));
    }
    Ok(Estimate { value, error: total_err })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let e = integrate(|x| 3.0 * x * x - x + 2.0, -1.0, 2.0, 1e-14).unwrap();
        assert!((e.value - (9.0 - 1.5 + 6.0)).abs() < 1e-13);
    }

    #[test]
    fn gaussian_over_real_line() {
        let e = integrate(|x| (-0.5 * x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, 1e-13).unwrap();
        assert!((e.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn exponential_tail() {
        let e = integrate(|x| x * x * (-2.0 * x).exp(), 0.0, f64::INFINITY, 1e-14).unwrap();
        assert!((e.value - 0.25).abs() < 1e-13);
    }

    #[test]
    fn jump_discontinuity() {
        let e = integrate(|x| if x < 0.3 { 1.0 } else { 0.0 }, 0.0, 1.0, 1e-11).unwrap();
        assert!((e.value - 0.3).abs() < 1e-11);
    }

    #[test]
    fn reversed_limits_negate() {
        let e = integrate(|x| x, 1.0, 0.0, 1e-14).unwrap();
        assert!((e.value + 0.5).abs() < 1e-15);
    }
}
