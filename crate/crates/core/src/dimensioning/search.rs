//! Derivative-free scalar search: scan + golden section for maxima,
//! bisection + secant for roots.

use crate::error::{Error, Result};

pub const SCAN_POINTS: usize = 64;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
    pub bracket_width: f64,
    pub at_boundary: bool,
}

/// Golden-section search on `[a, b]` assuming a single interior peak.
pub fn golden_section<F>(f: &F, mut a: f64, mut b: f64, tol: f64) -> Result<Maximum>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut iterations = 0;
    while b - a > tol {
        iterations += 1;
        // ties go left, so flat objectives resolve to the smallest argument
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
        if iterations > 500 {
            break;
        }
    }
    let (x, value) = if fc >= fd { (c, fc) } else { (d, fd) };
    Ok(Maximum { x, value, iterations, bracket_width: b - a, at_boundary: false })
}

/// Maximises `f` on `[lo, hi]`: an equispaced scan picks the best grid point
/// (smallest argument on ties), golden section refines between its neighbours.
pub fn maximize_scalar<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Maximum>
where
    F: Fn(f64) -> Result<f64>,
{
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|i| if i + 1 == SCAN_POINTS { hi } else { lo + i as f64 * step }).collect();
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, &x) in grid.iter().enumerate() {
        let v = f(x)?;
        if v.is_nan() {
            return Err(Error::Numerical(format!("objective is NaN at {x}")));
        }
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(SCAN_POINTS - 1)];
    let mut m = golden_section(&f, a, b, tol)?;
    if best_value > m.value {
        m.x = grid[best];
        m.value = best_value;
    }
    m.iterations += SCAN_POINTS;
    m.at_boundary = m.x - lo <= 10.0 * tol || hi - m.x <= 10.0 * tol;
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Root of `g` on `[lo, hi]` with a sign change: bisection to a narrow
/// bracket, then bracketed secant steps until `|g| <= ftol`.
pub fn find_root<G>(g: G, lo: f64, hi: f64, ftol: f64) -> Result<Root>
where
    G: Fn(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let (mut ga, mut gb) = (g(a)?, g(b)?);
    if ga == 0.0 {
        return Ok(Root { x: a, residual: 0.0, iterations: 0 });
    }
    if gb == 0.0 {
        return Ok(Root { x: b, residual: 0.0, iterations: 0 });
    }
    if ga.signum() == gb.signum() || ga.is_nan() || gb.is_nan() {
        return Err(Error::NoSignChange { lo, hi, f_lo: ga, f_hi: gb });
    }
    let mut iterations = 0;
    let mut polish = false;
    loop {
        iterations += 1;
        let x = if polish {
            let sec = b - gb * (b - a) / (gb - ga);
            if sec > a.min(b) && sec < a.max(b) {
                sec
            } else {
                0.5 * (a + b)
            }
        } else {
            0.5 * (a + b)
        };
        let gx = g(x)?;
        if gx.abs() <= ftol || (b - a).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            return Ok(Root { x, residual: gx, iterations });
        }
        if gx.signum() == ga.signum() {
            a = x;
            ga = gx;
        } else {
            b = x;
            gb = gx;
        }
        if !polish && (b - a).abs() < 1e-6 {
            polish = true;
        }
        if iterations > 400 {
            return Err(Error::Numerical(format!("root search stalled near {x} with residual {gx:e}")));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_peak() {
        let m = maximize_scalar(|x| Ok(-(x - 1.0) * (x - 1.0)), -2.0, 3.0, 1e-8).unwrap();
        assert!((m.x - 1.0).abs() < 1e-7);
        assert!(m.bracket_width <= 1e-8);
        assert!(!m.at_boundary);
    }

    #[test]
    fn boundary_peak_is_flagged() {
        let m = maximize_scalar(|x| Ok(x), -2.0, 3.0, 1e-8).unwrap();
        assert!(m.at_boundary);
        assert!((m.x - 3.0).abs() < 1e-7);
    }

    #[test]
    fn scan_escapes_local_maximum() {
        // local peak at -1 (height 1), global at 2 (height 2)
        let f = |x: f64| Ok((-(x + 1.0).powi(2) * 8.0).exp() + 2.0 * (-(x - 2.0).powi(2) * 8.0).exp());
        let m = maximize_scalar(f, -3.0, 3.0, 1e-8).unwrap();
        assert!((m.x - 2.0).abs() < 1e-6);
    }

    #[test]
    fn root_of_cubic() {
        let r = find_root(|x| Ok(x * x * x - 2.0), 0.0, 3.0, 1e-13).unwrap();
        assert!((r.x - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn missing_sign_change() {
        let err = find_root(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::NoSignChange { .. }));
    }
}
