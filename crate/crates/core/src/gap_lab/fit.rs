//! Least-squares fits of decay laws `e(s) = c1 + c2 / s^c3`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// `c1 + c2 / s^c3`
    FreeExponent,
    /// `c1 + c2 / sqrt(s)`
    InvSqrt,
    /// `c1 + c2 / s`
    Inv,
}

impl DecayModel {
    pub fn name(&self) -> &'static str {
        match self {
            DecayModel::FreeExponent => "c1 + c2/s^c3",
            DecayModel::InvSqrt => "c1 + c2/sqrt(s)",
            DecayModel::Inv => "c1 + c2/s",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub model: DecayModel,
    pub c1: f64,
    pub c2: f64,
    /// Only for [`DecayModel::FreeExponent`].
    pub c3: Option<f64>,
    pub rss: f64,
    pub iterations: usize,
}

impl FitResult {
    pub fn predict(&self, s: f64) -> f64 {
        let p = match self.model {
            DecayModel::FreeExponent => self.c3.unwrap_or(1.0),
            DecayModel::InvSqrt => 0.5,
            DecayModel::Inv => 1.0,
        };
        self.c1 + self.c2 * s.powf(-p)
    }
}

fn rss(points: &[(f64, f64)], c: [f64; 3]) -> f64 {
    points.iter().map(|&(s, e)| (c[0] + c[1] * s.powf(-c[2]) - e).powi(2)).sum()
}

/// Ordinary least squares `y = a + b x` in centred form.
fn ols(xy: impl Iterator<Item = (f64, f64)> + Clone) -> Result<(f64, f64)> {
    let n = xy.clone().count() as f64;
    let mx = xy.clone().map(|p| p.0).sum::<f64>() / n;
    let my = xy.clone().map(|p| p.1).sum::<f64>() / n;
    let vxx: f64 = xy.clone().map(|(x, _)| (x - mx).powi(2)).sum();
    let vxy: f64 = xy.clone().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xy.clone().map(|(x, _)| x * x).sum();
    if !(vxx > 1e-24 * sxx) {
        return Err(Error::Singular("normal equations are singular (all abscissae coincide)".into()));
    }
    let b = vxy / vxx;
    Ok((my - b * mx, b))
}

/// Linear least squares for `c1 + c2 s^-p`.
fn linear_fit(points: &[(f64, f64)], p: f64) -> Result<(f64, f64)> {
    ols(points.iter().map(move |&(s, e)| (s.powf(-p), e)))
}

/// Solves the 3x3 system `a x = b` by Gaussian elimination with pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let acc: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - acc) / a[row][row];
    }
    Some(x)
}

/// Levenberg-Marquardt from a starting point; returns parameters and iterations.
fn levenberg_marquardt(points: &[(f64, f64)], mut c: [f64; 3]) -> ([f64; 3], usize) {
    let mut mu = 1e-3;
    let mut cur = rss(points, c);
    let mut iterations = 0;
    for it in 0..2000 {
        iterations = it + 1;
        let mut jtj = [[0.0; 3]; 3];
        let mut grad = [0.0; 3];
        for &(s, e) in points {
            let sp = s.powf(-c[2]);
            let r = c[0] + c[1] * sp - e;
            let j = [1.0, sp, -c[1] * sp * s.ln()];
            for a in 0..3 {
                grad[a] += j[a] * r;
                for b in 0..3 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm <= 1e-12 {
            break;
        }
        let mut improved = false;
        for _ in 0..60 {
            let mut damped = jtj;
            for d in 0..3 {
                damped[d][d] += mu * jtj[d][d].max(1e-300);
            }
            let Some(step) = solve3(damped, [-grad[0], -grad[1], -grad[2]]) else {
                mu *= 10.0;
                continue;
            };
            let trial = [c[0] + step[0], c[1] + step[1], c[2] + step[2]];
            let next = rss(points, trial);
            if next.is_finite() && next < cur {
                let rel = (cur - next) / cur.max(1e-300);
                c = trial;
                cur = next;
                mu = (mu * 0.3).max(1e-15);
                improved = true;
                if rel < 1e-15 {
                    return (c, iterations);
                }
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (c, iterations)
}

/// Fits `model` to `(s, e)` pairs by least squares.
///
/// The free-exponent model starts from log-log regressions of `e - c1` for a
/// few offsets `c1` below `min(e)` and is refined by Levenberg-Marquardt; the
/// best of the refined starts wins.
pub fn fit_decay(points: &[(f64, f64)], model: DecayModel) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(invalid("decay fits need at least 3 points"));
    }
    if points.iter().any(|&(s, e)| !(s > 0.0 && s.is_finite() && e.is_finite())) {
        return Err(invalid("decay fits need positive finite s and finite e"));
    }
    match model {
        DecayModel::InvSqrt | DecayModel::Inv => {
            let p = if model == DecayModel::Inv { 1.0 } else { 0.5 };
            let (c1, c2) = linear_fit(points, p)?;
            Ok(FitResult { model, c1, c2, c3: None, rss: rss(points, [c1, c2, p]), iterations: 1 })
        }
        DecayModel::FreeExponent => {
            let e_min = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            if !(e_min > 0.0) {
                return Err(invalid("the free-exponent fit needs positive e values"));
            }
            let mut best: Option<([f64; 3], usize, f64)> = None;
            for offset in [0.0, 0.5, 0.9, -1.0] {
                let c1 = offset * e_min;
                // ln(e - c1) = ln c2 - c3 ln s
                let (intercept, slope) =
                    ols(points.iter().map(|&(s, e)| (s.ln(), (e - c1).ln()))).unwrap_or((0.0, -1.0));
                let start = [c1, intercept.exp(), -slope];
                let (c, iters) = levenberg_marquardt(points, start);
                let r = rss(points, c);
                if r.is_finite() && best.is_none_or(|b| r < b.2) {
                    best = Some((c, iters, r));
                }
            }
            let (c, iterations, r) =
                best.ok_or_else(|| Error::Numerical("free-exponent fit failed from every start".into()))?;
            Ok(FitResult { model, c1: c[0], c2: c[1], c3: Some(c[2]), rss: r, iterations })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_inverse_law() {
        let pts: Vec<(f64, f64)> = (10..=75).map(|s| (s as f64, 0.5 / s as f64)).collect();
        let f = fit_decay(&pts, DecayModel::Inv).unwrap();
        assert!(f.c1.abs() < 1e-10 && (f.c2 - 0.5).abs() < 1e-10, "{f:?}");
        assert!(f.rss <= 1e-10);
    }

    #[test]
    fn recovers_free_exponent() {
        let pts: Vec<(f64, f64)> = (10..=75).map(|s| (s as f64, 4e-5 + 0.072 * (s as f64).powf(-1.1))).collect();
        let f = fit_decay(&pts, DecayModel::FreeExponent).unwrap();
        assert!((f.c3.unwrap() - 1.1).abs() < 1e-6, "{f:?}");
        assert!((f.c2 - 0.072).abs() < 1e-6 && (f.c1 - 4e-5).abs() < 1e-8, "{f:?}");
        assert!(f.rss <= 1e-10);
    }

    #[test]
    fn inv_sqrt_law() {
        let pts: Vec<(f64, f64)> = (10..=75).map(|s| (s as f64, 0.01 + 0.49 / (s as f64).sqrt())).collect();
        let f = fit_decay(&pts, DecayModel::InvSqrt).unwrap();
        assert!((f.c2 - 0.49).abs() < 1e-10 && (f.c1 - 0.01).abs() < 1e-10);
        assert!((f.predict(20.0) - (0.01 + 0.49 / 20f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_decay(&[(1.0, 1.0), (2.0, 0.5)], DecayModel::Inv).is_err());
        let same = [(5.0, 1.0), (5.0, 2.0), (5.0, 3.0)];
        assert!(matches!(fit_decay(&same, DecayModel::Inv), Err(Error::Singular(_))));
    }
}
