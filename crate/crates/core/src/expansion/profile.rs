use std::fmt;
use std::sync::Arc;

type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Limiting revenue profile `r(x)` of the scaled rates `(r_s(k) - n_s) / q_s`
/// at `x = (k - s) / sqrt(s)`.
///
/// A jump at the origin is allowed; `r(0)` means the right-hand value (the
/// rate at `k = s`). Jumps at other points are not representable.
#[derive(Clone)]
pub enum RevenueProfile {
    /// Cubic polynomial on each side of the origin, coefficients in
    /// increasing degree: `left` applies to `x < 0`, `right` to `x >= 0`.
    Piecewise { left: [f64; 4], right: [f64; 4] },
    /// Arbitrary profile, integrated by quadrature. Must be continuous away
    /// from the origin.
    General { r: ProfileFn, label: String },
}

fn horner(c: &[f64; 4], x: f64) -> f64 {
    ((c[3] * x + c[2]) * x + c[1]) * x + c[0]
}

impl RevenueProfile {
    /// `1{x >= 0}`: the delay probability.
    pub fn delay() -> Self {
        RevenueProfile::Piecewise { left: [0.0; 4], right: [1.0, 0.0, 0.0, 0.0] }
    }

    /// `x 1{x >= 0}`: the scaled queue length.
    pub fn queue() -> Self {
        RevenueProfile::Piecewise { left: [0.0; 4], right: [0.0, 1.0, 0.0, 0.0] }
    }

    /// `-x 1{x < 0}`: the scaled number of idle servers.
    pub fn idle() -> Self {
        RevenueProfile::Piecewise { left: [0.0, -1.0, 0.0, 0.0], right: [0.0; 4] }
    }

    pub fn constant(c: f64) -> Self {
        RevenueProfile::Piecewise { left: [c, 0.0, 0.0, 0.0], right: [c, 0.0, 0.0, 0.0] }
    }

    pub fn general<F>(label: impl Into<String>, r: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        RevenueProfile::General { r: Arc::new(r), label: label.into() }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            RevenueProfile::Piecewise { left, right } => {
                if x < 0.0 {
                    horner(left, x)
                } else {
                    horner(right, x)
                }
            }
            RevenueProfile::General { r, .. } => r(x),
        }
    }

    /// `r(0+)`.
    pub fn at_origin(&self) -> f64 {
        self.eval(0.0)
    }

    /// `r(0-)`.
    pub fn left_limit(&self) -> f64 {
        match self {
            RevenueProfile::Piecewise { left, .. } => left[0],
            RevenueProfile::General { r, .. } => r(-f64::MIN_POSITIVE),
        }
    }
}

impl fmt::Debug for RevenueProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RevenueProfile::Piecewise { left, right } => {
                write!(f, "Piecewise {{ left: {left:?}, right: {right:?} }}")
            }
            RevenueProfile::General { label, .. } => write!(f, "General({label})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_profiles() {
        assert_eq!(RevenueProfile::delay().eval(-0.5), 0.0);
        assert_eq!(RevenueProfile::delay().eval(0.0), 1.0);
        assert_eq!(RevenueProfile::queue().eval(2.5), 2.5);
        assert_eq!(RevenueProfile::idle().eval(-1.5), 1.5);
        assert_eq!(RevenueProfile::idle().eval(1.5), 0.0);
    }

    #[test]
    fn one_sided_limits() {
        let p = RevenueProfile::delay();
        assert_eq!((p.left_limit(), p.at_origin()), (0.0, 1.0));
        let g = RevenueProfile::general("step", |x| if x < 0.0 { 2.0 } else { 3.0 });
        assert_eq!((g.left_limit(), g.at_origin()), (2.0, 3.0));
    }

    #[test]
    fn cubic_evaluation() {
        let p = RevenueProfile::Piecewise { left: [1.0, 2.0, 3.0, 4.0], right: [0.0; 4] };
        assert!((p.eval(-2.0) - (1.0 - 4.0 + 12.0 - 32.0)).abs() < 1e-15);
    }
}
