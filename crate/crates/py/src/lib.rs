//! Python bindings: `import qed_dim`.
//!
//! Input errors raise `ValueError`; numerical failures (no sign change,
//! divergence, non-convergence, instability) raise `qed_dim.NumericalError`.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qed_core::dimensioning::{self as dim, DelayObjective, GammaInterval};
use qed_core::expansion;
use qed_core::gap_lab::{self, DecayModel, SweepParams, GAP_COLUMNS};
use qed_core::markov::{self, AdmissionPolicy, JoinSequence, RevenueStructure, ScaledProfile, SystemConfig};
use qed_core::sim::{self, SimConfig};

create_exception!(qed_dim, NumericalError, PyRuntimeError);

fn py_err(e: qed_core::Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        NumericalError::new_err(e.to_string())
    }
}

trait OrRaise<T> {
    fn or_raise(self) -> PyResult<T>;
}

impl<T> OrRaise<T> for qed_core::Result<T> {
    fn or_raise(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn interval(bounds: (f64, f64)) -> PyResult<GammaInterval> {
    GammaInterval::new(bounds.0, bounds.1).or_raise()
}

/// Admission control. Build with one of the static constructors.
#[pyclass(frozen, from_py_object, module = "qed_dim")]
#[derive(Clone)]
struct Policy {
    inner: AdmissionPolicy,
}

#[pymethods]
impl Policy {
    /// Scaled threshold: at most floor(eta * sqrt(s)) customers wait. `eta = inf` admits everyone.
    #[staticmethod]
    fn threshold(eta: f64) -> PyResult<Self> {
        Ok(Self { inner: AdmissionPolicy::threshold(eta).or_raise()? })
    }

    /// Scaled profile f(x) = exp(-rate x).
    #[staticmethod]
    fn exponential(rate: f64) -> PyResult<Self> {
        Ok(Self { inner: AdmissionPolicy::Profile(ScaledProfile::exponential(rate).or_raise()?) })
    }

    /// Every arrival joins (M/M/s).
    #[staticmethod]
    fn always() -> Self {
        Self { inner: AdmissionPolicy::Exact(JoinSequence::always()) }
    }

    /// No waiting room (Erlang loss).
    #[staticmethod]
    fn loss() -> Self {
        Self { inner: AdmissionPolicy::Exact(JoinSequence::never()) }
    }

    /// Constant join probability p.
    #[staticmethod]
    fn constant(p: f64) -> PyResult<Self> {
        Ok(Self { inner: AdmissionPolicy::Exact(JoinSequence::constant(p).or_raise()?) })
    }

    /// Abandonment-equivalent sequence p(i) = 1 / (1 + (i + 1) theta / s).
    #[staticmethod]
    fn abandonment(theta: f64, s: u64) -> PyResult<Self> {
        Ok(Self { inner: AdmissionPolicy::Exact(JoinSequence::abandonment(theta, s).or_raise()?) })
    }

    /// Exact threshold with `k` waiting places.
    #[staticmethod]
    fn fixed_threshold(k: usize) -> Self {
        Self { inner: AdmissionPolicy::Exact(JoinSequence::threshold(k)) }
    }

    #[getter]
    fn is_scaled(&self) -> bool {
        self.inner.is_scaled()
    }

    /// Join probability after `waiting` customers at system size `s`.
    fn join_probability(&self, s: u64, waiting: usize) -> f64 {
        self.inner.join_sequence(s).p(waiting)
    }

    fn __repr__(&self) -> String {
        format!("Policy({})", self.inner.describe())
    }
}

/// Fee `a`, waiting cost `b` and rejection penalty `d`.
#[pyclass(frozen, get_all, from_py_object, module = "qed_dim")]
#[derive(Clone, Copy)]
struct Economic {
    a: f64,
    b: f64,
    d: f64,
}

impl Economic {
    fn core(&self) -> markov::Economic {
        markov::Economic { a: self.a, b: self.b, d: self.d }
    }
}

#[pymethods]
impl Economic {
    #[new]
    #[pyo3(signature = (a=0.1, b=1.0, d=0.0))]
    fn new(a: f64, b: f64, d: f64) -> PyResult<Self> {
        markov::Economic::new(a, b, d).or_raise()?;
        Ok(Self { a, b, d })
    }

    /// Normalised economics with a/(a+d) = r1 and (a+d)/b = r2.
    #[staticmethod]
    fn from_ratios(r1: f64, r2: f64) -> PyResult<Self> {
        let e = markov::Economic::from_ratios(r1, r2).or_raise()?;
        Ok(Self { a: e.a, b: e.b, d: e.d })
    }

    fn __repr__(&self) -> String {
        format!("Economic(a={}, b={}, d={})", self.a, self.b, self.d)
    }
}

/// Stationary performance of a finite system.
#[pyclass(frozen, get_all, module = "qed_dim")]
struct Metrics {
    delay_prob: f64,
    rejection_prob: f64,
    mean_queue: f64,
    mean_idle: f64,
    expected_wait: f64,
    rhat: Option<f64>,
}

#[pymethods]
impl Metrics {
    fn __repr__(&self) -> String {
        let rhat = self.rhat.map_or("None".to_string(), |r| r.to_string());
        format!(
            "Metrics(delay_prob={}, rejection_prob={}, mean_queue={}, mean_idle={}, expected_wait={}, rhat={rhat})",
            self.delay_prob, self.rejection_prob, self.mean_queue, self.mean_idle, self.expected_wait
        )
    }
}

/// A system of `s` servers offered `lambda = s - gamma sqrt(s)`.
#[pyclass(frozen, module = "qed_dim")]
struct System {
    inner: SystemConfig,
}

#[pymethods]
impl System {
    #[new]
    #[pyo3(signature = (s, gamma, policy=None))]
    fn new(s: u64, gamma: f64, policy: Option<Policy>) -> PyResult<Self> {
        let pol = policy.map_or(AdmissionPolicy::Threshold { eta: f64::INFINITY }, |p| p.inner);
        Ok(Self { inner: SystemConfig::new(s, gamma, pol).or_raise()? })
    }

    #[getter]
    fn s(&self) -> u64 {
        self.inner.s
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn arrival_rate(&self) -> f64 {
        self.inner.lambda()
    }

    /// Stationary probabilities of 0, 1, ... customers (truncated past a certified tail).
    fn stationary(&self) -> PyResult<Vec<f64>> {
        Ok(markov::stationary_distribution(&self.inner).or_raise()?.probs)
    }

    /// Delay, rejection, queue, idle and waiting metrics; `rhat` is filled when `econ` is given.
    #[pyo3(signature = (econ=None))]
    fn metrics(&self, econ: Option<Economic>) -> PyResult<Metrics> {
        let m = markov::performance_metrics(&self.inner, &RevenueStructure::exact(|_| 0.0)).or_raise()?;
        let rhat = econ.map(|e| markov::revenue_rate_hat(&self.inner, &e.core())).transpose().or_raise()?;
        Ok(Metrics {
            delay_prob: m.delay_prob,
            rejection_prob: m.rejection_prob,
            mean_queue: m.mean_queue,
            mean_idle: m.mean_idle,
            expected_wait: m.expected_wait,
            rhat,
        })
    }

    /// Centred and scaled revenue rate.
    fn rhat(&self, econ: Economic) -> PyResult<f64> {
        markov::revenue_rate_hat(&self.inner, &econ.core()).or_raise()
    }

    /// Monte Carlo estimates with 99% batch-means half-widths, keyed by metric name.
    #[pyo3(signature = (seed=0, events=2_000_000, warmup=100_000, batches=20))]
    fn simulate<'py>(
        &self,
        py: Python<'py>,
        seed: u64,
        events: u64,
        warmup: u64,
        batches: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let cfg = SimConfig { horizon_events: events, warmup_events: warmup, batches, ..SimConfig::new(self.inner.clone(), seed) };
        let est = py.detach(|| sim::simulate(&cfg)).or_raise()?;
        let out = PyDict::new(py);
        for (k, m) in [
            ("delay_prob", est.delay_prob),
            ("rejection_prob", est.rejection_prob),
            ("mean_queue", est.mean_queue),
            ("mean_idle", est.mean_idle),
            ("expected_wait", est.expected_wait),
        ] {
            out.set_item(k, (m.mean, m.halfwidth_99))?;
        }
        out.set_item("simulated_time", est.simulated_time)?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!("System(s={}, gamma={}, {})", self.inner.s, self.inner.gamma, self.inner.policy.describe())
    }
}

fn scaled(policy: &Policy) -> PyResult<&AdmissionPolicy> {
    if policy.inner.is_scaled() {
        Ok(&policy.inner)
    } else {
        Err(PyValueError::new_err(format!("{} has no scaled limit", policy.inner.describe())))
    }
}

/// Order-0 and order-1 coefficients of the economic objective and its building blocks.
#[pyfunction]
fn expansion_coeffs<'py>(py: Python<'py>, econ: Economic, policy: Policy, gamma: f64) -> PyResult<Bound<'py, PyDict>> {
    let pol = scaled(&policy)?;
    let c = expansion::expansion_coeffs(&econ.core().profile(gamma), pol, gamma).or_raise()?;
    let out = PyDict::new(py);
    for (k, v) in [
        ("r0", c.r0),
        ("r1", c.r1),
        ("w0l", c.w0l),
        ("w1l", c.w1l),
        ("w0r", c.w0r),
        ("w1r", c.w1r),
        ("b0", c.b0),
        ("b1", c.b1),
        ("f0", c.f0),
        ("f1", c.f1),
    ] {
        out.set_item(k, v)?;
    }
    out.set_item("delay", expansion::delay_coeffs(gamma, pol).or_raise()?)?;
    out.set_item("queue", expansion::queue_coeffs(gamma, pol).or_raise()?)?;
    out.set_item("idle", expansion::idle_coeffs(gamma, pol).or_raise()?)?;
    Ok(out)
}

/// Result of a one-dimensional slack optimisation.
#[pyclass(frozen, get_all, module = "qed_dim")]
struct Optimum {
    gamma: f64,
    value: f64,
    iterations: usize,
    bracket_width: f64,
    at_boundary: bool,
}

#[pymethods]
impl Optimum {
    fn __repr__(&self) -> String {
        format!("Optimum(gamma={}, value={}, at_boundary={})", self.gamma, self.value, self.at_boundary)
    }
}

impl From<dim::OptimResult> for Optimum {
    fn from(r: dim::OptimResult) -> Self {
        Self {
            gamma: r.gamma_star,
            value: r.value,
            iterations: r.iterations,
            bracket_width: r.bracket_width,
            at_boundary: r.at_boundary,
        }
    }
}

/// Maximises the revenue objective over `bounds`.
///
/// `order` is "exact" (needs `s`), "0" or "1" (needs `s`).
#[pyfunction]
#[pyo3(signature = (econ, policy, order="exact", s=None, bounds=(-2.0, 3.0)))]
fn optimize(py: Python<'_>, econ: Economic, policy: Policy, order: &str, s: Option<u64>, bounds: (f64, f64)) -> PyResult<Optimum> {
    let iv = interval(bounds)?;
    let e = econ.core();
    let need_s = || s.ok_or_else(|| PyValueError::new_err(format!("order '{order}' requires s")));
    let r = match order {
        "exact" => {
            let s = need_s()?;
            py.detach(|| dim::maximize_exact(s, &e, &policy.inner, &iv))
        }
        "0" => dim::maximize_asymptotic(0, None, &e, scaled(&policy)?, &iv),
        "1" => dim::maximize_asymptotic(1, Some(need_s()?), &e, scaled(&policy)?, &iv),
        _ => return Err(PyValueError::new_err(format!("unknown order '{order}' (exact, 0 or 1)"))),
    };
    Ok(r.or_raise()?.into())
}

/// Slack at which the delay probability equals `epsilon`.
///
/// `order` is "exact" (needs `s`), "0", "1" (needs `s`) or "refined" (needs `s`).
#[pyfunction]
#[pyo3(signature = (epsilon, policy, order="exact", s=None, bounds=(-2.0, 3.0), n_max=3))]
fn delay_staffing(
    epsilon: f64,
    policy: Policy,
    order: &str,
    s: Option<u64>,
    bounds: (f64, f64),
    n_max: usize,
) -> PyResult<f64> {
    let iv = interval(bounds)?;
    let need_s = || s.ok_or_else(|| PyValueError::new_err(format!("order '{order}' requires s")));
    let (objective, pol) = match order {
        "exact" => (DelayObjective::Exact { s: need_s()? }, &policy.inner),
        "0" => (DelayObjective::Order0, scaled(&policy)?),
        "1" => (DelayObjective::Order1 { s: need_s()? }, scaled(&policy)?),
        "refined" => {
            return Ok(dim::refined_gamma(epsilon, need_s()?, scaled(&policy)?, n_max, &iv).or_raise()?.gamma);
        }
        _ => return Err(PyValueError::new_err(format!("unknown order '{order}' (exact, 0, 1 or refined)"))),
    };
    Ok(dim::delay_staffing(epsilon, objective, pol, &iv).or_raise()?.gamma)
}

/// Joint slack/threshold optimum compared with the best slack at eta = inf.
#[pyclass(frozen, get_all, module = "qed_dim")]
struct JointResult {
    gamma: f64,
    eta: f64,
    value: f64,
    at_boundary: bool,
    gamma_inf: f64,
    value_inf: f64,
    gamma_ratio: f64,
    pct_improvement: f64,
}

#[pymethods]
impl JointResult {
    fn __repr__(&self) -> String {
        format!(
            "JointResult(gamma={}, eta={}, value={}, pct_improvement={})",
            self.gamma, self.eta, self.value, self.pct_improvement
        )
    }
}

#[pyfunction]
#[pyo3(signature = (econ, gamma_bounds=(-5.0, 5.0), eta_bounds=(0.0, 20.0)))]
fn joint_optimum(econ: Economic, gamma_bounds: (f64, f64), eta_bounds: (f64, f64)) -> PyResult<JointResult> {
    let r = dim::joint_improvement(&econ.core(), &interval(gamma_bounds)?, &interval(eta_bounds)?).or_raise()?;
    Ok(JointResult {
        gamma: r.joint.gamma,
        eta: r.joint.eta,
        value: r.joint.value,
        at_boundary: r.joint.at_boundary,
        gamma_inf: r.gamma_inf,
        value_inf: r.value_inf,
        gamma_ratio: r.gamma_ratio,
        pct_improvement: r.pct_improvement,
    })
}

/// Optimality gaps for s in `s_values`, returned as a dict of equal-length columns.
#[pyfunction]
#[pyo3(signature = (s_values=None, econ=None, eta=2.0, gamma_eval=None, bounds=None, threads=None))]
fn gap_sweep<'py>(
    py: Python<'py>,
    s_values: Option<Vec<u64>>,
    econ: Option<Economic>,
    eta: f64,
    gamma_eval: Option<f64>,
    bounds: Option<(f64, f64)>,
    threads: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let defaults = SweepParams::default();
    let params = SweepParams {
        econ: econ.map_or(defaults.econ, |e| e.core()),
        eta,
        gamma_eval: gamma_eval.unwrap_or(defaults.gamma_eval),
        s_values: s_values.unwrap_or(defaults.s_values),
        interval: bounds.map(interval).transpose()?.unwrap_or(defaults.interval),
    };
    let report = py.detach(|| gap_lab::with_threads(threads, || gap_lab::gap_sweep(&params))).or_raise()?.or_raise()?;
    let out = PyDict::new(py);
    for (i, name) in GAP_COLUMNS.iter().enumerate() {
        let col: Vec<f64> = report.rows.iter().map(|r| r.values()[i]).collect();
        out.set_item(*name, col)?;
    }
    out.set_item("gamma_0", report.gamma_0)?;
    Ok(out)
}

/// Least-squares decay law fit.
#[pyclass(frozen, module = "qed_dim")]
struct Fit {
    inner: gap_lab::FitResult,
}

#[pymethods]
impl Fit {
    #[getter]
    fn model(&self) -> &'static str {
        self.inner.model.name()
    }

    #[getter]
    fn c1(&self) -> f64 {
        self.inner.c1
    }

    #[getter]
    fn c2(&self) -> f64 {
        self.inner.c2
    }

    #[getter]
    fn c3(&self) -> Option<f64> {
        self.inner.c3
    }

    #[getter]
    fn rss(&self) -> f64 {
        self.inner.rss
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    fn predict(&self, s: f64) -> f64 {
        self.inner.predict(s)
    }

    fn __repr__(&self) -> String {
        let f = &self.inner;
        let c3 = f.c3.map_or("None".to_string(), |c| c.to_string());
        format!("Fit({}: c1={}, c2={}, c3={c3}, rss={})", f.model.name(), f.c1, f.c2, f.rss)
    }
}

/// Fits y(s) to `model`: "free_exponent" (c1 + c2/s^c3), "inv_sqrt" (c1 + c2/sqrt(s)) or "inv" (c1 + c2/s).
#[pyfunction]
#[pyo3(signature = (s, y, model="free_exponent"))]
fn fit_decay(s: Vec<f64>, y: Vec<f64>, model: &str) -> PyResult<Fit> {
    if s.len() != y.len() {
        return Err(PyValueError::new_err("s and y must have equal length"));
    }
    let m = match model {
        "free_exponent" => DecayModel::FreeExponent,
        "inv_sqrt" => DecayModel::InvSqrt,
        "inv" => DecayModel::Inv,
        _ => return Err(PyValueError::new_err(format!("unknown model '{model}'"))),
    };
    let pts: Vec<(f64, f64)> = s.into_iter().zip(y).collect();
    Ok(Fit { inner: gap_lab::fit_decay(&pts, m).or_raise()? })
}

/// Erlang B blocking probability for `s` servers at per-server load `rho` (offered load `s rho`).
#[pyfunction]
fn erlang_b(s: u64, rho: f64) -> PyResult<f64> {
    markov::erlang_b(s, rho).or_raise()
}

/// Mills ratio of the standard normal, (1 - Phi(x)) / phi(x).
#[pyfunction]
fn mills_ratio(x: f64) -> f64 {
    qed_core::mills_ratio(x)
}

/// Maximum number waiting under the scaled threshold at size s.
#[pyfunction]
fn threshold_level(eta: f64, s: u64) -> usize {
    markov::threshold_level(eta, s)
}

#[pymodule]
fn qed_dim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<Policy>()?;
    m.add_class::<Economic>()?;
    m.add_class::<System>()?;
    m.add_class::<Metrics>()?;
    m.add_class::<Optimum>()?;
    m.add_class::<JointResult>()?;
    m.add_class::<Fit>()?;
    m.add_function(wrap_pyfunction!(expansion_coeffs, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(delay_staffing, m)?)?;
    m.add_function(wrap_pyfunction!(joint_optimum, m)?)?;
    m.add_function(wrap_pyfunction!(gap_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(fit_decay, m)?)?;
    m.add_function(wrap_pyfunction!(erlang_b, m)?)?;
    m.add_function(wrap_pyfunction!(mills_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_level, m)?)?;
    Ok(())
}
