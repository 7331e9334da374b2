//! Python bindings. Scale factors and real parts are exact: pass `int`,
//! `fractions.Fraction` or a string such as `"3/4"`; floats are rejected.

use std::collections::BTreeMap;

use lcorr::arith::{self, PrincipalCharacter, Rational};
use lcorr::correlation::{self, CovKind, CovarianceSpec, Representation};
use lcorr::mc::{self, LineKind, LinePair, Sampler, SamplingPlan};
use lcorr::special::{self, ComplexPoint, TruncationPolicy};
use lcorr::{cli, gap, identities, Error};
use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBool;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Singularity { .. } | Error::Precision { .. } | Error::Degenerate(_) => {
            PyArithmeticError::new_err(e.to_string())
        }
        Error::Table { ref source, .. } if matches!(**source, Error::Singularity { .. } | Error::Precision { .. }) => {
            PyArithmeticError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    if obj.is_instance_of::<PyBool>() {
        return Err(PyTypeError::new_err("expected an exact rational, got bool"));
    }
    if let Ok(s) = obj.extract::<String>() {
        return s.parse().map_err(to_py);
    }
    if let Ok(n) = obj.extract::<i64>() {
        return Ok(Rational::integer(n));
    }
    if obj.hasattr("numerator")? && obj.hasattr("denominator")? {
        let p: i64 = obj.getattr("numerator")?.extract()?;
        let q: i64 = obj.getattr("denominator")?.extract()?;
        return Rational::new(p, q).map_err(to_py);
    }
    Err(PyTypeError::new_err(
        "expected an exact rational: int, fractions.Fraction or a string like '3/4'",
    ))
}

fn rationals(objs: &Bound<'_, PyAny>) -> PyResult<Vec<Rational>> {
    objs.try_iter()?.map(|o| rational(&o?)).collect()
}

fn kind(s: &str) -> PyResult<CovKind> {
    s.parse().map_err(to_py)
}

fn chi(modulus: i64) -> PyResult<PrincipalCharacter> {
    PrincipalCharacter::new(modulus).map_err(to_py)
}

fn repr_name(r: Representation) -> &'static str {
    match r {
        Representation::Li2PrimeSum => "li2_prime_sum",
        Representation::ContinuedSeries => "continued_series",
    }
}

/// Truncation settings shared by every evaluator.
#[pyclass(name = "TruncationPolicy", frozen, from_py_object)]
#[derive(Clone)]
struct PyPolicy(TruncationPolicy);

#[pymethods]
impl PyPolicy {
    #[new]
    #[pyo3(signature = (prime_limit=1_000_000, term_limit=10_000, abs_tol=1e-10, exclusion_radius=1e-6))]
    fn new(prime_limit: u64, term_limit: u64, abs_tol: f64, exclusion_radius: f64) -> PyResult<Self> {
        let p = TruncationPolicy {
            prime_limit,
            term_limit,
            abs_tol,
            exclusion_radius,
        };
        p.validate().map_err(to_py)?;
        Ok(PyPolicy(p))
    }

    #[getter]
    fn prime_limit(&self) -> u64 {
        self.0.prime_limit
    }
    #[getter]
    fn term_limit(&self) -> u64 {
        self.0.term_limit
    }
    #[getter]
    fn abs_tol(&self) -> f64 {
        self.0.abs_tol
    }
    #[getter]
    fn exclusion_radius(&self) -> f64 {
        self.0.exclusion_radius
    }

    fn __repr__(&self) -> String {
        format!(
            "TruncationPolicy(prime_limit={}, term_limit={}, abs_tol={:e}, exclusion_radius={:e})",
            self.0.prime_limit, self.0.term_limit, self.0.abs_tol, self.0.exclusion_radius
        )
    }
}

fn pol(p: Option<PyPolicy>) -> TruncationPolicy {
    p.map(|p| p.0).unwrap_or_default()
}

#[pyclass(name = "CovValue", frozen, get_all)]
struct PyCovValue {
    value: f64,
    error: f64,
    representation: &'static str,
    resonant: bool,
}

#[pymethods]
impl PyCovValue {
    fn __repr__(&self) -> String {
        format!(
            "CovValue(value={}, error={:e}, representation='{}', resonant={})",
            self.value,
            self.error,
            self.representation,
            if self.resonant { "True" } else { "False" }
        )
    }
}

#[pyclass(name = "CorrelationTable", frozen)]
struct PyTable {
    table: correlation::CorrelationTable,
    sigma: Rational,
}

#[pymethods]
impl PyTable {
    #[getter]
    fn kind(&self) -> String {
        self.table.kind.to_string()
    }
    #[getter]
    fn sigma(&self) -> String {
        self.sigma.to_string()
    }
    #[getter]
    fn modulus(&self) -> u64 {
        self.table.modulus
    }
    #[getter]
    fn alphas(&self) -> Vec<String> {
        self.table.alphas.iter().map(|r| r.to_string()).collect()
    }
    #[getter]
    fn betas(&self) -> Vec<String> {
        self.table.betas.iter().map(|r| r.to_string()).collect()
    }
    /// Row-major correlations; `None` for absent cells.
    #[getter]
    fn values(&self) -> Vec<Vec<Option<f64>>> {
        self.table.values.clone()
    }
    #[getter]
    fn resonant(&self) -> Vec<Vec<bool>> {
        self.table.divis_mask.clone()
    }
    #[getter]
    fn reasons(&self) -> Vec<Vec<Option<String>>> {
        self.table.reasons.clone()
    }
    fn absent_count(&self) -> usize {
        self.table.absent_count()
    }
    fn get(&self, alpha: &Bound<'_, PyAny>, beta: &Bound<'_, PyAny>) -> PyResult<Option<f64>> {
        Ok(self.table.get(rational(alpha)?, rational(beta)?))
    }
    /// Rounded (half-even, 4 decimals) display strings.
    fn display_rows(&self) -> Vec<Vec<String>> {
        self.table.display_rows()
    }
    fn to_csv(&self) -> PyResult<String> {
        let bytes = cli::table_to_csv(&self.table, self.sigma).map_err(|e| PyValueError::new_err(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| PyValueError::new_err(e.to_string()))
    }
    fn __len__(&self) -> usize {
        self.table.alphas.len() * self.table.betas.len()
    }
}

#[pyclass(name = "GapMse", frozen, get_all)]
struct PyGapMse {
    sigma: f64,
    mse_simple: f64,
    mse_expanded: f64,
    rms: f64,
    rms_expanded: f64,
    error_simple: f64,
    error_expanded: f64,
}

impl From<gap::GapMseResult> for PyGapMse {
    fn from(g: gap::GapMseResult) -> Self {
        PyGapMse {
            sigma: g.sigma,
            mse_simple: g.mse_simple,
            mse_expanded: g.mse_expanded,
            rms: g.rms,
            rms_expanded: g.rms_expanded,
            error_simple: g.error_simple,
            error_expanded: g.error_expanded,
        }
    }
}

#[pymethods]
impl PyGapMse {
    #[getter]
    fn abs_diff(&self) -> f64 {
        (self.mse_simple - self.mse_expanded).abs()
    }
    fn __repr__(&self) -> String {
        format!("GapMse(sigma={}, rms={}, rms_expanded={})", self.sigma, self.rms, self.rms_expanded)
    }
}

#[pyclass(name = "IdentityReport", frozen, get_all)]
struct PyIdentityReport {
    name: String,
    parameters: BTreeMap<String, f64>,
    lhs: f64,
    rhs: f64,
    abs_diff: f64,
    tol: f64,
    passed: bool,
}

impl From<identities::IdentityReport> for PyIdentityReport {
    fn from(r: identities::IdentityReport) -> Self {
        PyIdentityReport {
            name: r.name,
            parameters: r.parameters,
            lhs: r.lhs,
            rhs: r.rhs,
            abs_diff: r.abs_diff,
            tol: r.tol,
            passed: r.pass,
        }
    }
}

#[pymethods]
impl PyIdentityReport {
    fn __bool__(&self) -> bool {
        self.passed
    }
    fn __repr__(&self) -> String {
        format!(
            "IdentityReport(name='{}', abs_diff={:e}, tol={:e}, passed={})",
            self.name,
            self.abs_diff,
            self.tol,
            if self.passed { "True" } else { "False" }
        )
    }
}

#[pyclass(name = "ComparisonReport", frozen)]
struct PyComparison(mc::ComparisonReport);

#[pymethods]
impl PyComparison {
    #[getter]
    fn closed_form(&self) -> f64 {
        self.0.closed_form
    }
    #[getter]
    fn raw_moment(&self) -> f64 {
        self.0.estimate.raw_moment
    }
    #[getter]
    fn std_error(&self) -> f64 {
        self.0.estimate.std_error
    }
    #[getter]
    fn z_score(&self) -> Option<f64> {
        self.0.z_score
    }
    #[getter]
    fn n_used(&self) -> usize {
        self.0.estimate.n_used
    }
    #[getter]
    fn flagged(&self) -> usize {
        self.0.estimate.flagged
    }
    #[getter]
    fn rejected(&self) -> usize {
        self.0.estimate.rejected
    }
    #[getter]
    fn mean_z(&self) -> (f64, f64) {
        (self.0.mean_z_x, self.0.mean_z_y)
    }
    #[pyo3(signature = (z_max=3.0))]
    fn within(&self, z_max: f64) -> bool {
        self.0.within(z_max)
    }
    /// Full report as a JSON string.
    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))
    }
    fn __repr__(&self) -> String {
        format!(
            "ComparisonReport(closed_form={}, raw_moment={}, std_error={}, z_score={:?})",
            self.0.closed_form, self.0.estimate.raw_moment, self.0.estimate.std_error, self.0.z_score
        )
    }
}

// ------------------------------------------------------------ arithmetic

#[pyfunction]
fn mobius(n: u64) -> i8 {
    arith::mobius(n)
}

#[pyfunction]
fn primes_up_to(limit: u64) -> Vec<u64> {
    arith::primes_up_to(limit).to_vec()
}

// ------------------------------------------------------------ special functions

#[pyfunction]
#[pyo3(signature = (v, z, policy=None))]
fn polylog(v: f64, z: f64, policy: Option<PyPolicy>) -> PyResult<(f64, f64)> {
    let e = special::polylog(v, z, &pol(policy)).map_err(to_py)?;
    Ok((e.value, e.error))
}

/// `P_χ₀(σ)` and its error bound.
#[pyfunction]
#[pyo3(signature = (sigma, modulus=1, policy=None))]
fn prime_zeta(py: Python<'_>, sigma: &Bound<'_, PyAny>, modulus: i64, policy: Option<PyPolicy>) -> PyResult<(f64, f64)> {
    let s = rational(sigma)?.to_f64();
    let c = chi(modulus)?;
    let p = pol(policy);
    let e = py.detach(|| special::prime_zeta(s, &c, &p)).map_err(to_py)?;
    Ok((e.value, e.error))
}

#[pyfunction]
#[pyo3(signature = (sigma, t=0.0, policy=None))]
fn zeta(sigma: &Bound<'_, PyAny>, t: f64, policy: Option<PyPolicy>) -> PyResult<Complex64> {
    let s = Complex64::new(rational(sigma)?.to_f64(), t);
    Ok(special::zeta_complex(s, &pol(policy)).map_err(to_py)?.value)
}

/// `log |L(σ + it, χ₀)|`; returns `(value, near_zero)`.
#[pyfunction]
#[pyo3(signature = (sigma, t, modulus=1, policy=None))]
fn log_abs_l(sigma: &Bound<'_, PyAny>, t: f64, modulus: i64, policy: Option<PyPolicy>) -> PyResult<(f64, bool)> {
    let pt = ComplexPoint::new(rational(sigma)?.to_f64(), t).map_err(to_py)?;
    let v = special::log_abs_l_line(pt, &chi(modulus)?, &pol(policy)).map_err(to_py)?;
    Ok((v.value, v.near_zero))
}

// ------------------------------------------------------------ correlation

fn spec(kind_: &str, alpha: &Bound<'_, PyAny>, beta: &Bound<'_, PyAny>, sigma: &Bound<'_, PyAny>, modulus: i64) -> PyResult<CovarianceSpec> {
    CovarianceSpec::new(kind(kind_)?, rational(alpha)?, rational(beta)?, rational(sigma)?.to_f64(), chi(modulus)?)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (kind, alpha, beta, sigma, modulus=1, policy=None))]
fn cov(
    kind: &str,
    alpha: &Bound<'_, PyAny>,
    beta: &Bound<'_, PyAny>,
    sigma: &Bound<'_, PyAny>,
    modulus: i64,
    policy: Option<PyPolicy>,
) -> PyResult<PyCovValue> {
    let c = correlation::cov(&spec(kind, alpha, beta, sigma, modulus)?, &pol(policy)).map_err(to_py)?;
    Ok(PyCovValue {
        value: c.value,
        error: c.error,
        representation: repr_name(c.representation),
        resonant: c.resonant,
    })
}

#[pyfunction]
#[pyo3(signature = (kind, alpha, beta, sigma, modulus=1, policy=None))]
fn corr(
    kind: &str,
    alpha: &Bound<'_, PyAny>,
    beta: &Bound<'_, PyAny>,
    sigma: &Bound<'_, PyAny>,
    modulus: i64,
    policy: Option<PyPolicy>,
) -> PyResult<f64> {
    correlation::corr(&spec(kind, alpha, beta, sigma, modulus)?, &pol(policy)).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (kind, alpha, beta, sigma, modulus=1))]
fn corr_asymptotic(
    kind: &str,
    alpha: &Bound<'_, PyAny>,
    beta: &Bound<'_, PyAny>,
    sigma: &Bound<'_, PyAny>,
    modulus: i64,
) -> PyResult<f64> {
    Ok(correlation::corr_asymptotic(&spec(kind, alpha, beta, sigma, modulus)?))
}

#[pyfunction]
#[pyo3(signature = (kind, alphas, betas, sigma, modulus=1, policy=None))]
fn build_table(
    py: Python<'_>,
    kind: &str,
    alphas: &Bound<'_, PyAny>,
    betas: &Bound<'_, PyAny>,
    sigma: &Bound<'_, PyAny>,
    modulus: i64,
    policy: Option<PyPolicy>,
) -> PyResult<PyTable> {
    let k = self::kind(kind)?;
    let (a, b, s) = (rationals(alphas)?, rationals(betas)?, rational(sigma)?);
    let c = chi(modulus)?;
    let p = pol(policy);
    let table = py
        .detach(|| correlation::build_table(k, &a, &b, s.to_f64(), &c, &p))
        .map_err(to_py)?;
    Ok(PyTable { table, sigma: s })
}

// ------------------------------------------------------------ gap

#[pyfunction]
#[pyo3(signature = (sigma, modulus=1, policy=None))]
fn gap_mse(py: Python<'_>, sigma: &Bound<'_, PyAny>, modulus: i64, policy: Option<PyPolicy>) -> PyResult<PyGapMse> {
    let s = rational(sigma)?.to_f64();
    let c = chi(modulus)?;
    let p = pol(policy);
    Ok(py.detach(|| gap::gap_mse(s, &c, &p)).map_err(to_py)?.into())
}

/// One entry per grid point; `None` where the point is outside the domain.
#[pyfunction]
#[pyo3(signature = (sigmas, modulus=1, policy=None))]
fn rms_curve(py: Python<'_>, sigmas: &Bound<'_, PyAny>, modulus: i64, policy: Option<PyPolicy>) -> PyResult<Vec<Option<PyGapMse>>> {
    let grid: Vec<f64> = rationals(sigmas)?.iter().map(|r| r.to_f64()).collect();
    let c = chi(modulus)?;
    let p = pol(policy);
    let out = py.detach(|| gap::rms_curve(&grid, &c, &p));
    Ok(out.into_iter().map(|r| r.ok().map(PyGapMse::from)).collect())
}

// ------------------------------------------------------------ identities

/// Even and odd non-divisor polylogarithm identities at `(v, x)`.
#[pyfunction]
#[pyo3(signature = (v, x, tol=1e-7, policy=None))]
fn nondivisor_checks(v: f64, x: f64, tol: f64, policy: Option<PyPolicy>) -> PyResult<(PyIdentityReport, PyIdentityReport)> {
    let p = pol(policy);
    let even = identities::even_nondivisor_check(v, x, tol, &p).map_err(to_py)?;
    let odd = identities::odd_nondivisor_check(v, x, tol, &p).map_err(to_py)?;
    Ok((even.into(), odd.into()))
}

#[pyfunction]
#[pyo3(signature = (v, x, tol=1e-10, policy=None))]
fn parity_partition(v: f64, x: f64, tol: f64, policy: Option<PyPolicy>) -> PyResult<PyIdentityReport> {
    Ok(identities::parity_partition_check(v, x, tol, &pol(policy)).map_err(to_py)?.into())
}

#[pyfunction]
#[pyo3(signature = (sigma, modulus=1, tol=1e-8, policy=None))]
fn variance_symmetry(sigma: &Bound<'_, PyAny>, modulus: i64, tol: f64, policy: Option<PyPolicy>) -> PyResult<PyIdentityReport> {
    let s = rational(sigma)?.to_f64();
    Ok(identities::squarefree_variance_symmetry(s, &chi(modulus)?, tol, &pol(policy))
        .map_err(to_py)?
        .into())
}

#[pyfunction]
#[pyo3(signature = (n, sigma, modulus, p, tol=1e-10, policy=None))]
fn character_difference(
    n: u64,
    sigma: &Bound<'_, PyAny>,
    modulus: i64,
    p: u64,
    tol: f64,
    policy: Option<PyPolicy>,
) -> PyResult<PyIdentityReport> {
    let s = rational(sigma)?.to_f64();
    Ok(identities::character_difference(n, s, modulus, p, tol, &pol(policy)).map_err(to_py)?.into())
}

/// Integral and derivative order-shift checks.
#[pyfunction]
#[pyo3(signature = (v, x, alpha, int_tol=1e-8, deriv_tol=1e-6, policy=None))]
fn polylog_order_shift(
    v: f64,
    x: f64,
    alpha: u64,
    int_tol: f64,
    deriv_tol: f64,
    policy: Option<PyPolicy>,
) -> PyResult<(PyIdentityReport, PyIdentityReport)> {
    let r = identities::polylog_order_shift_check(v, x, alpha, int_tol, deriv_tol, &pol(policy)).map_err(to_py)?;
    Ok((r.integral.into(), r.derivative.into()))
}

// ------------------------------------------------------------ Monte Carlo

fn plan(samples: usize, span: f64, start: f64, seed: u64, stratified: bool) -> SamplingPlan {
    SamplingPlan {
        t_start: start,
        t_span: span,
        n_samples: samples,
        seed,
        sampler: if stratified { Sampler::Stratified } else { Sampler::IidUniform },
        ..Default::default()
    }
}

/// Sample `log|L|` on two lines and compare `E[XY]` with the closed-form covariance.
#[pyfunction]
#[pyo3(signature = (kind, alpha, beta, sigma, modulus=1, samples=20_000, span=1e5, start=1e3, seed=0, stratified=false, policy=None))]
#[allow(clippy::too_many_arguments)]
fn verify_log_l_covariance(
    py: Python<'_>,
    kind: &str,
    alpha: &Bound<'_, PyAny>,
    beta: &Bound<'_, PyAny>,
    sigma: &Bound<'_, PyAny>,
    modulus: i64,
    samples: usize,
    span: f64,
    start: f64,
    seed: u64,
    stratified: bool,
    policy: Option<PyPolicy>,
) -> PyResult<PyComparison> {
    let sp = spec(kind, alpha, beta, sigma, modulus)?;
    let pl = plan(samples, span, start, seed, stratified);
    let p = pol(policy);
    Ok(PyComparison(
        py.detach(|| mc::verify_log_l_covariance(&sp, &pl, &p)).map_err(to_py)?,
    ))
}

/// Sample truncated `Re P` on two lines and compare with `½ P(σ+σ′)` or 0.
#[pyfunction]
#[pyo3(signature = (kind, alpha, beta, sigma, sigma2=None, modulus=1, samples=20_000, span=1e5, start=1e3, seed=0, stratified=false, policy=None))]
#[allow(clippy::too_many_arguments)]
fn verify_prime_l_covariance(
    py: Python<'_>,
    kind: &str,
    alpha: &Bound<'_, PyAny>,
    beta: &Bound<'_, PyAny>,
    sigma: &Bound<'_, PyAny>,
    sigma2: Option<&Bound<'_, PyAny>>,
    modulus: i64,
    samples: usize,
    span: f64,
    start: f64,
    seed: u64,
    stratified: bool,
    policy: Option<PyPolicy>,
) -> PyResult<PyComparison> {
    let sp = spec(kind, alpha, beta, sigma, modulus)?;
    let s2 = match sigma2 {
        Some(s) => rational(s)?.to_f64(),
        None => sp.sigma,
    };
    let pair = LinePair::from_spec(&sp).with_sigma2(s2);
    let pl = plan(samples, span, start, seed, stratified);
    let p = pol(policy);
    Ok(PyComparison(
        py.detach(|| mc::verify_prime_l_covariance(&pair, &pl, &p)).map_err(to_py)?,
    ))
}

/// Raw streams of one line pair: `(xs, ys)`.
#[pyfunction]
#[pyo3(signature = (line, kind, alpha, beta, sigma, modulus=1, samples=1000, span=1e5, start=1e3, seed=0, policy=None))]
#[allow(clippy::too_many_arguments)]
fn sample_lines(
    py: Python<'_>,
    line: &str,
    kind: &str,
    alpha: &Bound<'_, PyAny>,
    beta: &Bound<'_, PyAny>,
    sigma: &Bound<'_, PyAny>,
    modulus: i64,
    samples: usize,
    span: f64,
    start: f64,
    seed: u64,
    policy: Option<PyPolicy>,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let lk = match line {
        "logL" => LineKind::LogL,
        "reP" => LineKind::ReP,
        _ => return Err(PyValueError::new_err(format!("line must be 'logL' or 'reP', got '{line}'"))),
    };
    let pair = LinePair::from_spec(&spec(kind, alpha, beta, sigma, modulus)?);
    let pl = plan(samples, span, start, seed, false);
    let p = pol(policy);
    let s = py.detach(|| mc::sample_line(lk, &pair, &pl, &p)).map_err(to_py)?;
    Ok((s.xs, s.ys))
}

#[pymodule]
#[pyo3(name = "lcorr")]
fn lcorr_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPolicy>()?;
    m.add_class::<PyCovValue>()?;
    m.add_class::<PyTable>()?;
    m.add_class::<PyGapMse>()?;
    m.add_class::<PyIdentityReport>()?;
    m.add_class::<PyComparison>()?;
    m.add_function(wrap_pyfunction!(mobius, m)?)?;
    m.add_function(wrap_pyfunction!(primes_up_to, m)?)?;
    m.add_function(wrap_pyfunction!(polylog, m)?)?;
    m.add_function(wrap_pyfunction!(prime_zeta, m)?)?;
    m.add_function(wrap_pyfunction!(zeta, m)?)?;
    m.add_function(wrap_pyfunction!(log_abs_l, m)?)?;
    m.add_function(wrap_pyfunction!(cov, m)?)?;
    m.add_function(wrap_pyfunction!(corr, m)?)?;
    m.add_function(wrap_pyfunction!(corr_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(build_table, m)?)?;
    m.add_function(wrap_pyfunction!(gap_mse, m)?)?;
    m.add_function(wrap_pyfunction!(rms_curve, m)?)?;
    m.add_function(wrap_pyfunction!(nondivisor_checks, m)?)?;
    m.add_function(wrap_pyfunction!(parity_partition, m)?)?;
    m.add_function(wrap_pyfunction!(variance_symmetry, m)?)?;
    m.add_function(wrap_pyfunction!(character_difference, m)?)?;
    m.add_function(wrap_pyfunction!(polylog_order_shift, m)?)?;
    m.add_function(wrap_pyfunction!(verify_log_l_covariance, m)?)?;
    m.add_function(wrap_pyfunction!(verify_prime_l_covariance, m)?)?;
    m.add_function(wrap_pyfunction!(sample_lines, m)?)?;
    m.add("DOMAIN_THRESHOLD", identities::nondivisor_domain_threshold())?;
    Ok(())
}
