//! Certified evaluation of the polylogarithm, prime zeta / prime-L functions,
//! the Riemann zeta function on `Re(s) > 0` and `log |L(s, χ₀)|`.
//!
//! Every evaluator returns an [`Estimate`]: the value together with a bound on
//! the discarded series tail. Rounding error is not part of the bound.

use std::f64::consts::{LN_2, PI};
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{mobius, primes_up_to, PrincipalCharacter};
use crate::error::{Error, Result};

/// Truncation knobs shared by every series evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Cutoff P for explicit prime sums.
    pub prime_limit: u64,
    /// Cap K on k-indexed series.
    pub term_limit: u64,
    /// Target bound on the discarded tail.
    pub abs_tol: f64,
    /// Inputs closer than this to a pole are rejected.
    pub exclusion_radius: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            prime_limit: 1_000_000,
            term_limit: 10_000,
            abs_tol: 1e-10,
            exclusion_radius: 1e-6,
        }
    }
}

impl TruncationPolicy {
    pub fn new(prime_limit: u64, term_limit: u64, abs_tol: f64) -> Result<Self> {
        let p = TruncationPolicy {
            prime_limit,
            term_limit,
            abs_tol,
            ..Default::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::Domain(format!("abs_tol must be positive, got {}", self.abs_tol)));
        }
        if self.prime_limit < 2 {
            return Err(Error::Domain("prime_limit must be at least 2".into()));
        }
        if self.term_limit < 1 {
            return Err(Error::Domain("term_limit must be at least 1".into()));
        }
        if !(self.exclusion_radius >= 0.0) {
            return Err(Error::Domain("exclusion_radius must be non-negative".into()));
        }
        Ok(())
    }

    /// Same policy with a different tail tolerance.
    pub fn with_tol(&self, abs_tol: f64) -> Self {
        TruncationPolicy { abs_tol, ..*self }
    }

    pub fn with_limits(&self, prime_limit: u64, term_limit: u64) -> Self {
        TruncationPolicy {
            prime_limit,
            term_limit,
            ..*self
        }
    }

    fn precision(&self, what: impl Into<String>, bound: f64) -> Error {
        Error::Precision {
            what: what.into(),
            bound,
            tol: self.abs_tol,
        }
    }
}

/// A point σ + it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub sigma: f64,
    pub t: f64,
}

impl ComplexPoint {
    pub fn new(sigma: f64, t: f64) -> Result<Self> {
        if !sigma.is_finite() || !t.is_finite() {
            return Err(Error::Domain("point components must be finite".into()));
        }
        Ok(ComplexPoint { sigma, t })
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.sigma, self.t)
    }
}

/// A value with a certified bound on the truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate { value: 0.0, error: 0.0 };

    pub fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0 }
    }

    pub fn new(value: f64, error: f64) -> Self {
        Estimate { value, error }
    }
}

impl Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate::new(self.value + o.value, self.error + o.error)
    }
}

impl Sub for Estimate {
    type Output = Estimate;
    fn sub(self, o: Estimate) -> Estimate {
        Estimate::new(self.value - o.value, self.error + o.error)
    }
}

impl Mul<f64> for Estimate {
    type Output = Estimate;
    fn mul(self, c: f64) -> Estimate {
        Estimate::new(self.value * c, self.error * c.abs())
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Upper bound on `Σ_{n ≥ n0} n^a q^n` for `0 < q < 1`, or `None` when the
/// ratio of consecutive terms is not yet below one at `n0`.
pub fn power_geometric_tail(a: f64, q: f64, n0: f64) -> Option<f64> {
    if q <= 0.0 {
        return Some(0.0);
    }
    debug_assert!(q < 1.0 && n0 >= 1.0);
    let ratio = if a <= 0.0 { q } else { ((n0 + 1.0) / n0).powf(a) * q };
    if ratio >= 1.0 {
        return None;
    }
    let log_first = a * n0.ln() + n0 * q.ln();
    Some(log_first.exp() / (1.0 - ratio))
}

// ---------------------------------------------------------------------------
// Polylogarithm
// ---------------------------------------------------------------------------

/// `Li_v(z) = Σ_{k≥1} z^k / k^v` for real order `v` and `0 ≤ z < 1`.
pub fn polylog(v: f64, z: f64, policy: &TruncationPolicy) -> Result<Estimate> {
    if !v.is_finite() {
        return Err(Error::Domain(format!("polylog order must be finite, got {v}")));
    }
    if !(0.0..1.0).contains(&z) {
        return Err(Error::Domain(format!("polylog argument must satisfy 0 <= z < 1, got {z}")));
    }
    if z == 0.0 {
        return Ok(Estimate::ZERO);
    }
    if v == 0.0 {
        return Ok(Estimate::exact(z / (1.0 - z)));
    }
    if v == 1.0 {
        return Ok(Estimate::exact(-(-z).ln_1p()));
    }

    let tol = policy.abs_tol;
    // For negative orders the terms first grow; allow enough room to reach
    // the geometric regime where the ratio drops below (1 + z) / 2.
    let mut cap = policy.term_limit;
    if v < 0.0 {
        let target = (1.0 + z) / 2.0;
        let per = (target / z).ln() / -v;
        // ((k+1)/k)^{|v|} z ≤ target  ⇔  ln(1 + 1/k) ≤ per
        let k_star = (1.0 / per.exp_m1()).ceil().max(1.0) as u64;
        cap = cap.max(8 * k_star);
    }

    let ln_z = z.ln();
    let mut acc = CompensatedSum::new();
    let mut k = 1u64;
    loop {
        let kf = k as f64;
        acc.add((kf * ln_z - v * kf.ln()).exp());
        if let Some(bound) = power_geometric_tail(-v, z, kf + 1.0) {
            // keep going while it is cheap to reach full relative precision
            if bound <= tol && (bound <= 1e-17 * acc.value().abs() || k >= cap) {
                return Ok(Estimate::new(acc.value(), bound));
            }
        }
        if k >= cap {
            let bound = power_geometric_tail(-v, z, kf + 1.0).unwrap_or(f64::INFINITY);
            return Err(policy.precision(format!("Li_{v}({z})"), bound));
        }
        k += 1;
    }
}

// ---------------------------------------------------------------------------
// Real zeta and eta
// ---------------------------------------------------------------------------

const CRVZ_BASE: f64 = 5.828_427_124_746_19; // 3 + √8

/// Alternating sum `Σ_{k≥0} (−1)^k a_k` by the Cohen–Rodriguez Villegas–Zagier
/// acceleration with `n` terms.
fn crvz_sum<T>(n: usize, mut a: impl FnMut(usize) -> T) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
{
    let mut d = CRVZ_BASE.powi(n as i32);
    d = (d + 1.0 / d) / 2.0;
    let mut b = -1.0f64;
    let mut c = -d;
    let mut s = T::default();
    for k in 0..n {
        c = b - c;
        s = s + a(k) * c;
        let kf = k as f64;
        let nf = n as f64;
        b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
    }
    s * (1.0 / d)
}

fn crvz_terms_for(tol: f64) -> usize {
    // truncation error ≤ 2 / (3+√8)^n for completely monotone sequences with a_0 = 1
    ((2.0 / tol).ln() / CRVZ_BASE.ln()).ceil().max(4.0) as usize
}

/// Dirichlet eta `η(x) = Σ (−1)^{k−1} k^{−x}`, x > 0.
pub fn eta_real(x: f64, policy: &TruncationPolicy) -> Result<Estimate> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("eta requires x > 0, got {x}")));
    }
    // full double precision costs only ~25 terms
    let n = crvz_terms_for(policy.abs_tol.min(1e-17)).min(400);
    let value = crvz_sum(n, |k| (-(x) * ((k + 1) as f64).ln()).exp());
    let bound = 2.0 / CRVZ_BASE.powi(n as i32);
    if bound > policy.abs_tol {
        return Err(policy.precision(format!("eta({x})"), bound));
    }
    Ok(Estimate::new(value, bound))
}

/// Riemann zeta on the real axis, `x > 0`, `x ≠ 1`, via `ζ(x) = η(x) / (1 − 2^{1−x})`.
pub fn zeta_real(x: f64, policy: &TruncationPolicy) -> Result<Estimate> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("zeta_real requires x > 0, got {x}")));
    }
    if (x - 1.0).abs() < policy.exclusion_radius.max(f64::EPSILON) {
        return Err(Error::Singularity {
            what: format!("zeta argument {x}"),
            point: 1.0,
            radius: policy.exclusion_radius,
        });
    }
    let denom = -((1.0 - x) * LN_2).exp_m1();
    let eta = eta_real(x, &policy.with_tol(policy.abs_tol * denom.abs()))?;
    Ok(Estimate::new(eta.value / denom, eta.error / denom.abs()))
}

// ---------------------------------------------------------------------------
// Complex zeta and log |L|
// ---------------------------------------------------------------------------

/// Complex value with a truncation bound on its modulus error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEstimate {
    pub value: Complex64,
    pub error: f64,
}

/// `B_{2k} / (2k)!` for k = 1..=60, from `(−1)^{k+1} 2 ζ(2k) / (2π)^{2k}`.
fn bernoulli_ratios() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let policy = TruncationPolicy::default().with_tol(1e-17);
        (1..=60)
            .map(|k| {
                let two_k = 2.0 * k as f64;
                let z = if k == 1 {
                    PI * PI / 6.0
                } else {
                    zeta_real(two_k, &policy).map(|e| e.value).unwrap_or(1.0)
                };
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * 2.0 * z / (2.0 * PI).powf(two_k)
            })
            .collect()
    })
}

/// Euler–Maclaurin main-sum length for a given height.
pub fn em_terms_for(t: f64) -> usize {
    ((t.abs() / PI).ceil() as usize + 10).max(20)
}

/// `ln n` and `n^{−σ}` for n = 1..N, reused across many heights on one vertical line.
#[derive(Debug, Clone)]
pub struct LineTable {
    sigma: f64,
    ln_n: Vec<f64>,
    pow_n: Vec<f64>,
}

impl LineTable {
    pub fn new(sigma: f64, max_terms: usize) -> Self {
        let ln_n: Vec<f64> = (1..=max_terms).map(|n| (n as f64).ln()).collect();
        let pow_n = ln_n.iter().map(|l| (-sigma * l).exp()).collect();
        LineTable { sigma, ln_n, pow_n }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn capacity(&self) -> usize {
        self.ln_n.len()
    }
}

fn em_main_sum(s: Complex64, n_main: usize, table: Option<&LineTable>) -> Complex64 {
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    match table {
        Some(tab) if tab.capacity() >= n_main && tab.sigma == s.re => {
            for n in 0..n_main {
                let (sn, cs) = (s.im * tab.ln_n[n]).sin_cos();
                re.add(tab.pow_n[n] * cs);
                im.add(-tab.pow_n[n] * sn);
            }
        }
        _ => {
            for n in 1..=n_main {
                let l = (n as f64).ln();
                let mag = (-s.re * l).exp();
                let (sn, cs) = (s.im * l).sin_cos();
                re.add(mag * cs);
                im.add(-mag * sn);
            }
        }
    }
    Complex64::new(re.value(), im.value())
}

/// ζ(s) by Euler–Maclaurin summation with `N − 1` explicit terms.
fn zeta_em(s: Complex64, tol: f64, table: Option<&LineTable>) -> ComplexEstimate {
    let n_big = em_terms_for(s.im);
    let nf = n_big as f64;
    let main = em_main_sum(s, n_big - 1, table);
    let n_pow = (-s * nf.ln()).exp(); // N^{−s}
    let mut total = main + n_pow * nf / (s - 1.0) + n_pow * 0.5;

    let b = bernoulli_ratios();
    let mut term = n_pow * s * (b[0] / nf);
    let mut error = f64::INFINITY;
    for k in 1..b.len() {
        total += term;
        // T_{k+1} = T_k · (b_{k+1}/b_k) · (s+2k−1)(s+2k) / N²
        let kf = k as f64;
        let next = term * (s + (2.0 * kf - 1.0)) * (s + 2.0 * kf) * (b[k] / b[k - 1] / (nf * nf));
        let bound = next.norm() * (s + (2.0 * kf + 1.0)).norm() / (s.re + 2.0 * kf + 1.0);
        term = next;
        if bound <= tol * 1e-3 || bound <= 1e-17 * total.norm() {
            error = bound;
            break;
        }
        error = bound;
    }
    ComplexEstimate { value: total, error }
}

fn zeta_crvz(s: Complex64, tol: f64) -> Option<ComplexEstimate> {
    let denom = Complex64::new(1.0, 0.0) - (Complex64::new(LN_2, 0.0) * (1.0 - s)).exp();
    let dn = denom.norm();
    let t = s.im.abs();
    // Borwein-style bound: 3 (1 + 2|t|) e^{π|t|/2} (1+|t|)^{1/2} / ((3+√8)^n |1 − 2^{1−s}|)
    let log_num = (3.0 * (1.0 + 2.0 * t)).ln() + PI * t / 2.0 + 0.5 * (1.0 + t).ln() - (tol * dn).ln();
    let n = (log_num / CRVZ_BASE.ln()).ceil() as usize + 4;
    if n > 380 {
        return None;
    }
    let eta = crvz_sum(n, |k| (-s * ((k + 1) as f64).ln()).exp());
    let bound = (log_num + (tol * dn).ln() - n as f64 * CRVZ_BASE.ln()).exp() / dn;
    Some(ComplexEstimate {
        value: eta / denom,
        error: bound,
    })
}

/// ζ(s) for `Re(s) > 0`, `s ≠ 1`.
///
/// Small heights use the accelerated alternating (eta) series; large heights,
/// and the neighbourhoods of the zeros of `1 − 2^{1−s}`, use Euler–Maclaurin.
pub fn zeta_complex(s: Complex64, policy: &TruncationPolicy) -> Result<ComplexEstimate> {
    zeta_complex_with(s, policy, None)
}

/// [`zeta_complex`] with a precomputed [`LineTable`] for the vertical line `Re(s)`.
pub fn zeta_complex_with(s: Complex64, policy: &TruncationPolicy, table: Option<&LineTable>) -> Result<ComplexEstimate> {
    if !(s.re > 0.0) || !s.re.is_finite() || !s.im.is_finite() {
        return Err(Error::Domain(format!("zeta requires Re(s) > 0, got {s}")));
    }
    if (s - 1.0).norm() < policy.exclusion_radius.max(f64::EPSILON) {
        return Err(Error::Singularity {
            what: format!("zeta argument {s}"),
            point: 1.0,
            radius: policy.exclusion_radius,
        });
    }
    if s.im == 0.0 {
        let z = zeta_real(s.re, policy)?;
        return Ok(ComplexEstimate {
            value: Complex64::new(z.value, 0.0),
            error: z.error,
        });
    }
    let denom = Complex64::new(1.0, 0.0) - (Complex64::new(LN_2, 0.0) * (1.0 - s)).exp();
    if s.im.abs() <= 100.0 && denom.norm() >= 0.05 {
        if let Some(z) = zeta_crvz(s, policy.abs_tol) {
            return Ok(z);
        }
    }
    Ok(zeta_em(s, policy.abs_tol, table))
}

/// `ζ(s)` through the eta series only; exposed so the two complex routes can
/// be compared where both apply.
pub fn zeta_complex_alternating(s: Complex64, policy: &TruncationPolicy) -> Result<ComplexEstimate> {
    zeta_crvz(s, policy.abs_tol).ok_or_else(|| policy.precision(format!("eta series at {s}"), f64::INFINITY))
}

/// `ζ(s)` through Euler–Maclaurin only.
pub fn zeta_complex_em(s: Complex64, policy: &TruncationPolicy) -> ComplexEstimate {
    zeta_em(s, policy.abs_tol, None)
}

/// `|ζ|` below this marks a sample as landing near a zero.
pub const NEAR_ZERO_THRESHOLD: f64 = 1e-8;

/// `log |L(σ+it, χ₀)|` with a flag for evaluations close to a zero of ζ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLValue {
    pub value: f64,
    pub error: f64,
    pub near_zero: bool,
}

/// `Σ_{p | M} log |1 − p^{−s}|`.
pub fn euler_factor_correction(s: Complex64, chi: &PrincipalCharacter) -> f64 {
    chi.prime_factors()
        .iter()
        .map(|&p| {
            let ps = (-s * (p as f64).ln()).exp();
            (Complex64::new(1.0, 0.0) - ps).norm().ln()
        })
        .sum()
}

pub fn log_abs_l_line(point: ComplexPoint, chi: &PrincipalCharacter, policy: &TruncationPolicy) -> Result<LogLValue> {
    log_abs_l_line_with(point, chi, policy, None)
}

pub fn log_abs_l_line_with(
    point: ComplexPoint,
    chi: &PrincipalCharacter,
    policy: &TruncationPolicy,
    table: Option<&LineTable>,
) -> Result<LogLValue> {
    if !(point.sigma > 0.0) {
        return Err(Error::Domain(format!("log|L| requires sigma > 0, got {}", point.sigma)));
    }
    let s = point.to_complex();
    let z = zeta_complex_with(s, policy, table)?;
    let modulus = z.value.norm();
    Ok(LogLValue {
        value: modulus.ln() + euler_factor_correction(s, chi),
        error: z.error / modulus,
        near_zero: modulus < NEAR_ZERO_THRESHOLD,
    })
}

/// `log L(x, χ₀)` for real `x > 0` (absolute value taken where ζ(x) < 0).
pub fn log_abs_l_real(x: f64, chi: &PrincipalCharacter, policy: &TruncationPolicy) -> Result<Estimate> {
    let z = zeta_real(x, policy)?;
    let corr: f64 = chi
        .prime_factors()
        .iter()
        .map(|&p| (-(-x * (p as f64).ln()).exp()).ln_1p())
        .sum();
    Ok(Estimate::new(z.value.abs().ln() + corr, z.error / z.value.abs()))
}

// ---------------------------------------------------------------------------
// Prime zeta / prime-L
// ---------------------------------------------------------------------------

/// Upper bound for `Σ_{n ≥ q} n^{−x}` (hence for any prime sum starting at q), x > 1.
fn integer_tail(q: f64, x: f64) -> f64 {
    (-x * q.ln()).exp() + (-(x - 1.0) * q.ln()).exp() / (x - 1.0)
}

/// Upper bound for `P_χ₀(y)`, y > 1.
pub fn prime_zeta_envelope(y: f64, chi: &PrincipalCharacter) -> f64 {
    integer_tail(chi.smallest_excluded_prime() as f64, y)
}

/// `Σ_{p > P} p^{−x}` over all primes above the cutoff `P`.
///
/// When the crude majorant `P^{1−x}/(x−1)` is not below the tolerance the
/// tail is evaluated through Möbius inversion of the tail zeta function
/// `ζ_{>P}(y) = ζ(y) Π_{p ≤ P} (1 − p^{−y})`.
fn prime_tail(x: f64, primes: &[u64], policy: &TruncationPolicy) -> Result<Estimate> {
    let tol = policy.abs_tol;
    let cutoff = *primes.last().expect("non-empty prime list") as f64;
    let crude = (-(x - 1.0) * cutoff.ln()).exp() / (x - 1.0);
    if crude <= tol {
        return Ok(Estimate::new(0.0, crude));
    }
    // g(y) ≤ crude(y) / (1 − P^{−y})
    let g_bound = |y: f64| (-(y - 1.0) * cutoff.ln()).exp() / (y - 1.0) / (1.0 - (-y * cutoff.ln()).exp());
    let mut total = Estimate::ZERO;
    let mut n = 1u64;
    loop {
        // remaining terms n' ≥ n are bounded by Σ (1/n') g_bound(n' x) ≤ g_bound(n x)/n · 1/(1 − P^{−x})
        let rest = g_bound(n as f64 * x) / n as f64 / (1.0 - (-x * cutoff.ln()).exp());
        if rest <= tol / 2.0 {
            total.error += rest;
            return Ok(total);
        }
        if n >= policy.term_limit {
            return Err(policy.precision(format!("prime tail at {x}"), rest));
        }
        let mu = mobius(n);
        if mu != 0 {
            let y = n as f64 * x;
            let z = zeta_real(y, &policy.with_tol(tol * 1e-3))?;
            let mut acc = CompensatedSum::new();
            acc.add(z.value.ln());
            for &p in primes {
                acc.add((-(-y * (p as f64).ln()).exp()).ln_1p());
            }
            total.value += mu as f64 / n as f64 * acc.value();
            total.error += z.error / z.value / n as f64;
        }
        n += 1;
    }
}

/// `Σ_{p ∤ M} f(p)` for `f(p) ≤ c · p^{−x}`, with certified early exit and the
/// prime tail delegated to `tail`.
fn prime_sum<F, T>(
    x: f64,
    chi: &PrincipalCharacter,
    policy: &TruncationPolicy,
    mut f: F,
    tail: T,
    bound_factor: f64,
) -> Result<Estimate>
where
    F: FnMut(u64) -> Result<Estimate>,
    T: FnOnce(&[u64]) -> Result<Estimate>,
{
    let tol = policy.abs_tol;
    let primes = primes_up_to(policy.prime_limit);
    let mut acc = CompensatedSum::new();
    let mut err = 0.0;
    for (i, &p) in primes.iter().enumerate() {
        if !chi.divides_modulus(p) {
            let e = f(p)?;
            acc.add(e.value);
            err += e.error;
        }
        if let Some(&q) = primes.get(i + 1) {
            let rest = bound_factor * integer_tail(q as f64, x);
            let sum = acc.value().abs();
            if rest <= tol / 4.0 && rest <= 1e-17 * sum {
                return Ok(Estimate::new(acc.value(), err + rest));
            }
        }
    }
    let mut total = Estimate::new(acc.value(), err) + tail(&primes)?;
    // primes above the cutoff that divide M were counted in the tail
    let cutoff = *primes.last().unwrap();
    for &p in chi.prime_factors().iter().filter(|&&p| p > cutoff) {
        total = total - f(p)?;
    }
    Ok(total)
}

/// `P_χ₀(σ) = Σ_{p ∤ M} p^{−σ}`, σ > 1.
pub fn prime_zeta_series(sigma: f64, chi: &PrincipalCharacter, policy: &TruncationPolicy) -> Result<Estimate> {
    if !(sigma > 1.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!(
            "prime zeta series requires sigma > 1, got {sigma}; use the continued form"
        )));
    }
    let est = prime_sum(
        sigma,
        chi,
        policy,
        |p| Ok(Estimate::exact((-sigma * (p as f64).ln()).exp())),
        |primes| prime_tail(sigma, primes, &policy.with_tol(policy.abs_tol / 2.0)),
        1.0,
    )?;
    if est.error > policy.abs_tol {
        return Err(policy.precision(format!("P({sigma})"), est.error));
    }
    Ok(est)
}

/// `P_χ₀(σ) = Σ_n μ(n)/n · log L(nσ, χ₀)` for σ > 0 away from `nσ = 1`.
///
/// Below σ = 1 this is the real part of the continuation: `log |L|` is used
/// where `L(nσ) < 0`.
pub fn prime_zeta_continued(sigma: f64, chi: &PrincipalCharacter, policy: &TruncationPolicy) -> Result<Estimate> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("prime zeta continuation requires sigma > 0, got {sigma}")));
    }
    let radius = policy.exclusion_radius;
    let n_pole = (1.0 / sigma).round();
    if n_pole >= 1.0 && (n_pole * sigma - 1.0).abs() < radius.max(f64::EPSILON) {
        return Err(Error::Singularity {
            what: format!("prime zeta continuation at sigma={sigma}"),
            point: 1.0 / n_pole,
            radius,
        });
    }
    let tol = policy.abs_tol;
    let p_min = chi.smallest_excluded_prime() as f64;
    let q = (-sigma * p_min.ln()).exp();
    let mut total = Estimate::ZERO;
    let mut n = 1u64;
    loop {
        let nf = n as f64;
        if nf * sigma >= 2.0 {
            // log L(y) ≤ 2 (p^{−y} + p^{1−y}/(y−1)) ≤ 2 (1 + p) p^{−y} for y ≥ 2
            let rest = 2.0 * (1.0 + p_min) / nf * (q.powf(nf)) / (1.0 - q);
            if rest <= tol / 2.0 {
                total.error += rest;
                return Ok(total);
            }
        }
        if n >= policy.term_limit {
            return Err(policy.precision(format!("continued P({sigma})"), f64::INFINITY));
        }
        let mu = mobius(n);
        if mu != 0 {
            let y = nf * sigma;
            let l = log_abs_l_real(y, chi, &policy.with_tol(tol * 1e-3))?;
            total = total + l * (mu as f64 / nf);
        }
        n += 1;
    }
}

/// `P_χ₀(x)`: the prime series when `x > 1`, the continuation otherwise.
pub fn prime_zeta(x: f64, chi: &PrincipalCharacter, policy: &TruncationPolicy) -> Result<Estimate> {
    if x > 1.0 {
        prime_zeta_series(x, chi, policy)
    } else {
        prime_zeta_continued(x, chi, policy)
    }
}

/// `Σ_{p ∤ M} Li₂(p^{−σ})`, σ > 1, summed prime by prime.
pub fn li2_prime_sum(sigma: f64, chi: &PrincipalCharacter, policy: &TruncationPolicy) -> Result<Estimate> {
    if !(sigma > 1.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("Li2 prime sum requires sigma > 1, got {sigma}")));
    }
    let base = policy.with_tol(f64::MIN_POSITIVE);
    let half = policy.abs_tol / 2.0;
    let est = prime_sum(
        sigma,
        chi,
        policy,
        |p| {
            let z = (-sigma * (p as f64).ln()).exp();
            polylog(2.0, z, &base.with_tol((z * 1e-17).max(1e-300)))
        },
        |primes| {
            // Σ_{p>P} Li₂(p^{−σ}) = Σ_k (Σ_{p>P} p^{−kσ}) / k²
            let cutoff = *primes.last().unwrap() as f64;
            let mut total = Estimate::ZERO;
            let mut k = 1u64;
            loop {
                let kf = k as f64;
                let y = kf * sigma;
                // remaining k' ≥ k: Σ P^{1−k'σ}/(k'σ−1)/k'² ≤ crude(kσ)/k² / (1 − P^{−σ})
                let rest = (-(y - 1.0) * cutoff.ln()).exp() / (y - 1.0) / (kf * kf) / (1.0 - (-sigma * cutoff.ln()).exp());
                if rest <= half / 2.0 {
                    total.error += rest;
                    return Ok(total);
                }
                total = total + prime_tail(y, primes, &policy.with_tol(half / 4.0 / kf))? * (1.0 / (kf * kf));
                k += 1;
            }
        },
        // Li₂(z) ≤ z / (1 − z) ≤ 2z for z ≤ 1/2
        2.0,
    )?;
    if est.error > policy.abs_tol {
        return Err(policy.precision(format!("sum Li2(p^-{sigma})"), est.error));
    }
    Ok(est)
}

/// `Σ_{k≥1} P_χ₀(k x) / k²`, using the continuation for the terms with `kx ≤ 1`.
pub fn prime_zeta_ksum(x: f64, chi: &PrincipalCharacter, policy: &TruncationPolicy) -> Result<Estimate> {
    prime_zeta_ksum_from(x, 1, 2.0, chi, policy)
}

/// `Σ_{k ≥ k0} P_χ₀(k x) / k^v`.
pub fn prime_zeta_ksum_from(
    x: f64,
    k0: u64,
    v: f64,
    chi: &PrincipalCharacter,
    policy: &TruncationPolicy,
) -> Result<Estimate> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("k-series requires a positive argument, got {x}")));
    }
    let tol = policy.abs_tol;
    let p_min = chi.smallest_excluded_prime() as f64;
    let q = (-x * p_min.ln()).exp();
    let mut total = Estimate::ZERO;
    let mut k = k0;
    loop {
        let kf = k as f64;
        if kf * x >= 2.0 {
            // P(y) ≤ (1 + p) p^{−y} for y ≥ 2, so the tail is ≤ (1+p) Σ_{k'≥k} k'^{−v} q^{k'}
            if let Some(b) = power_geometric_tail(-v, q, kf) {
                let rest = (1.0 + p_min) * b;
                // late terms are cheap, so also aim for full relative precision
                if rest <= tol / 2.0 && (rest <= 1e-16 * total.value.abs() || k - k0 > 200) {
                    total.error += rest;
                    return Ok(total);
                }
            }
        }
        if k - k0 >= policy.term_limit {
            return Err(policy.precision(format!("k-series at {x}"), f64::INFINITY));
        }
        let w = kf.powf(-v);
        let term_tol = (tol / 4.0 / w) * (0.5f64).powf(((k - k0) as f64).min(60.0) + 1.0);
        let pz = prime_zeta(kf * x, chi, &policy.with_tol(term_tol.max(tol * 1e-6)))?;
        total = total + pz * w;
        k += 1;
    }
}
