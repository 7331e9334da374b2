//! Polylogarithm / Möbius / non-divisor identities and the polylog
//! order-shift operators.
//!
//! The sums over `n` with `μ(n) = ±1` and the non-divisor double sum are
//! truncated by separate tail bounds, so comparing them is a genuine check.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, mobius, non_divisors_below, PrincipalCharacter};
use crate::correlation::li2_series;
use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::special::{polylog, power_geometric_tail, CompensatedSum, Estimate, TruncationPolicy};

/// Inputs at or below `2^{1/6} + margin` are rejected.
pub const DOMAIN_MARGIN: f64 = 1e-3;

pub fn nondivisor_domain_threshold() -> f64 {
    2f64.powf(1.0 / 6.0) + DOMAIN_MARGIN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    pub tol: f64,
    pub pass: bool,
}

impl IdentityReport {
    pub fn new(name: &str, parameters: &[(&str, f64)], lhs: f64, rhs: f64, tol: f64) -> Self {
        let abs_diff = (lhs - rhs).abs();
        IdentityReport {
            name: name.to_string(),
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            lhs,
            rhs,
            abs_diff,
            tol,
            pass: abs_diff <= tol,
        }
    }
}

fn check_x(x: f64) -> Result<()> {
    if !(x > nondivisor_domain_threshold()) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "x must exceed 2^(1/6) + {DOMAIN_MARGIN} ≈ {:.6}, got {x}",
            nondivisor_domain_threshold()
        )));
    }
    Ok(())
}

fn check_v(v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::Domain(format!("order v must be finite, got {v}")));
    }
    Ok(())
}

/// `Li_v(z) ≤ z · Li_v(z0)/z0` for `z ≤ z0` (Li_v(z)/z increases in z).
fn polylog_slope(v: f64, z0: f64, policy: &TruncationPolicy) -> Result<f64> {
    let e = polylog(v, z0, policy)?;
    Ok((e.value + e.error) / z0)
}

fn term_policy(policy: &TruncationPolicy, z: f64) -> TruncationPolicy {
    policy.with_tol((policy.abs_tol * 1e-4).min(z * 1e-16).max(1e-300))
}

/// `Σ_{n>1, w(n) ≠ 0} w(n) n^{−v} Li_v(x^{−n})` with a single-sum tail bound.
fn weighted_polylog_sum(v: f64, x: f64, policy: &TruncationPolicy, weight: impl Fn(i8) -> f64) -> Result<Estimate> {
    let tol = policy.abs_tol;
    let r = 1.0 / x;
    let mut acc = CompensatedSum::new();
    let mut err = 0.0;
    let mut n = 2u64;
    loop {
        let nf = n as f64;
        let z = r.powf(nf);
        // Σ_{n' ≥ n} n'^{−v} Li_v(x^{−n'}) ≤ slope(x^{−n}) Σ n'^{−v} x^{−n'}
        if let Some(g) = power_geometric_tail(-v, r, nf) {
            let rest = polylog_slope(v, z, policy)? * g;
            if rest <= tol / 4.0 && (rest <= 1e-16 * acc.value().abs() || n > 400) {
                return Ok(Estimate::new(acc.value(), err + rest));
            }
        }
        if n >= policy.term_limit.max(1000) * 10 {
            return Err(Error::Precision {
                what: format!("polylog n-sum at v={v}, x={x}"),
                bound: f64::INFINITY,
                tol,
            });
        }
        let w = weight(mobius(n));
        if w != 0.0 {
            let li = polylog(v, z, &term_policy(policy, z))?;
            let c = w * nf.powf(-v);
            acc.add(c * li.value);
            err += c.abs() * li.error;
        }
        n += 1;
    }
}

/// `Σ_{n>1, μ(n)=1} n^{−v} Li_v(x^{−n})`.
pub fn even_polylog_sum(v: f64, x: f64, policy: &TruncationPolicy) -> Result<Estimate> {
    check_v(v)?;
    check_x(x)?;
    weighted_polylog_sum(v, x, policy, |mu| if mu == 1 { 1.0 } else { 0.0 })
}

/// `Σ_{n>1, μ(n)=−1} n^{−v} Li_v(x^{−n})`.
pub fn odd_polylog_sum(v: f64, x: f64, policy: &TruncationPolicy) -> Result<Estimate> {
    check_v(v)?;
    check_x(x)?;
    weighted_polylog_sum(v, x, policy, |mu| if mu == -1 { 1.0 } else { 0.0 })
}

/// `Σ_{n>1} μ(n) n^{−v} Li_v(x^{−n})`, summed directly.
pub fn mobius_polylog_sum(v: f64, x: f64, policy: &TruncationPolicy) -> Result<Estimate> {
    check_v(v)?;
    check_x(x)?;
    weighted_polylog_sum(v, x, policy, |mu| mu as f64)
}

/// Generic non-divisor double sum `Σ_n μ(n) n^{−v} Σ_{m∤n,m<n} μ(m) m^{−v} f(nm)`.
///
/// `bound(n)` must bound `Σ_{n' ≥ n} |outer term(n')|`.
fn non_divisor_sum(
    term_limit: u64,
    tol: f64,
    v: f64,
    mut f: impl FnMut(u64) -> Result<Estimate>,
    mut bound: impl FnMut(u64) -> Result<Option<f64>>,
) -> Result<Estimate> {
    let mut acc = CompensatedSum::new();
    let mut err = 0.0;
    let mut n = 3u64;
    loop {
        if let Some(rest) = bound(n)? {
            if rest <= tol / 4.0 && (rest <= 1e-16 * acc.value().abs() || n > 400) {
                return Ok(Estimate::new(acc.value(), err + rest));
            }
        }
        if n >= term_limit {
            return Err(Error::Precision {
                what: format!("non-divisor sum at v={v}"),
                bound: f64::INFINITY,
                tol,
            });
        }
        let mu_n = mobius(n);
        if mu_n != 0 {
            let cn = mu_n as f64 * (n as f64).powf(-v);
            for m in non_divisors_below(n) {
                let mu_m = mobius(m);
                if mu_m == 0 {
                    continue;
                }
                let e = f(n * m)?;
                let c = cn * mu_m as f64 * (m as f64).powf(-v);
                acc.add(c * e.value);
                err += c.abs() * e.error;
            }
        }
        n += 1;
    }
}

/// `Σ_n μ(n) n^{−v} Σ_{m∤n, m<n} μ(m) m^{−v} Li_v(x^{−nm})`.
pub fn nondivisor_polylog_sum(v: f64, x: f64, policy: &TruncationPolicy) -> Result<Estimate> {
    check_v(v)?;
    check_x(x)?;
    let r = 1.0 / x;
    let a = (-v).max(0.0);
    non_divisor_sum(
        policy.term_limit.max(1000) * 10,
        policy.abs_tol,
        v,
        |nm| {
            let z = r.powf(nm as f64);
            polylog(v, z, &term_policy(policy, z))
        },
        |n| {
            // |inner(n')| ≤ slope · x^{−2n'} Σ_{m≥2} m^a x^{−n'(m−2)} for n' ≥ n
            let nf = n as f64;
            let rn = r.powf(nf);
            let g = match power_geometric_tail(a, rn, 2.0) {
                Some(g) => g / (rn * rn),
                None => return Ok(None),
            };
            let slope = polylog_slope(v, r.powf(2.0 * nf), policy)?;
            Ok(power_geometric_tail(-v, r * r, nf).map(|t| slope * g * t))
        },
    )
}

/// `even LHS = RHS`.
pub fn even_nondivisor_check(v: f64, x: f64, tol: f64, policy: &TruncationPolicy) -> Result<IdentityReport> {
    let lhs = even_polylog_sum(v, x, policy)?;
    let rhs = nondivisor_polylog_sum(v, x, policy)?;
    Ok(IdentityReport::new("nondivisor_even", &[("v", v), ("x", x)], lhs.value, rhs.value, tol))
}

/// `odd LHS = Li_v(1/x) − 1/x + RHS`.
pub fn odd_nondivisor_check(v: f64, x: f64, tol: f64, policy: &TruncationPolicy) -> Result<IdentityReport> {
    let lhs = odd_polylog_sum(v, x, policy)?;
    let rhs = nondivisor_polylog_sum(v, x, policy)?;
    let li = polylog(v, 1.0 / x, &policy.with_tol(policy.abs_tol * 1e-3))?;
    Ok(IdentityReport::new(
        "nondivisor_odd",
        &[("v", v), ("x", x)],
        lhs.value,
        li.value - 1.0 / x + rhs.value,
        tol,
    ))
}

/// `Σ_{μ=1} − Σ_{μ=−1}` against the directly summed `Σ_{n>1} μ(n) n^{−v} Li_v(x^{−n})`.
pub fn parity_partition_check(v: f64, x: f64, tol: f64, policy: &TruncationPolicy) -> Result<IdentityReport> {
    let even = even_polylog_sum(v, x, policy)?;
    let odd = odd_polylog_sum(v, x, policy)?;
    let all = mobius_polylog_sum(v, x, policy)?;
    Ok(IdentityReport::new(
        "parity_partition",
        &[("v", v), ("x", x)],
        even.value - odd.value,
        all.value,
        tol,
    ))
}

/// Diagonal variance `R(j,j,σ) = ½ Σ_{p∤M} Li₂(p^{−2jσ})`.
fn diag_variance(j: u64, sigma: f64, chi: &PrincipalCharacter, policy: &TruncationPolicy) -> Result<Estimate> {
    Ok(li2_series(2.0 * j as f64 * sigma, chi, policy, None)?.0 * 0.5)
}

fn variance_bound(j: u64, sigma: f64, p: f64) -> f64 {
    let y = 2.0 * j as f64 * sigma;
    let z = p.powf(-y);
    0.5 * (z + p * z / (y - 1.0)) / (1.0 - z)
}

/// `Σ_{n>1, μ(n)=1} R(n,n,σ)/n²  =  Σ_n μ(n)/n² Σ_{m∤n,m<n} μ(m)/m² R(nm,nm,σ)`.
pub fn squarefree_variance_symmetry(sigma: f64, chi: &PrincipalCharacter, tol: f64, policy: &TruncationPolicy) -> Result<IdentityReport> {
    if !(sigma > 0.25) || !sigma.is_finite() {
        return Err(Error::Domain(format!("identity requires sigma > 1/4, got {sigma}")));
    }
    let p = chi.smallest_excluded_prime() as f64;
    let q = p.powf(-2.0 * sigma);
    let inner = policy.with_tol(policy.abs_tol * 1e-3);

    let mut lhs = CompensatedSum::new();
    let mut n = 2u64;
    loop {
        let rest = variance_bound(n, sigma, p) / q.powf(n as f64) * power_geometric_tail(-2.0, q, n as f64).unwrap();
        if rest <= policy.abs_tol / 4.0 {
            break;
        }
        if mobius(n) == 1 {
            lhs.add(diag_variance(n, sigma, chi, &inner)?.value / (n * n) as f64);
        }
        n += 1;
    }

    let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
    let rhs = non_divisor_sum(
        policy.term_limit,
        policy.abs_tol,
        2.0,
        |nm| diag_variance(nm, sigma, chi, &inner),
        |n| {
            // |inner(n')| ≤ (π²/6) R_bound(2n'), decaying like q^{2n'}
            let b = pi2_6 * variance_bound(2 * n, sigma, p) / (q * q).powf(n as f64);
            Ok(power_geometric_tail(-2.0, q * q, n as f64).map(|t| b * t))
        },
    )?;
    Ok(IdentityReport::new(
        "variance_symmetry",
        &[("sigma", sigma), ("modulus", chi.modulus() as f64)],
        lhs.value(),
        rhs.value,
        tol,
    ))
}

/// `R_M(n,n,σ) − R_{pM}(n,n,σ) = ½ Li₂(p^{−2nσ})` for a prime `p ∤ M`.
pub fn character_difference(
    n: u64,
    sigma: f64,
    modulus: i64,
    p: u64,
    tol: f64,
    policy: &TruncationPolicy,
) -> Result<IdentityReport> {
    if n == 0 {
        return Err(Error::Domain("n must be a positive integer".into()));
    }
    if !is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    let chi = PrincipalCharacter::new(modulus)?;
    if chi.divides_modulus(p) {
        return Err(Error::Precondition(format!("prime {p} divides the modulus {modulus}")));
    }
    if !(2.0 * n as f64 * sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let chi_p = chi.extended_by(p)?;
    let a = diag_variance(n, sigma, &chi, policy)?;
    let b = diag_variance(n, sigma, &chi_p, policy)?;
    let z = (p as f64).powf(-2.0 * n as f64 * sigma);
    let li = polylog(2.0, z, &policy.with_tol(policy.abs_tol * 1e-3))?;
    Ok(IdentityReport::new(
        "character_difference",
        &[("n", n as f64), ("sigma", sigma), ("modulus", modulus as f64), ("p", p as f64)],
        a.value - b.value,
        0.5 * li.value,
        tol,
    ))
}

/// Integral and derivative checks of the polylog order shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderShiftReport {
    pub integral: IdentityReport,
    pub derivative: IdentityReport,
}

impl OrderShiftReport {
    pub fn pass(&self) -> bool {
        self.integral.pass && self.derivative.pass
    }
}

pub const DERIVATIVE_STEP: f64 = 1e-4;

/// `∫_{log x}^∞ Li_v(e^{−αu}) du = Li_{v+1}(x^{−α})/α` and
/// `d/du Li_v(e^{−αu}) = −α Li_{v−1}(e^{−αu})` at `u = log x`.
pub fn polylog_order_shift_check(
    v: f64,
    x: f64,
    alpha: u64,
    int_tol: f64,
    deriv_tol: f64,
    policy: &TruncationPolicy,
) -> Result<OrderShiftReport> {
    check_v(v)?;
    if !(x > 1.0) || !x.is_finite() {
        return Err(Error::Domain(format!("x must exceed 1, got {x}")));
    }
    if alpha == 0 {
        return Err(Error::Domain("alpha must be a positive integer".into()));
    }
    let a = alpha as f64;
    let lo = x.ln();
    let hi = lo + 40.0 / a;
    let fine = policy.with_tol(1e-15);
    let f = |u: f64| polylog(v, (-a * u).exp(), &fine).map(|e| e.value);
    let (quad, _) = integrate(f, lo, hi, int_tol * 1e-2, 4000)?;
    // beyond hi: Li_v(e^{−αu}) ≤ slope · e^{−αu}
    let z_hi = (-a * hi).exp();
    let tail = polylog_slope(v, z_hi, &fine)? * z_hi / a;
    let closed = polylog(v + 1.0, x.powf(-a), &fine)?.value / a;
    let integral = IdentityReport::new(
        "polylog_integral",
        &[("v", v), ("x", x), ("alpha", a), ("tail_bound", tail)],
        quad + tail / 2.0,
        closed,
        int_tol,
    );

    let h = DERIVATIVE_STEP;
    let fd = (f(lo + h)? - f(lo - h)?) / (2.0 * h);
    let exact = -a * polylog(v - 1.0, x.powf(-a), &fine)?.value;
    let derivative = IdentityReport::new(
        "polylog_derivative",
        &[("v", v), ("x", x), ("alpha", a), ("h", h)],
        fd,
        exact,
        deriv_tol,
    );
    Ok(OrderShiftReport { integral, derivative })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pol() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    /// Brute-force even/odd/non-divisor sums with fixed generous truncation.
    fn brute(v: f64, x: f64, n_max: u64) -> (f64, f64, f64) {
        let li = |z: f64| -> f64 { (1..4000).map(|k| z.powi(k) / (k as f64).powf(v)).sum() };
        let (mut even, mut odd, mut rhs) = (0.0, 0.0, 0.0);
        for n in 2..n_max {
            let mu = mobius(n);
            let t = (n as f64).powf(-v) * li(x.powf(-(n as f64)));
            if mu == 1 {
                even += t;
            } else if mu == -1 {
                odd += t;
            }
            if mu != 0 {
                for m in non_divisors_below(n) {
                    let mm = mobius(m);
                    if mm != 0 && (n * m) as f64 * x.ln() < 700.0 {
                        rhs += mu as f64 * mm as f64 * ((n * m) as f64).powf(-v) * li(x.powf(-((n * m) as f64)));
                    }
                }
            }
        }
        (even, odd, rhs)
    }

    #[test]
    fn domain_rejected() {
        assert!(matches!(even_polylog_sum(2.0, 1.05, &pol()), Err(Error::Domain(_))));
        assert!(matches!(nondivisor_polylog_sum(2.0, 1.1230, &pol()), Err(Error::Domain(_))));
        assert!(nondivisor_polylog_sum(2.0, 1.15, &pol()).is_ok());
    }

    #[test]
    fn first_terms() {
        // even side starts at n = 6, odd side at n = 2, rhs at n = 3 (m = 2, μ(3)μ(2) = +1)
        let e = even_polylog_sum(2.0, 2.0, &pol()).unwrap().value;
        let first = polylog(2.0, 2f64.powi(-6), &pol()).unwrap().value / 36.0;
        assert!(e > first && e < first * 1.05);
        let o = odd_polylog_sum(2.0, 2.0, &pol()).unwrap().value;
        let first_odd = polylog(2.0, 0.25, &pol()).unwrap().value / 4.0;
        assert!(o > first_odd && o < first_odd * 1.4);
        let r = nondivisor_polylog_sum(2.0, 2.0, &pol()).unwrap().value;
        let first_rhs = (3f64 * 2.0).powi(-2) * polylog(2.0, 2f64.powi(-6), &pol()).unwrap().value;
        assert!((r - first_rhs).abs() < first_rhs.abs() * 0.05);
    }

    #[test]
    fn sums_match_brute_force() {
        for &(v, x) in &[(2.0, 2.0), (-1.0, 1.5), (0.0, 2.0), (1.0, 10.0)] {
            let (even, odd, rhs) = brute(v, x, 200);
            assert!((even_polylog_sum(v, x, &pol()).unwrap().value - even).abs() < 1e-11);
            assert!((odd_polylog_sum(v, x, &pol()).unwrap().value - odd).abs() < 1e-11);
            assert!((nondivisor_polylog_sum(v, x, &pol()).unwrap().value - rhs).abs() < 1e-11);
        }
    }

    #[test]
    fn parity_partition_holds() {
        for &(v, x) in &[(2.0, 2.0), (-2.0, 1.2), (0.5, 10.0)] {
            assert!(parity_partition_check(v, x, 1e-10, &pol()).unwrap().pass);
        }
    }

    #[test]
    fn strongly_negative_orders() {
        let p = pol();
        for v in [-4.0, -3.0] {
            for x in [2.0, 10.0] {
                assert!(parity_partition_check(v, x, 1e-10, &p).unwrap().pass);
            }
            // at x = 10 the residual ~ 3·10^{-30}·30^{-v} is far below tolerance
            assert!(even_nondivisor_check(v, 10.0, 1e-10, &p).unwrap().pass);
            assert!(odd_nondivisor_check(v, 10.0, 1e-10, &p).unwrap().pass);
            let (even, _, _) = brute(v, 10.0, 60);
            assert!((even_polylog_sum(v, 10.0, &p).unwrap().value - even).abs() <= 1e-12 * even.abs().max(1.0));
        }
    }

    #[test]
    fn character_difference_examples() {
        let p = pol();
        let r = character_difference(2, 1.0, 1, 2, 1e-10, &p).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.rhs - 0.5 * polylog(2.0, 1.0 / 16.0, &p).unwrap().value).abs() < 1e-15);
        assert!(character_difference(3, 1.0, 2, 3, 1e-10, &p).unwrap().pass);
        assert!(character_difference(1, 0.6, 1, 5, 1e-10, &p).unwrap().pass);
        assert!(matches!(character_difference(1, 1.0, 6, 3, 1e-10, &p), Err(Error::Precondition(_))));
    }

    #[test]
    fn order_shift_examples() {
        let p = pol();
        let r = polylog_order_shift_check(1.0, 2.0, 1, 1e-8, 1e-6, &p).unwrap();
        assert!(r.pass(), "{r:?}");
        assert!((r.integral.rhs - polylog(2.0, 0.5, &p).unwrap().value).abs() < 1e-14);
        assert!(polylog_order_shift_check(0.0, 2.0, 2, 1e-8, 1e-6, &p).unwrap().pass());
        assert!(polylog_order_shift_check(2.0, 10.0, 3, 1e-8, 1e-6, &p).unwrap().pass());
    }
}
