//! Mean square of the gap `ε(σ,t) = Re P_χ₀(σ+it) − log |L(σ+it, χ₀)|`.
//!
//! Two representations are evaluated independently:
//!
//! * simple:   `½ Σ_{k≥2} P(2kσ)/k²`
//! * expanded: `Σ_{n≥2} μ(n)/n² ( −(μ(n)+2) R(n,n,σ) + 2 Σ_{m∤n, m<n} μ(m)/m² R(nm,nm,σ) )`
//!
//! with `R(j,j,σ) = ½ Σ_p Li₂(p^{−2jσ})` the diagonal variance. Both need σ > 1/4.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{mobius, non_divisors_below, PrincipalCharacter};
use crate::error::{Error, Result};
use crate::special::{li2_prime_sum, power_geometric_tail, prime_zeta_ksum_from, Estimate, TruncationPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapMseResult {
    pub sigma: f64,
    pub mse_simple: f64,
    pub mse_expanded: f64,
    pub rms: f64,
    pub rms_expanded: f64,
    /// Certified tail bounds of the two representations.
    pub error_simple: f64,
    pub error_expanded: f64,
    /// Last outer index of the expanded sum.
    pub expanded_terms: u64,
}

impl GapMseResult {
    pub fn abs_diff(&self) -> f64 {
        (self.mse_simple - self.mse_expanded).abs()
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.25) || !sigma.is_finite() {
        return Err(Error::Domain(format!("gap mean square requires sigma > 1/4, got {sigma}")));
    }
    Ok(())
}

/// `½ Σ_{k≥2} P_χ₀(2kσ)/k²`.
pub fn mse_simple(sigma: f64, chi: &PrincipalCharacter, policy: &TruncationPolicy) -> Result<Estimate> {
    check_sigma(sigma)?;
    Ok(prime_zeta_ksum_from(2.0 * sigma, 2, 2.0, chi, policy)? * 0.5)
}

/// Diagonal variance `R(j,j,σ)` cache keyed by `j`.
struct VarianceCache<'a> {
    sigma: f64,
    chi: &'a PrincipalCharacter,
    policy: TruncationPolicy,
    values: HashMap<u64, Estimate>,
}

impl<'a> VarianceCache<'a> {
    fn get(&mut self, j: u64) -> Result<Estimate> {
        if let Some(v) = self.values.get(&j) {
            return Ok(*v);
        }
        let v = li2_prime_sum(2.0 * j as f64 * self.sigma, self.chi, &self.policy)? * 0.5;
        self.values.insert(j, v);
        Ok(v)
    }
}

/// Upper bound for `R(j,j,σ)` from the smallest admissible prime.
fn variance_bound(j: u64, sigma: f64, p: f64) -> f64 {
    let y = 2.0 * j as f64 * sigma;
    let z = p.powf(-y);
    // ½ Σ_{q ≥ p} Li₂(q^{−y}) ≤ ½ · Σ q^{−y}/(1 − p^{−y}) ≤ ½ (p^{−y} + p^{1−y}/(y−1)) / (1 − z)
    0.5 * (z + p * z / (y - 1.0)) / (1.0 - z)
}

/// Expanded (non-divisor) representation of the gap mean square.
pub fn mse_expanded(sigma: f64, chi: &PrincipalCharacter, policy: &TruncationPolicy) -> Result<(Estimate, u64)> {
    check_sigma(sigma)?;
    let tol = policy.abs_tol;
    let p = chi.smallest_excluded_prime() as f64;
    let q = p.powf(-2.0 * sigma);
    // inner non-divisor weights are bounded by Σ 1/m² ≤ π²/6
    let envelope = 3.0 + std::f64::consts::PI.powi(2) / 3.0;
    let mut cache = VarianceCache {
        sigma,
        chi,
        policy: policy.with_tol(tol * 1e-3),
        values: HashMap::new(),
    };
    let mut total = Estimate::ZERO;
    let mut n = 2u64;
    loop {
        // Σ_{n' ≥ n} envelope · R_bound(n')/n'² with R_bound(n') ≤ R_bound(n) q^{n'−n}
        let rb = variance_bound(n, sigma, p);
        let rest = envelope * rb / q.powf(n as f64) * power_geometric_tail(-2.0, q, n as f64).unwrap_or(f64::INFINITY);
        if rest <= tol / 2.0 {
            total.error += rest;
            return Ok((total, n - 1));
        }
        if n >= policy.term_limit {
            return Err(Error::Precision {
                what: format!("expanded gap mean square at sigma={sigma}"),
                bound: rest,
                tol,
            });
        }
        let mu = mobius(n);
        if mu != 0 {
            let muf = mu as f64;
            let mut inner = cache.get(n)? * (-(muf + 2.0));
            for m in non_divisors_below(n) {
                let mu_m = mobius(m);
                if mu_m != 0 {
                    inner = inner + cache.get(n * m)? * (2.0 * mu_m as f64 / (m * m) as f64);
                }
            }
            total = total + inner * (muf / (n * n) as f64);
        }
        n += 1;
    }
}

/// Both representations at one σ.
pub fn gap_mse(sigma: f64, chi: &PrincipalCharacter, policy: &TruncationPolicy) -> Result<GapMseResult> {
    let s = mse_simple(sigma, chi, policy)?;
    let (e, n) = mse_expanded(sigma, chi, policy)?;
    Ok(GapMseResult {
        sigma,
        mse_simple: s.value,
        mse_expanded: e.value,
        rms: s.value.max(0.0).sqrt(),
        rms_expanded: e.value.max(0.0).sqrt(),
        error_simple: s.error,
        error_expanded: e.error,
        expanded_terms: n,
    })
}

/// RMS curve over a σ grid; each point succeeds or fails on its own.
pub fn rms_curve(sigma_grid: &[f64], chi: &PrincipalCharacter, policy: &TruncationPolicy) -> Vec<Result<GapMseResult>> {
    sigma_grid.par_iter().map(|&s| gap_mse(s, chi, policy)).collect()
}

/// Both sides of `Σ_{k≥2} P(kx)/k^v = −Σ_{n≥2} μ(n)/n^v Σ_{k≥1} P(knx)/k^v`, `x = 2σ`.
pub fn mobius_partial_identity(
    v: f64,
    sigma: f64,
    chi: &PrincipalCharacter,
    policy: &TruncationPolicy,
) -> Result<(Estimate, Estimate)> {
    if !(2.0 * sigma > 1.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("identity requires 2 sigma > 1, got sigma={sigma}")));
    }
    if !v.is_finite() {
        return Err(Error::Domain("order v must be finite".into()));
    }
    let tol = policy.abs_tol;
    let x = 2.0 * sigma;
    let lhs = prime_zeta_ksum_from(x, 2, v, chi, policy)?;

    let p = chi.smallest_excluded_prime() as f64;
    let q = p.powf(-x);
    let inner_policy = policy.with_tol(tol * 1e-3);
    let mut rhs = Estimate::ZERO;
    let mut n = 2u64;
    loop {
        // Σ_k P(kny)/k^v ≤ Σ_k (1 + p/(nx−1)) p^{−knx} · max(1, k^{−v}); bound by the
        // first k term times a geometric factor, then sum the outer n-tail.
        let y = n as f64 * x;
        let c = (1.0 + p / (y - 1.0)) / (1.0 - q).powi(2) * if v < 0.0 { 4f64.powf(-v) } else { 1.0 };
        if let Some(b) = power_geometric_tail(-v, q, n as f64) {
            let rest = c * b;
            if rest <= tol / 2.0 {
                rhs.error += rest;
                return Ok((lhs, rhs));
            }
        }
        if n >= policy.term_limit {
            return Err(Error::Precision {
                what: format!("Möbius identity rhs at v={v}, sigma={sigma}"),
                bound: f64::INFINITY,
                tol,
            });
        }
        let mu = mobius(n);
        if mu != 0 {
            let inner = prime_zeta_ksum_from(y, 1, v, chi, &inner_policy)?;
            rhs = rhs - inner * (mu as f64 * (n as f64).powf(-v));
        }
        n += 1;
    }
}
