//! Nonlocal diagonal and vertical covariance / correlation of `log |L(s, χ₀)|`.
//!
//! Every covariance has the shape `c · S(x)` with
//! `S(x) = Σ_k P_χ₀(kx)/k² = Σ_{p∤M} Li₂(p^{−x})`:
//!
//! | kind | β \| α                        | β ∤ α                    |
//! |------|-------------------------------|--------------------------|
//! | diag | c = β/(2α), x = 2ασ           | c = 1/(2αβ), x = 2αβσ    |
//! | vert | c = β/(2α), x = (1 + α/β)σ    | c = 1/(2αβ), x = (α+β)σ  |
//!
//! The Li₂ prime sum needs `x > 1`; the k-series, with the Möbius
//! continuation of `P_χ₀`, reaches every `x > 0` away from `x = 1/j`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{PrincipalCharacter, Rational};
use crate::error::{Error, Result};
use crate::special::{li2_prime_sum, prime_zeta, prime_zeta_ksum, Estimate, TruncationPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovKind {
    /// Points `α(σ+it)` and `β(σ+it)`.
    Diag,
    /// Points `σ+iαt` and `σ+iβt`.
    Vert,
}

impl fmt::Display for CovKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CovKind::Diag => "diag",
            CovKind::Vert => "vert",
        })
    }
}

impl FromStr for CovKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diag" => Ok(CovKind::Diag),
            "vert" => Ok(CovKind::Vert),
            _ => Err(Error::Parse(format!("unknown kind '{s}' (expected diag or vert)"))),
        }
    }
}

/// Which of the equivalent series was summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// `Σ_p Li₂(p^{−x})`, x > 1.
    Li2PrimeSum,
    /// `Σ_k P(kx)/k²` with continued prime zeta values.
    ContinuedSeries,
}

/// One covariance cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSpec {
    pub kind: CovKind,
    pub alpha: Rational,
    pub beta: Rational,
    pub sigma: f64,
    pub chi: PrincipalCharacter,
}

impl CovarianceSpec {
    pub fn new(kind: CovKind, alpha: Rational, beta: Rational, sigma: f64, chi: PrincipalCharacter) -> Result<Self> {
        if !alpha.is_positive() || !beta.is_positive() {
            return Err(Error::Domain(format!("alpha and beta must be positive, got {alpha}, {beta}")));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        Ok(CovarianceSpec {
            kind,
            alpha,
            beta,
            sigma,
            chi,
        })
    }

    /// Same cell with α and β ordered so that α ≥ β.
    pub fn ordered(&self) -> CovarianceSpec {
        let mut s = self.clone();
        if s.alpha < s.beta {
            std::mem::swap(&mut s.alpha, &mut s.beta);
        }
        s
    }

    pub fn with_pair(&self, alpha: Rational, beta: Rational) -> CovarianceSpec {
        CovarianceSpec {
            alpha,
            beta,
            ..self.clone()
        }
    }

    /// β | α for the ordered pair.
    pub fn is_resonant(&self) -> bool {
        let o = self.ordered();
        o.beta.divides(&o.alpha)
    }

    /// Prefactor `c` and argument `x` of `c · S(x)` (ordered pair).
    pub fn coefficient_and_argument(&self) -> (f64, f64) {
        let o = self.ordered();
        let (a, b) = (o.alpha.to_f64(), o.beta.to_f64());
        let resonant = o.beta.divides(&o.alpha);
        let sigma = o.sigma;
        match (o.kind, resonant) {
            (CovKind::Diag, true) => (b / (2.0 * a), 2.0 * a * sigma),
            (CovKind::Diag, false) => (1.0 / (2.0 * a * b), 2.0 * o.alpha.mul(o.beta).to_f64() * sigma),
            (CovKind::Vert, true) => (b / (2.0 * a), (1.0 + o.alpha.div(o.beta).to_f64()) * sigma),
            (CovKind::Vert, false) => (1.0 / (2.0 * a * b), o.alpha.add(o.beta).to_f64() * sigma),
        }
    }
}

/// A covariance together with the series that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovValue {
    pub value: f64,
    pub error: f64,
    pub representation: Representation,
    pub resonant: bool,
}

/// `S(x) = Σ_{p∤M} Li₂(p^{−x})` by the requested (or automatically chosen) series.
pub fn li2_series(
    x: f64,
    chi: &PrincipalCharacter,
    policy: &TruncationPolicy,
    representation: Option<Representation>,
) -> Result<(Estimate, Representation)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("covariance argument must be positive, got {x}")));
    }
    let repr = representation.unwrap_or(if x > 1.0 {
        Representation::Li2PrimeSum
    } else {
        Representation::ContinuedSeries
    });
    let est = match repr {
        Representation::Li2PrimeSum => li2_prime_sum(x, chi, policy)?,
        Representation::ContinuedSeries => prime_zeta_ksum(x, chi, policy)?,
    };
    Ok((est, repr))
}

fn cov_with(spec: &CovarianceSpec, policy: &TruncationPolicy, representation: Option<Representation>) -> Result<CovValue> {
    let (c, x) = spec.coefficient_and_argument();
    let (s, repr) = li2_series(x, &spec.chi, policy, representation)?;
    Ok(CovValue {
        value: c * s.value,
        error: c * s.error,
        representation: repr,
        resonant: spec.is_resonant(),
    })
}

/// Covariance of the cell's kind; α < β is completed symmetrically.
pub fn cov(spec: &CovarianceSpec, policy: &TruncationPolicy) -> Result<CovValue> {
    cov_with(spec, policy, None)
}

/// [`cov`] forced through one representation.
pub fn cov_repr(spec: &CovarianceSpec, policy: &TruncationPolicy, representation: Representation) -> Result<CovValue> {
    cov_with(spec, policy, Some(representation))
}

fn expect_kind(spec: &CovarianceSpec, kind: CovKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::Precondition(format!("expected a {kind} spec, got {}", spec.kind)));
    }
    Ok(())
}

/// `R^diag(α, β, σ)`.
pub fn cov_diag(spec: &CovarianceSpec, policy: &TruncationPolicy) -> Result<CovValue> {
    expect_kind(spec, CovKind::Diag)?;
    cov(spec, policy)
}

/// `R^vert(α, β, σ)`.
pub fn cov_vert(spec: &CovarianceSpec, policy: &TruncationPolicy) -> Result<CovValue> {
    expect_kind(spec, CovKind::Vert)?;
    cov(spec, policy)
}

/// Correlation `R(α,β) / √(R(α,α) R(β,β))`; for vertical pairs the
/// denominator is `R(1,1)` because every `R^vert(α,α,σ)` equals it.
pub fn corr(spec: &CovarianceSpec, policy: &TruncationPolicy) -> Result<f64> {
    if spec.alpha == spec.beta {
        if !(spec.sigma > 0.0) {
            return Err(Error::Domain(format!("sigma must be positive, got {}", spec.sigma)));
        }
        return Ok(1.0);
    }
    let o = spec.ordered();
    let num = cov(&o, policy)?.value;
    let den = match o.kind {
        CovKind::Diag => {
            let ra = cov(&o.with_pair(o.alpha, o.alpha), policy)?.value;
            let rb = cov(&o.with_pair(o.beta, o.beta), policy)?.value;
            (ra * rb).sqrt()
        }
        CovKind::Vert => cov(&o.with_pair(Rational::integer(1), Rational::integer(1)), policy)?.value,
    };
    if !(den > 0.0) {
        return Err(Error::Degenerate(format!("{} alpha={} beta={} sigma={}", o.kind, o.alpha, o.beta, o.sigma)));
    }
    Ok(num / den)
}

/// Leading-order decay of the correlation as α grows, with base `p` the
/// smallest prime not dividing the modulus.
pub fn corr_asymptotic(spec: &CovarianceSpec) -> f64 {
    let o = spec.ordered();
    let (a, b) = (o.alpha.to_f64(), o.beta.to_f64());
    let p = o.chi.smallest_excluded_prime() as f64;
    let s = o.sigma;
    match (o.kind, o.is_resonant()) {
        (CovKind::Diag, true) => b / a * p.powf((b - a) * s),
        (CovKind::Diag, false) => 1.0 / (a * b) * p.powf((b + a - 2.0 * a * b) * s),
        (CovKind::Vert, true) => b / a * p.powf((1.0 - a / b) * s),
        (CovKind::Vert, false) => 1.0 / (a * b) * p.powf((2.0 - b - a) * s),
    }
}

/// `E{Re P(σ+iαt) Re P(σ′+iβt)}`: `½ P_χ₀(σ+σ′)` when α = β, zero otherwise.
///
/// For `kind = diag` the points are `α(σ+it)` and `β(σ′+it)`, so the
/// nonzero case is `½ P_χ₀(α(σ+σ′))`.
pub fn prime_l_cov_closed(
    kind: CovKind,
    alpha: Rational,
    beta: Rational,
    sigma: f64,
    sigma2: f64,
    chi: &PrincipalCharacter,
    policy: &TruncationPolicy,
) -> Result<f64> {
    if !alpha.is_positive() || !beta.is_positive() {
        return Err(Error::Domain("alpha and beta must be positive".into()));
    }
    let x = match kind {
        CovKind::Vert => sigma + sigma2,
        CovKind::Diag => alpha.to_f64() * (sigma + sigma2),
    };
    if !(x > 0.0) {
        return Err(Error::Domain(format!("need a positive combined real part, got {x}")));
    }
    if alpha != beta {
        return Ok(0.0);
    }
    Ok(0.5 * prime_zeta(x, chi, policy)?.value)
}

/// Round half-to-even at `digits` decimals, for display only.
pub fn round_half_even(x: f64, digits: i32) -> f64 {
    let scale = 10f64.powi(digits);
    (x * scale).round_ties_even() / scale
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub alpha: Rational,
    pub beta: Rational,
    pub resonant: bool,
    pub rho: Option<f64>,
    pub reason: Option<String>,
}

/// Correlation matrix over `alphas × betas`; absent cells carry a reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub kind: CovKind,
    pub sigma: f64,
    pub modulus: u64,
    pub alphas: Vec<Rational>,
    pub betas: Vec<Rational>,
    pub values: Vec<Vec<Option<f64>>>,
    pub reasons: Vec<Vec<Option<String>>>,
    pub divis_mask: Vec<Vec<bool>>,
}

impl CorrelationTable {
    pub fn cells(&self) -> Vec<TableCell> {
        let mut out = Vec::with_capacity(self.alphas.len() * self.betas.len());
        for (i, a) in self.alphas.iter().enumerate() {
            for (j, b) in self.betas.iter().enumerate() {
                out.push(TableCell {
                    alpha: *a,
                    beta: *b,
                    resonant: self.divis_mask[i][j],
                    rho: self.values[i][j],
                    reason: self.reasons[i][j].clone(),
                });
            }
        }
        out
    }

    pub fn get(&self, alpha: Rational, beta: Rational) -> Option<f64> {
        let i = self.alphas.iter().position(|a| *a == alpha)?;
        let j = self.betas.iter().position(|b| *b == beta)?;
        self.values[i][j]
    }

    pub fn absent_count(&self) -> usize {
        self.values.iter().flatten().filter(|v| v.is_none()).count()
    }

    /// Rows of rounded values, `-` for absent cells.
    pub fn display_rows(&self) -> Vec<Vec<String>> {
        self.values
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| match v {
                        Some(x) => format!("{:.4}", round_half_even(*x, 4)),
                        None => "-".to_string(),
                    })
                    .collect()
            })
            .collect()
    }
}

fn is_singular(e: &Error) -> bool {
    matches!(e, Error::Singularity { .. })
}

/// Build the correlation table. Each distinct series argument is evaluated
/// once (in parallel); cells hitting a singular point are marked absent,
/// any other failure aborts with an error naming the cell.
pub fn build_table(
    kind: CovKind,
    alphas: &[Rational],
    betas: &[Rational],
    sigma: f64,
    chi: &PrincipalCharacter,
    policy: &TruncationPolicy,
) -> Result<CorrelationTable> {
    if alphas.is_empty() || betas.is_empty() {
        return Err(Error::EmptyDomain("table needs at least one alpha and one beta".into()));
    }
    let base = CovarianceSpec::new(kind, alphas[0], betas[0], sigma, chi.clone())?;
    for r in alphas.iter().chain(betas) {
        if !r.is_positive() {
            return Err(Error::Domain(format!("alpha and beta must be positive, got {r}")));
        }
    }

    // (numerator, [denominator specs]) per cell
    let cell_specs = |a: Rational, b: Rational| -> Vec<CovarianceSpec> {
        let o = base.with_pair(a, b).ordered();
        match kind {
            CovKind::Diag => vec![o.clone(), o.with_pair(o.alpha, o.alpha), o.with_pair(o.beta, o.beta)],
            CovKind::Vert => vec![o.clone(), o.with_pair(Rational::integer(1), Rational::integer(1))],
        }
    };
    let mut args: Vec<u64> = Vec::new();
    for &a in alphas {
        for &b in betas {
            if a != b {
                for s in cell_specs(a, b) {
                    args.push(s.coefficient_and_argument().1.to_bits());
                }
            }
        }
    }
    args.sort_unstable();
    args.dedup();
    let evaluated: HashMap<u64, Result<f64>> = args
        .par_iter()
        .map(|&bits| {
            let r = li2_series(f64::from_bits(bits), chi, policy, None).map(|(e, _)| e.value);
            (bits, r)
        })
        .collect();

    let lookup = |s: &CovarianceSpec| -> Result<f64> {
        let (c, x) = s.coefficient_and_argument();
        evaluated[&x.to_bits()].clone().map(|v| c * v)
    };

    let mut values = vec![vec![None; betas.len()]; alphas.len()];
    let mut reasons = vec![vec![None; betas.len()]; alphas.len()];
    let mut mask = vec![vec![false; betas.len()]; alphas.len()];
    for (i, &a) in alphas.iter().enumerate() {
        for (j, &b) in betas.iter().enumerate() {
            mask[i][j] = a.divides(&b) || b.divides(&a);
            if a == b {
                values[i][j] = Some(1.0);
                continue;
            }
            let specs = cell_specs(a, b);
            let parts: Result<Vec<f64>> = specs.iter().map(lookup).collect();
            match parts {
                Ok(p) => {
                    let den = if p.len() == 3 { (p[1] * p[2]).sqrt() } else { p[1] };
                    if !(den > 0.0) {
                        return Err(Error::Table {
                            alpha: a.to_string(),
                            beta: b.to_string(),
                            source: Box::new(Error::Degenerate("zero denominator".into())),
                        });
                    }
                    values[i][j] = Some(p[0] / den);
                }
                Err(e) if is_singular(&e) => reasons[i][j] = Some(e.to_string()),
                Err(e) => {
                    return Err(Error::Table {
                        alpha: a.to_string(),
                        beta: b.to_string(),
                        source: Box::new(e),
                    })
                }
            }
        }
    }
    Ok(CorrelationTable {
        kind,
        sigma,
        modulus: chi.modulus(),
        alphas: alphas.to_vec(),
        betas: betas.to_vec(),
        values,
        reasons,
        divis_mask: mask,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn r(n: i64) -> Rational {
        Rational::integer(n)
    }

    fn spec(kind: CovKind, a: i64, b: i64, sigma: f64) -> CovarianceSpec {
        CovarianceSpec::new(kind, r(a), r(b), sigma, PrincipalCharacter::trivial()).unwrap()
    }

    /// `Σ_p Σ_k p^{−kx}/k²` over primes ≤ 10^5, independent of the library's tail logic.
    fn double_series(x: f64) -> f64 {
        let primes = crate::arith::sieve_primes(100_000).unwrap();
        let mut s = 0.0;
        for &p in &primes {
            let z = (p as f64).powf(-x);
            let mut zk = z;
            for k in 1..200 {
                let t = zk / (k * k) as f64;
                s += t;
                if t < 1e-20 {
                    break;
                }
                zk *= z;
            }
        }
        s
    }

    #[test]
    fn kinds_parse() {
        assert_eq!("diag".parse::<CovKind>().unwrap(), CovKind::Diag);
        assert!("x".parse::<CovKind>().is_err());
    }

    #[test]
    fn diag_examples() {
        let p = TruncationPolicy::default();
        let a = cov_diag(&spec(CovKind::Diag, 4, 2, 1.0), &p).unwrap().value;
        let b = cov_diag(&spec(CovKind::Diag, 4, 4, 1.0), &p).unwrap().value;
        assert_abs_diff_eq!(a, 0.5 * b, epsilon = 1e-14);
        let c = cov_diag(&spec(CovKind::Diag, 3, 2, 1.0), &p).unwrap();
        assert!(!c.resonant);
        assert_abs_diff_eq!(c.value, double_series(12.0) / 12.0, epsilon = 1e-12);
    }

    #[test]
    fn vert_examples() {
        let p = TruncationPolicy::default();
        let v = cov_vert(&spec(CovKind::Vert, 2, 1, 1.0), &p).unwrap().value;
        assert_abs_diff_eq!(v, double_series(3.0) / 4.0, epsilon = 1e-9);
        let w = cov_vert(&spec(CovKind::Vert, 3, 2, 1.0), &p).unwrap().value;
        assert_abs_diff_eq!(w, double_series(5.0) / 12.0, epsilon = 1e-11);
        assert!(cov_vert(&spec(CovKind::Diag, 3, 2, 1.0), &p).is_err());
    }

    #[test]
    fn correlation_basics() {
        let p = TruncationPolicy::default();
        assert_eq!(corr(&spec(CovKind::Diag, 7, 7, 0.3), &p).unwrap(), 1.0);
        let r42 = corr(&spec(CovKind::Diag, 4, 2, 1.0), &p).unwrap();
        let r52 = corr(&spec(CovKind::Diag, 5, 2, 1.0), &p).unwrap();
        assert!(r42 > 0.0 && r42 < 1.0 && r42 > r52);
        let swapped = corr(&spec(CovKind::Diag, 2, 4, 1.0), &p).unwrap();
        assert_eq!(r42, swapped);
    }

    #[test]
    fn continued_matches_prime_sum() {
        let p = TruncationPolicy::default();
        for kind in [CovKind::Diag, CovKind::Vert] {
            for (a, b) in [(2, 2), (4, 3), (6, 2)] {
                for sigma in [0.75, 1.0] {
                    let s = spec(kind, a, b, sigma);
                    let x = s.coefficient_and_argument().1;
                    if x <= 1.0 {
                        continue;
                    }
                    let u = cov_repr(&s, &p, Representation::Li2PrimeSum).unwrap().value;
                    let v = cov_repr(&s, &p, Representation::ContinuedSeries).unwrap().value;
                    assert!((u - v).abs() <= 2e-10, "{kind} {a} {b} {sigma}: {u} {v}");
                }
            }
        }
    }

    #[test]
    fn continued_form_below_one() {
        let p = TruncationPolicy::default();
        // vert α=β=1 at σ=0.4: x = 0.8 < 1, only the continued series applies
        let v = cov(&spec(CovKind::Vert, 1, 1, 0.4), &p).unwrap();
        assert_eq!(v.representation, Representation::ContinuedSeries);
        assert!(v.value.is_finite());
        assert!(cov_repr(&spec(CovKind::Vert, 1, 1, 0.4), &p, Representation::Li2PrimeSum).is_err());
        // x = 1/2 is singular
        assert!(matches!(cov(&spec(CovKind::Vert, 1, 1, 0.25), &p), Err(Error::Singularity { .. })));
    }

    #[test]
    fn prime_l_closed_form() {
        let p = TruncationPolicy::default();
        let chi1 = PrincipalCharacter::trivial();
        let v = prime_l_cov_closed(CovKind::Vert, r(2), r(2), 1.0, 1.0, &chi1, &p).unwrap();
        let p2 = prime_zeta(2.0, &chi1, &p).unwrap().value;
        assert_abs_diff_eq!(v, 0.5 * p2, epsilon = 1e-15);
        assert_eq!(prime_l_cov_closed(CovKind::Vert, r(2), r(3), 0.7, 0.2, &chi1, &p).unwrap(), 0.0);
        let chi2 = PrincipalCharacter::new(2).unwrap();
        let w = prime_l_cov_closed(CovKind::Vert, r(1), r(1), 1.0, 1.0, &chi2, &p).unwrap();
        assert_abs_diff_eq!(w, 0.5 * (p2 - 0.25), epsilon = 1e-10);
        let d = prime_l_cov_closed(CovKind::Diag, r(2), r(2), 1.0, 1.0, &chi1, &p).unwrap();
        assert_abs_diff_eq!(d, 0.5 * prime_zeta(4.0, &chi1, &p).unwrap().value, epsilon = 1e-15);
    }

    #[test]
    fn asymptotic_formulas() {
        assert_eq!(corr_asymptotic(&spec(CovKind::Diag, 5, 5, 1.0)), 1.0);
        let s = spec(CovKind::Vert, 4, 2, 1.0);
        assert_abs_diff_eq!(corr_asymptotic(&s), 0.5 * 0.5, epsilon = 1e-15);
    }

    #[test]
    fn half_even_rounding() {
        assert_eq!(round_half_even(0.12345, 4), 0.1234);
        assert_eq!(round_half_even(0.5, 0), 0.0);
        assert_eq!(round_half_even(1.5, 0), 2.0);
    }

    #[test]
    fn small_table() {
        let p = TruncationPolicy::default();
        let ns: Vec<Rational> = (1..=4).map(r).collect();
        let t = build_table(CovKind::Diag, &ns, &ns, 1.0, &PrincipalCharacter::trivial(), &p).unwrap();
        for i in 0..4 {
            assert_eq!(t.values[i][i], Some(1.0));
            for j in 0..4 {
                assert_eq!(t.values[i][j], t.values[j][i]);
            }
        }
        let direct = corr(&spec(CovKind::Diag, 4, 3, 1.0), &p).unwrap();
        assert_eq!(t.get(r(4), r(3)).unwrap(), direct);
        assert!(t.divis_mask[3][1] && !t.divis_mask[3][2]);
    }

    #[test]
    fn singular_cells_are_absent() {
        let p = TruncationPolicy::default();
        let ns: Vec<Rational> = (1..=3).map(r).collect();
        // σ = 1/2: R^diag(1,1) needs S(1), which is singular
        let t = build_table(CovKind::Diag, &ns, &ns, 0.5, &PrincipalCharacter::trivial(), &p).unwrap();
        assert!(t.absent_count() > 0);
        assert!(t.get(r(1), r(2)).is_none());
        assert!(t.get(r(3), r(2)).is_some());
    }
}
