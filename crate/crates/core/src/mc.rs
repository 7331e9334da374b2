//! Monte-Carlo moments of `log |L|` and `Re P` along pairs of lines.
//!
//! Heights are drawn from a counter-based stream (ChaCha8 keyed by the seed,
//! word position = sample index), so sample `i` is the same regardless of how
//! the index range is split across threads. Reductions run sequentially in
//! index order with compensated summation, so results are bit-reproducible.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{primes_up_to, PrincipalCharacter, Rational};
use crate::correlation::{cov, prime_l_cov_closed, CovKind, CovarianceSpec, Representation};
use crate::error::{Error, Result};
use crate::special::{em_terms_for, log_abs_l_line_with, CompensatedSum, ComplexPoint, LineTable, TruncationPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    IidUniform,
    Stratified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineKind {
    #[serde(rename = "logL")]
    LogL,
    #[serde(rename = "reP")]
    ReP,
}

/// Heights `t` uniform on `[t_start, t_start + t_span]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub t_start: f64,
    pub t_span: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub sampler: Sampler,
    /// Prime cutoff for the truncated `Re P` sums.
    pub prime_cutoff: u64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            t_start: 1e3,
            t_span: 1e5,
            n_samples: 20_000,
            seed: 0,
            sampler: Sampler::IidUniform,
            prime_cutoff: 10_000,
        }
    }
}

impl SamplingPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_span > 0.0) || !self.t_span.is_finite() || !self.t_start.is_finite() {
            return Err(Error::Domain(format!("sampling span must be positive, got {}", self.t_span)));
        }
        if self.n_samples < 2 {
            return Err(Error::InsufficientData(self.n_samples));
        }
        if self.prime_cutoff < 2 {
            return Err(Error::Domain("prime cutoff must be at least 2".into()));
        }
        Ok(())
    }

    /// Uniform variate in [0, 1) for sample `i`.
    pub fn uniform(&self, i: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_word_pos(2 * i as u128);
        (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn height(&self, i: usize) -> f64 {
        let u = self.uniform(i);
        let frac = match self.sampler {
            Sampler::IidUniform => u,
            Sampler::Stratified => (i as f64 + u) / self.n_samples as f64,
        };
        self.t_start + self.t_span * frac
    }
}

/// Two lines sampled at a shared `t`.
///
/// * vert: `X = f(σ + iαt)`, `Y = f(σ′ + iβt)`
/// * diag: `X = f(α(σ + it))`, `Y = f(β(σ′ + it))`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinePair {
    pub kind: CovKind,
    pub alpha: Rational,
    pub beta: Rational,
    pub sigma: f64,
    pub sigma2: f64,
    pub chi: PrincipalCharacter,
}

impl LinePair {
    pub fn from_spec(spec: &CovarianceSpec) -> Self {
        LinePair {
            kind: spec.kind,
            alpha: spec.alpha,
            beta: spec.beta,
            sigma: spec.sigma,
            sigma2: spec.sigma,
            chi: spec.chi.clone(),
        }
    }

    pub fn with_sigma2(mut self, sigma2: f64) -> Self {
        self.sigma2 = sigma2;
        self
    }

    /// (real part, height multiplier) of the X and Y lines.
    pub fn lines(&self) -> [(f64, f64); 2] {
        let (a, b) = (self.alpha.to_f64(), self.beta.to_f64());
        match self.kind {
            CovKind::Vert => [(self.sigma, a), (self.sigma2, b)],
            CovKind::Diag => [(a * self.sigma, a), (b * self.sigma2, b)],
        }
    }
}

/// Paired samples; pairs whose evaluation failed are dropped and counted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineStreams {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub rejected: usize,
    /// Samples with `|ζ|` below the near-zero threshold (kept).
    pub flagged: usize,
}

struct RePLine {
    omega: f64,
    ln_p: Vec<f64>,
    weight: Vec<f64>,
}

impl RePLine {
    fn new(sigma: f64, omega: f64, cutoff: u64, chi: &PrincipalCharacter) -> Self {
        let primes = primes_up_to(cutoff);
        let ps: Vec<u64> = primes.iter().copied().filter(|&p| !chi.divides_modulus(p)).collect();
        RePLine {
            omega,
            ln_p: ps.iter().map(|&p| (p as f64).ln()).collect(),
            weight: ps.iter().map(|&p| (p as f64).powf(-sigma)).collect(),
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let wt = self.omega * t;
        let mut acc = CompensatedSum::new();
        for (l, w) in self.ln_p.iter().zip(&self.weight) {
            acc.add(w * (wt * l).cos());
        }
        acc.value()
    }
}

/// Evaluate both lines of `pair` at the plan's heights.
pub fn sample_line(kind: LineKind, pair: &LinePair, plan: &SamplingPlan, policy: &TruncationPolicy) -> Result<LineStreams> {
    plan.validate()?;
    let lines = pair.lines();
    let t_max = plan.t_start.abs().max((plan.t_start + plan.t_span).abs());
    for &(s, w) in &lines {
        if !(w > 0.0) {
            return Err(Error::Domain("line height multipliers must be positive".into()));
        }
        match kind {
            LineKind::LogL if !(s > 0.0) => {
                return Err(Error::Domain(format!("log|L| lines need a positive real part, got {s}")))
            }
            LineKind::ReP if !(s > 1.0) => {
                return Err(Error::Domain(format!(
                    "Re P lines are sampled only where the prime series converges (real part > 1), got {s}"
                )))
            }
            _ => {}
        }
    }

    let results: Vec<Option<(f64, f64, bool)>> = match kind {
        LineKind::LogL => {
            let tables: Vec<LineTable> = lines
                .iter()
                .map(|&(s, w)| LineTable::new(s, em_terms_for(w * t_max)))
                .collect();
            (0..plan.n_samples)
                .into_par_iter()
                .map(|i| {
                    let t = plan.height(i);
                    let mut out = [0.0; 2];
                    let mut near = false;
                    for (k, &(s, w)) in lines.iter().enumerate() {
                        let p = ComplexPoint { sigma: s, t: w * t };
                        match log_abs_l_line_with(p, &pair.chi, policy, Some(&tables[k])) {
                            Ok(v) if v.value.is_finite() => {
                                out[k] = v.value;
                                near |= v.near_zero;
                            }
                            _ => return None,
                        }
                    }
                    Some((out[0], out[1], near))
                })
                .collect()
        }
        LineKind::ReP => {
            let evals: Vec<RePLine> = lines
                .iter()
                .map(|&(s, w)| RePLine::new(s, w, plan.prime_cutoff, &pair.chi))
                .collect();
            (0..plan.n_samples)
                .into_par_iter()
                .map(|i| {
                    let t = plan.height(i);
                    Some((evals[0].eval(t), evals[1].eval(t), false))
                })
                .collect()
        }
    };

    let mut streams = LineStreams {
        xs: Vec::with_capacity(results.len()),
        ys: Vec::with_capacity(results.len()),
        rejected: 0,
        flagged: 0,
    };
    for r in results {
        match r {
            Some((x, y, near)) => {
                streams.xs.push(x);
                streams.ys.push(y);
                streams.flagged += near as usize;
            }
            None => streams.rejected += 1,
        }
    }
    Ok(streams)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    /// Sample mean of `X·Y` (not mean-subtracted).
    pub raw_moment: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub std_x: f64,
    pub std_y: f64,
    /// Standard error of `raw_moment`.
    pub std_error: f64,
    /// Mean-subtracted covariance, as a diagnostic.
    pub centered_cov: f64,
    pub n_used: usize,
    pub rejected: usize,
    pub flagged: usize,
    /// Set when the product stream is constant (standard error reported as 0).
    pub zero_variance: bool,
}

impl MomentEstimate {
    /// `|mean| / (std/√n)` for each stream.
    pub fn mean_z_scores(&self) -> (f64, f64) {
        let rt = (self.n_used as f64).sqrt();
        let z = |m: f64, s: f64| if s > 0.0 { m.abs() / (s / rt) } else { 0.0 };
        (z(self.mean_x, self.std_x), z(self.mean_y, self.std_y))
    }
}

fn mean_and_std(v: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mut s = CompensatedSum::new();
    for x in v.clone() {
        s.add(x);
    }
    let mean = s.value() / n as f64;
    let mut q = CompensatedSum::new();
    for x in v {
        q.add((x - mean) * (x - mean));
    }
    (mean, (q.value() / (n as f64 - 1.0)).sqrt())
}

pub fn estimate_cov(streams: &LineStreams) -> Result<MomentEstimate> {
    let n = streams.xs.len();
    if streams.ys.len() != n {
        return Err(Error::Precondition("streams must have equal length".into()));
    }
    if n < 2 {
        return Err(Error::InsufficientData(n));
    }
    let prods = streams.xs.iter().zip(&streams.ys).map(|(x, y)| x * y);
    let (raw, sd_prod) = mean_and_std(prods, n);
    let (mx, sx) = mean_and_std(streams.xs.iter().copied(), n);
    let (my, sy) = mean_and_std(streams.ys.iter().copied(), n);
    let zero_variance = !(sd_prod > 0.0);
    Ok(MomentEstimate {
        raw_moment: raw,
        mean_x: mx,
        mean_y: my,
        std_x: sx,
        std_y: sy,
        std_error: if zero_variance { 0.0 } else { sd_prod / (n as f64).sqrt() },
        centered_cov: raw - mx * my,
        n_used: n,
        rejected: streams.rejected,
        flagged: streams.flagged,
        zero_variance,
    })
}

/// `|closed − estimate| / SE`, or `None` when the standard error vanishes.
pub fn z_score(closed: f64, est: &MomentEstimate) -> Option<f64> {
    if est.std_error > 0.0 {
        Some((closed - est.raw_moment).abs() / est.std_error)
    } else if closed == est.raw_moment {
        Some(0.0)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub line_kind: LineKind,
    pub pair: LinePair,
    pub plan: SamplingPlan,
    pub closed_form: f64,
    pub representation: Option<Representation>,
    pub estimate: MomentEstimate,
    pub z_score: Option<f64>,
    pub mean_z_x: f64,
    pub mean_z_y: f64,
}

impl ComparisonReport {
    fn new(
        line_kind: LineKind,
        pair: LinePair,
        plan: SamplingPlan,
        closed_form: f64,
        representation: Option<Representation>,
        estimate: MomentEstimate,
    ) -> Self {
        let (mean_z_x, mean_z_y) = estimate.mean_z_scores();
        ComparisonReport {
            line_kind,
            pair,
            plan,
            closed_form,
            representation,
            z_score: z_score(closed_form, &estimate),
            estimate,
            mean_z_x,
            mean_z_y,
        }
    }

    pub fn within(&self, z_max: f64) -> bool {
        self.z_score.is_some_and(|z| z <= z_max)
    }
}

/// `E{log|L| · log|L|}` against the closed-form covariance of `spec`.
pub fn verify_log_l_covariance(spec: &CovarianceSpec, plan: &SamplingPlan, policy: &TruncationPolicy) -> Result<ComparisonReport> {
    let closed = cov(spec, policy)?;
    let pair = LinePair::from_spec(&spec.ordered());
    let streams = sample_line(LineKind::LogL, &pair, plan, policy)?;
    let est = estimate_cov(&streams)?;
    Ok(ComparisonReport::new(
        LineKind::LogL,
        pair,
        *plan,
        closed.value,
        Some(closed.representation),
        est,
    ))
}

/// `E{Re P · Re P}` against `½ P(σ+σ′)` (α = β) or 0.
pub fn verify_prime_l_covariance(pair: &LinePair, plan: &SamplingPlan, policy: &TruncationPolicy) -> Result<ComparisonReport> {
    let closed = prime_l_cov_closed(pair.kind, pair.alpha, pair.beta, pair.sigma, pair.sigma2, &pair.chi, policy)?;
    let streams = sample_line(LineKind::ReP, pair, plan, policy)?;
    let est = estimate_cov(&streams)?;
    Ok(ComparisonReport::new(LineKind::ReP, pair.clone(), *plan, closed, None, est))
}

/// Empirical correlation `mean(XY)/√(mean(X²) mean(Y²))` with a batch-means standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCorrelation {
    pub rho: f64,
    pub std_error: f64,
    pub batches: usize,
    pub n_used: usize,
}

pub const CORRELATION_BATCHES: usize = 20;

fn raw_corr(xs: &[f64], ys: &[f64]) -> f64 {
    let (mut sxy, mut sxx, mut syy) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
    for (x, y) in xs.iter().zip(ys) {
        sxy.add(x * y);
        sxx.add(x * x);
        syy.add(y * y);
    }
    sxy.value() / (sxx.value() * syy.value()).sqrt()
}

pub fn empirical_correlation(streams: &LineStreams) -> Result<EmpiricalCorrelation> {
    let n = streams.xs.len();
    if n < 2 * CORRELATION_BATCHES {
        return Err(Error::InsufficientData(n));
    }
    let rho = raw_corr(&streams.xs, &streams.ys);
    let size = n / CORRELATION_BATCHES;
    let batch: Vec<f64> = (0..CORRELATION_BATCHES)
        .map(|b| raw_corr(&streams.xs[b * size..(b + 1) * size], &streams.ys[b * size..(b + 1) * size]))
        .collect();
    let mean = batch.iter().sum::<f64>() / batch.len() as f64;
    let var = batch.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (batch.len() as f64 - 1.0);
    Ok(EmpiricalCorrelation {
        rho,
        std_error: (var / batch.len() as f64).sqrt(),
        batches: CORRELATION_BATCHES,
        n_used: n,
    })
}
