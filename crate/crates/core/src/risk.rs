//! Squared-error risk of the Good-Turing estimator.
//!
//! Expanding `(Φ1/n - M0)^2` over pairs of symbols and taking expectations
//! term by term gives the exact finite-`n` risk
//!
//! ```text
//! R_n = (1/n) Σ_{u≠v} P(u,v) [n (p_u + p_v)^2 - 1]
//!     + (1/n) Σ_u [p_u (1 - p_u)^(n-1) + n p_u^2 (1 - p_u)^n]
//! P(u,v) = p_u p_v (1 - p_u - p_v)^(n-2)
//! ```
//!
//! with no asymptotic step. Dropping the `o(1/n)` pieces yields the
//! occupancy-moment form `(1/n) E[2Φ2/n + (Φ1/n)(1 - Φ1/n)]`, evaluated by
//! [`asymptotic_risk_gt`] from closed-form moments of `Φ1` and `Φ2`.
//!
//! Symmetric families (uniform, `P_c`) collapse the pair sum to a handful
//! of probability classes; the general path is the `O(k^2)` double sum.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{missing_mass_unchecked, DistSpec, Distribution, SymbolCounts};
use crate::error::ensure;
use crate::estimators::Estimator;
use crate::numeric::{self, compensated_sum, pow1m, Maximum, NeumaierSum};
use crate::{Error, Result};

/// Largest `k^n` that [`brute_force_risk`] will enumerate.
pub const BRUTE_FORCE_LIMIT: u64 = 10_000_000;

/// Relative slack allowed by the inequality checks.
pub const INEQUALITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskMethod {
    Exact,
    Asymptotic,
    ClosedFormUniform,
    BruteForce,
    MonteCarlo,
}

impl fmt::Display for RiskMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Exact => "exact",
            Self::Asymptotic => "asymptotic",
            Self::ClosedFormUniform => "closed_form_uniform",
            Self::BruteForce => "brute_force",
            Self::MonteCarlo => "monte_carlo",
        };
        f.write_str(s)
    }
}

/// Pair and diagonal contributions to the exact risk, each already divided
/// by `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskTerms {
    pub pair: f64,
    pub diagonal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    pub n: usize,
    pub dist: String,
    pub method: RiskMethod,
    pub risk: f64,
    pub normalized_risk: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<RiskTerms>,
}

impl RiskReport {
    pub fn new(n: usize, dist: impl Into<String>, method: RiskMethod, risk: f64) -> Self {
        // Cancellation in the pair sum can leave a few ulps below zero.
        let risk = if risk < 0.0 && risk > -1e-15 {
            0.0
        } else {
            risk
        };
        Self {
            n,
            dist: dist.into(),
            method,
            risk,
            normalized_risk: n as f64 * risk,
            stderr: None,
            reps: None,
            terms: None,
        }
    }

    pub fn with_stderr(mut self, stderr: f64, reps: u64) -> Self {
        self.stderr = Some(stderr);
        self.reps = Some(reps);
        self
    }

    pub fn with_terms(mut self, terms: RiskTerms) -> Self {
        self.terms = Some(terms);
        self
    }
}

#[inline]
fn pair_kernel(p: f64, q: f64, n: f64) -> f64 {
    p * q * pow1m(p + q, n - 2.0)
}

#[inline]
fn pair_term(p: f64, q: f64, n: f64) -> f64 {
    let s = p + q;
    pair_kernel(p, q, n) * (n * s * s - 1.0)
}

#[inline]
fn diagonal_term(p: f64, n: f64) -> f64 {
    p * pow1m(p, n - 1.0) + n * p * p * pow1m(p, n)
}

/// `Σ_{u≠v} f(p_u, p_v)` over ordered pairs. Rows are summed in parallel
/// with compensation and merged in index order, so the result does not
/// depend on the thread count.
fn ordered_pair_sum<F>(probs: &[f64], f: F) -> f64
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let rows: Vec<NeumaierSum> = probs
        .par_iter()
        .enumerate()
        .map(|(u, &p)| {
            let mut acc = NeumaierSum::new();
            if p > 0.0 {
                for (v, &q) in probs.iter().enumerate() {
                    if v != u && q > 0.0 {
                        acc += f(p, q);
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = NeumaierSum::new();
    for row in &rows {
        total.merge(row);
    }
    total.value()
}

/// `Σ_{u≠v} f(p_u, p_v)` for a distribution given as `(probability,
/// multiplicity)` classes.
fn class_pair_sum<F: Fn(f64, f64) -> f64>(classes: &[(f64, f64)], f: F) -> f64 {
    let mut acc = NeumaierSum::new();
    for (a, &(p, ma)) in classes.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (b, &(q, mb)) in classes.iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            let pairs = if a == b { ma * (mb - 1.0) } else { ma * mb };
            if pairs > 0.0 {
                acc += pairs * f(p, q);
            }
        }
    }
    acc.value()
}

fn class_sum<F: Fn(f64) -> f64>(classes: &[(f64, f64)], f: F) -> f64 {
    compensated_sum(classes.iter().filter(|c| c.0 > 0.0).map(|&(p, m)| m * f(p)))
}

fn check_risk_n(n: usize) -> Result<()> {
    ensure!(n >= 2, "exact Good-Turing risk needs n >= 2, got {n}");
    Ok(())
}

/// Exact Good-Turing risk by the `O(k^2)` ordered-pair sum.
pub fn exact_risk_gt(d: &Distribution, n: usize) -> Result<RiskReport> {
    check_risk_n(n)?;
    let nf = n as f64;
    let pair = ordered_pair_sum(d.probs(), |p, q| pair_term(p, q, nf)) / nf;
    let diagonal = compensated_sum(d.probs().iter().map(|&p| diagonal_term(p, nf))) / nf;
    Ok(
        RiskReport::new(n, d.label(), RiskMethod::Exact, pair + diagonal)
            .with_terms(RiskTerms { pair, diagonal }),
    )
}

/// Exact Good-Turing risk for a distribution described by classes of equal
/// probabilities `(p, multiplicity)`.
pub fn exact_risk_gt_classes(
    classes: &[(f64, f64)],
    n: usize,
    label: &str,
    method: RiskMethod,
) -> Result<RiskReport> {
    check_risk_n(n)?;
    let nf = n as f64;
    let pair = class_pair_sum(classes, |p, q| pair_term(p, q, nf)) / nf;
    let diagonal = class_sum(classes, |p| diagonal_term(p, nf)) / nf;
    Ok(RiskReport::new(n, label, method, pair + diagonal).with_terms(RiskTerms { pair, diagonal }))
}

/// Exact risk on the uniform distribution over `k` symbols in `O(1)`.
pub fn exact_risk_gt_uniform(k: usize, n: usize) -> Result<RiskReport> {
    ensure!(k >= 1, "uniform distribution needs k >= 1");
    exact_risk_gt_classes(
        &[(1.0 / k as f64, k as f64)],
        n,
        &format!("uniform:{k}"),
        RiskMethod::ClosedFormUniform,
    )
}

/// Exact risk on the `P_c` member with head `p0` and `k` tail symbols.
pub fn exact_risk_gt_pc(p0: f64, k: usize, n: usize) -> Result<RiskReport> {
    let d_label = format!("pc:{p0}:{k}");
    ensure!((0.5..=1.0).contains(&p0), "pc needs p0 in [1/2, 1]");
    ensure!(k >= 1, "pc needs k >= 1");
    exact_risk_gt_classes(
        &[(p0, 1.0), ((1.0 - p0) / k as f64, k as f64)],
        n,
        &d_label,
        RiskMethod::Exact,
    )
}

/// Exact risk, grouping equal probabilities first. Identical in value to
/// [`exact_risk_gt`] but cheap for distributions with few distinct entries.
pub fn exact_risk_gt_grouped(d: &Distribution, n: usize) -> Result<RiskReport> {
    exact_risk_gt_classes(&d.classes(), n, d.label(), RiskMethod::Exact)
}

/// Exact risk for a described distribution, taking the symmetric fast path
/// for uniform and `P_c` families.
pub fn exact_risk_gt_spec(spec: &DistSpec, n: usize) -> Result<RiskReport> {
    match spec {
        DistSpec::Uniform { k } => exact_risk_gt_uniform(*k, n),
        DistSpec::UniformCn { c } => {
            let k = DistSpec::uniform_cn_size(*c, n)?;
            let mut r = exact_risk_gt_uniform(k, n)?;
            r.dist = format!("uniform-cn:{c}(k={k})");
            Ok(r)
        }
        DistSpec::Pc { p0, k } => exact_risk_gt_pc(*p0, *k, n),
        other => exact_risk_gt_grouped(&other.build(n)?, n),
    }
}

pub fn asymptotic_risk_gt_spec(spec: &DistSpec, n: usize) -> Result<RiskReport> {
    match spec {
        DistSpec::Uniform { k } => asymptotic_risk_gt_uniform(*k, n),
        DistSpec::UniformCn { c } => {
            let k = DistSpec::uniform_cn_size(*c, n)?;
            let mut r = asymptotic_risk_gt_uniform(k, n)?;
            r.dist = format!("uniform-cn:{c}(k={k})");
            Ok(r)
        }
        other => asymptotic_risk_gt(&other.build(n)?, n),
    }
}

/// Closed-form expectations of the occupancy counts used by the asymptotic
/// risk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OccupancyMoments {
    pub phi1: f64,
    pub phi2: f64,
    pub phi1_sq: f64,
}

pub fn occupancy_moments_classes(classes: &[(f64, f64)], n: usize) -> OccupancyMoments {
    let nf = n as f64;
    let phi1 = class_sum(classes, |p| nf * p * pow1m(p, nf - 1.0));
    let phi2 = class_sum(classes, |p| {
        0.5 * nf * (nf - 1.0) * p * p * pow1m(p, nf - 2.0)
    });
    let cross = class_pair_sum(classes, |p, q| pair_kernel(p, q, nf));
    OccupancyMoments {
        phi1,
        phi2,
        phi1_sq: phi1 + nf * (nf - 1.0) * cross,
    }
}

/// Main term `(1/n) E[2Φ2/n + (Φ1/n)(1 - Φ1/n)]` of the Good-Turing risk.
pub fn asymptotic_risk_gt(d: &Distribution, n: usize) -> Result<RiskReport> {
    asymptotic_risk_gt_classes(&d.classes(), n, d.label())
}

pub fn asymptotic_risk_gt_uniform(k: usize, n: usize) -> Result<RiskReport> {
    ensure!(k >= 1, "uniform distribution needs k >= 1");
    asymptotic_risk_gt_classes(&[(1.0 / k as f64, k as f64)], n, &format!("uniform:{k}"))
}

fn asymptotic_risk_gt_classes(classes: &[(f64, f64)], n: usize, label: &str) -> Result<RiskReport> {
    ensure!(n >= 2, "asymptotic Good-Turing risk needs n >= 2, got {n}");
    let nf = n as f64;
    let m = occupancy_moments_classes(classes, n);
    let main = 2.0 * m.phi2 / nf + m.phi1 / nf - m.phi1_sq / (nf * nf);
    Ok(RiskReport::new(n, label, RiskMethod::Asymptotic, main / nf))
}

/// `E[Φ1/n - M0] = Σ_u p_u^2 (1 - p_u)^(n-1)`.
pub fn exact_bias_gt(d: &Distribution, n: usize) -> Result<f64> {
    ensure!(n >= 1, "bias needs n >= 1");
    let nf = n as f64;
    Ok(compensated_sum(
        d.probs().iter().map(|&p| p * p * pow1m(p, nf - 1.0)),
    ))
}

/// Normalized Good-Turing risk on the uniform distribution over `c·n`
/// symbols as `n → ∞`: `(1/c + 1) e^(-1/c) - e^(-2/c)`.
pub fn uniform_coefficient(c: f64) -> Result<f64> {
    ensure!(c.is_finite() && c > 0.0, "coefficient needs c > 0, got {c}");
    let x = 1.0 / c;
    Ok((x + 1.0) * (-x).exp() - (-2.0 * x).exp())
}

/// Maximizes [`uniform_coefficient`] over `c ∈ [1e-2, 1e2]`.
pub fn maximize_uniform_coefficient() -> Maximum {
    numeric::golden_section_max_log(
        |c| uniform_coefficient(c).unwrap_or(f64::NEG_INFINITY),
        1e-2,
        1e2,
        1e-10,
    )
}

/// `1/4 + e^(-1)`: the constant in the `O(1/n)` upper bound on the
/// Good-Turing worst-case risk.
pub fn gt_upper_bound_constant() -> f64 {
    0.25 + (-1.0f64).exp()
}

fn enumeration_size(k: usize, n: usize) -> Option<u64> {
    (k as u64).checked_pow(u32::try_from(n).ok()?)
}

/// `E[f(counts)]` by enumerating all `k^n` sequences.
fn enumerate_expectation<F>(d: &Distribution, n: usize, mut f: F) -> Result<f64>
where
    F: FnMut(&SymbolCounts) -> Result<f64>,
{
    ensure!(n >= 1, "enumeration needs n >= 1");
    let k = d.support_size();
    match enumeration_size(k, n) {
        Some(size) if size <= BRUTE_FORCE_LIMIT => {}
        _ => {
            return Err(Error::ResourceLimit(format!(
                "k^n = {k}^{n} exceeds the enumeration limit {BRUTE_FORCE_LIMIT}"
            )))
        }
    }
    let probs = d.probs();
    let mut digits = vec![0usize; n];
    // prefix[i] = Π_{j<i} p(digits[j])
    let mut prefix = vec![1.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] * probs[0];
    }
    let mut buf = vec![0usize; n];
    let mut acc = NeumaierSum::new();
    loop {
        let w = prefix[n];
        if w > 0.0 {
            buf.copy_from_slice(&digits);
            let counts = SymbolCounts::from_unsorted_buffer(&mut buf);
            acc += w * f(&counts)?;
        }
        // odometer increment, least significant position last
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(acc.value());
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < k {
                break;
            }
            digits[pos] = 0;
        }
        for i in pos..n {
            prefix[i + 1] = prefix[i] * probs[digits[i]];
        }
    }
}

/// Exact risk of any estimator by enumeration of all `k^n` sequences.
pub fn brute_force_risk(d: &Distribution, n: usize, e: &dyn Estimator) -> Result<RiskReport> {
    let risk = enumerate_expectation(d, n, |counts| {
        let err = e.estimate_counts(counts)? - missing_mass_unchecked(d.probs(), counts);
        Ok(err * err)
    })?;
    Ok(RiskReport::new(n, d.label(), RiskMethod::BruteForce, risk))
}

/// Exact bias `E[M̂0 - M0]` of any estimator by enumeration.
pub fn brute_force_bias(d: &Distribution, n: usize, e: &dyn Estimator) -> Result<f64> {
    enumerate_expectation(d, n, |counts| {
        Ok(e.estimate_counts(counts)? - missing_mass_unchecked(d.probs(), counts))
    })
}

/// A computed left-hand side against its claimed upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub bound: f64,
}

impl InequalityCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.bound * (1.0 + INEQUALITY_SLACK)
    }
}

/// `Σ_u p_u^i (1 - p_u)^n ≤ (i-1)! n! / (n+i-1)!`.
pub fn lemma1_check(d: &Distribution, i: u32, n: u32) -> Result<InequalityCheck> {
    ensure!(i >= 1, "moment order i must be >= 1");
    let nf = n as f64;
    let lhs = compensated_sum(d.probs().iter().map(|&p| p.powi(i as i32) * pow1m(p, nf)));
    let bound = (numeric::lgamma(i as f64) + numeric::lgamma(nf + 1.0)
        - numeric::lgamma(nf + i as f64))
    .exp();
    Ok(InequalityCheck { lhs, bound })
}

/// `Σ_{u≠v} p_u^i p_v^j (1 - p_u - p_v)^n ≤ (i-1)! (j-1)! n! / (n+i+j-2)!`.
pub fn lemma2_check(d: &Distribution, i: u32, j: u32, n: u32) -> Result<InequalityCheck> {
    ensure!(i >= 1 && j >= 1, "moment orders i, j must be >= 1");
    let nf = n as f64;
    let lhs = ordered_pair_sum(d.probs(), |p, q| {
        p.powi(i as i32) * q.powi(j as i32) * pow1m(p + q, nf)
    });
    let bound = (numeric::lgamma(i as f64) + numeric::lgamma(j as f64) + numeric::lgamma(nf + 1.0)
        - numeric::lgamma(nf + (i + j) as f64 - 1.0))
    .exp();
    Ok(InequalityCheck { lhs, bound })
}

/// `n Σ_{u≠v} P(u,v) (p_u + p_v)^2`, the piece of the exact risk that is
/// `o(1/n)`.
pub fn eq20_decay(d: &Distribution, n: usize) -> Result<f64> {
    check_risk_n(n)?;
    let nf = n as f64;
    let sum = class_pair_sum(&d.classes(), |p, q| {
        let s = p + q;
        pair_kernel(p, q, nf) * s * s
    });
    Ok(nf * sum)
}
