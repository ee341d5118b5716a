//! Lower bounds on the minimax missing-mass risk.
//!
//! Two routes are implemented:
//!
//! * **Dirichlet prior.** The minimax risk is at least the Bayes risk under
//!   any prior, and the Bayes-optimal estimator is the posterior mean, so the
//!   bound is `E_X[Var(M0 | X)]`. For `Dir(k, α)` this has a closed form in
//!   Beta functions ([`dirichlet_bayes_risk`]); [`mc_bayes_variance`]
//!   estimates the same quantity by simulating the Pólya urn.
//! * **Reduction.** Estimating `p(0)` on the `P_c` family with `k ≈ e^n`
//!   tail symbols is no harder than estimating the missing mass, since
//!   `M0 ≈ 1 - p(0)` with overwhelming probability ([`de3_check`]). The
//!   Bernoulli minimax rate `1/(4n)` then transfers
//!   ([`bernoulli_worst_case_risk`] gives numerical evidence for it).

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{missing_mass_unchecked, stream_rng, Distribution, Sampler, SymbolCounts};
use crate::error::ensure;
use crate::montecarlo::{run_replicates, McEstimate, CHUNK};
use crate::numeric::{self, compensated_sum, Maximum, NeumaierSum};
use crate::risk::gt_upper_bound_constant;
use crate::Result;

/// Largest alphabet accepted by [`dirichlet_bayes_risk_general`].
pub const GENERAL_PRIOR_LIMIT: usize = 2000;

/// Cancellation residue below this magnitude is clamped to zero.
const CLAMP: f64 = 1e-12;

/// Symmetric Dirichlet prior `Dir(k, α)` with total concentration `a = kα`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirichletSpec {
    k: usize,
    alpha: f64,
}

impl DirichletSpec {
    pub fn new(k: usize, alpha: f64) -> Result<Self> {
        ensure!(k >= 1, "Dirichlet prior needs k >= 1");
        ensure!(
            alpha.is_finite() && alpha > 0.0,
            "Dirichlet concentration must be > 0, got {alpha}"
        );
        Ok(Self { k, alpha })
    }

    /// `α = 1/n` on `k = ⌈c n²⌉` symbols.
    pub fn scaled(n: usize, c: f64) -> Result<Self> {
        ensure!(n >= 1, "n must be >= 1");
        ensure!(c.is_finite() && c > 0.0, "c must be > 0, got {c}");
        let nf = n as f64;
        Self::new(((c * nf * nf).ceil() as usize).max(1), 1.0 / nf)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Total concentration `a = kα`.
    pub fn total(&self) -> f64 {
        self.k as f64 * self.alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    DirichletPrior,
    Reduction,
    Bracket,
}

impl fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::DirichletPrior => "dirichlet_prior",
            Self::Reduction => "reduction",
            Self::Bracket => "bracket",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSide {
    Lower,
    Upper,
}

/// A bound on the minimax risk `R*_n` at sample length `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub method: BoundMethod,
    pub side: BoundSide,
    pub value: f64,
    pub normalized: f64,
    pub params: String,
}

impl BoundReport {
    fn new(n: usize, method: BoundMethod, side: BoundSide, value: f64, params: String) -> Self {
        Self {
            n,
            method,
            side,
            value,
            normalized: n as f64 * value,
            params,
        }
    }
}

/// `ln[B(a, n) / B(a - w, n)]`, the log-probability that a coordinate
/// group of prior weight `w` stays unseen in `n` Dirichlet-multinomial draws.
///
/// For integer `n` the ratio is `Π_{i<n} (a - w + i)/(a + i)`, summed as
/// `ln_1p` terms; this avoids differencing large log-gamma values.
fn ln_unseen(a: f64, w: f64, n: usize) -> f64 {
    if w >= a {
        return f64::NEG_INFINITY;
    }
    if n <= 100_000 {
        compensated_sum((0..n).map(|i| (-w / (a + i as f64)).ln_1p()))
    } else {
        let nf = n as f64;
        numeric::ln_beta(a, nf) - numeric::ln_beta(a - w, nf)
    }
}

/// Same quantity through log-Beta functions only; kept as the reference the
/// product form is tested against.
pub fn ln_unseen_lgamma(a: f64, w: f64, n: usize) -> f64 {
    if w >= a {
        return f64::NEG_INFINITY;
    }
    let nf = n as f64;
    numeric::ln_beta(a, nf) - numeric::ln_beta(a - w, nf)
}

fn clamp_residue(v: f64) -> f64 {
    if v < 0.0 && v > -CLAMP {
        0.0
    } else {
        v
    }
}

/// Bayes risk of the posterior-mean estimator under the symmetric prior,
/// `E_X[Var(M0 | X)]`:
///
/// ```text
/// B(a,n) / ((a+n)^2 (a+n+1)) · [ Σ_u (α(a+n) - α^2) / B(a-α, n)
///                               - Σ_{u≠v} α^2 / B(a-2α, n) ]
/// ```
///
/// The sums have `k` and `k(k-1)` identical terms.
pub fn dirichlet_bayes_risk(n: usize, spec: &DirichletSpec) -> Result<f64> {
    ensure!(n >= 1, "n must be >= 1");
    let k = spec.k() as f64;
    if spec.k() == 1 {
        return Ok(0.0);
    }
    let alpha = spec.alpha();
    let a = spec.total();
    let nf = n as f64;
    let single = k * (alpha * (a + nf) - alpha * alpha) * ln_unseen(a, alpha, n).exp();
    // a - 2α = (k - 2)α exactly, so k = 2 hits the Beta pole and the pair
    // term vanishes: both coordinates cannot be unseen together.
    let pair = if spec.k() == 2 {
        0.0
    } else {
        k * (k - 1.0) * alpha * alpha * ln_unseen(a, 2.0 * alpha, n).exp()
    };
    let scale = (a + nf) * (a + nf) * (a + nf + 1.0);
    Ok(clamp_residue((single - pair) / scale))
}

/// Bayes risk for an arbitrary (possibly asymmetric) Dirichlet prior, by the
/// `O(k^2)` double sum. Limited to [`GENERAL_PRIOR_LIMIT`] coordinates.
pub fn dirichlet_bayes_risk_general(n: usize, alphas: &[f64]) -> Result<f64> {
    ensure!(n >= 1, "n must be >= 1");
    ensure!(!alphas.is_empty(), "prior needs at least one coordinate");
    ensure!(
        alphas.len() <= GENERAL_PRIOR_LIMIT,
        "general prior limited to {GENERAL_PRIOR_LIMIT} coordinates"
    );
    for &w in alphas {
        ensure!(w.is_finite() && w > 0.0, "concentrations must be > 0");
    }
    if alphas.len() == 1 {
        return Ok(0.0);
    }
    let a = compensated_sum(alphas.iter().copied());
    let nf = n as f64;
    let single = compensated_sum(
        alphas
            .iter()
            .map(|&w| (w * (a + nf) - w * w) * ln_unseen(a, w, n).exp()),
    );
    let rows: Vec<NeumaierSum> = alphas
        .par_iter()
        .enumerate()
        .map(|(u, &wu)| {
            let mut acc = NeumaierSum::new();
            for (v, &wv) in alphas.iter().enumerate() {
                if u != v {
                    acc += wu * wv * ln_unseen(a, wu + wv, n).exp();
                }
            }
            acc
        })
        .collect();
    let mut pair = NeumaierSum::new();
    for r in &rows {
        pair.merge(r);
    }
    let scale = (a + nf) * (a + nf) * (a + nf + 1.0);
    Ok(clamp_residue((single - pair.value()) / scale))
}

/// Posterior variance of the missing mass when `m` of the prior's
/// coordinates are unseen: `M0 | X ~ Beta(mα, a + n - mα)`.
pub fn posterior_missing_mass_variance(spec: &DirichletSpec, n: usize, unseen: usize) -> f64 {
    let x = unseen as f64 * spec.alpha();
    let y = spec.total() + n as f64 - x;
    let s = x + y;
    x * y / (s * s * (s + 1.0))
}

/// Monte Carlo estimate of `E_X[Var(M0 | X)]` under the symmetric prior.
///
/// Samples are drawn from the prior's marginal (Pólya urn): after `t` draws
/// with `d` distinct symbols, the next draw is a new symbol with probability
/// `(k - d)α / (a + t)` and a repeat of seen symbol `u` with probability
/// `(N_u + α)/(a + t)`. The posterior variance depends on the sample only
/// through `d`, so only the new-vs-repeat decisions are simulated.
pub fn mc_bayes_variance(
    n: usize,
    spec: &DirichletSpec,
    reps: u64,
    seed: u64,
) -> Result<McEstimate> {
    ensure!(n >= 1, "n must be >= 1");
    ensure!(reps >= 100, "need at least 100 replicates, got {reps}");
    let k = spec.k();
    let alpha = spec.alpha();
    let a = spec.total();
    let stats = run_replicates(
        reps,
        seed,
        || (),
        |_, rng, _| {
            let mut distinct = 0usize;
            for t in 0..n {
                let u: f64 = rand::Rng::random(rng);
                let fresh = (k - distinct) as f64 * alpha;
                if u * (a + t as f64) < fresh {
                    distinct += 1;
                }
            }
            posterior_missing_mass_variance(spec, n, k - distinct)
        },
    );
    Ok(McEstimate::from(stats))
}

/// Limiting normalized Bayes risk for `α = 1/n`, `k = c n²`: `c/(c+1)^3`.
pub fn dirichlet_coefficient(c: f64) -> Result<f64> {
    ensure!(c.is_finite() && c > 0.0, "coefficient needs c > 0, got {c}");
    Ok(c / ((c + 1.0) * (c + 1.0) * (c + 1.0)))
}

/// Maximizes [`dirichlet_coefficient`] over `c ∈ [1e-2, 1e2]`.
pub fn maximize_dirichlet_coefficient() -> Maximum {
    numeric::golden_section_max_log(
        |c| dirichlet_coefficient(c).unwrap_or(f64::NEG_INFINITY),
        1e-2,
        1e2,
        1e-10,
    )
}

/// Bayes-risk lower bound with `α = 1/n`, `k = ⌈c n²⌉`.
pub fn dirichlet_bound(n: usize, c: f64) -> Result<BoundReport> {
    let spec = DirichletSpec::scaled(n, c)?;
    let value = dirichlet_bayes_risk(n, &spec)?;
    Ok(BoundReport::new(
        n,
        BoundMethod::DirichletPrior,
        BoundSide::Lower,
        value,
        format!("dirichlet(k={}, alpha={}, c={c})", spec.k(), spec.alpha()),
    ))
}

/// Linear Bernoulli estimators `p̂ = (X + β)/(n + γ)` of `p(0)` from `X`
/// occurrences of symbol 0 in `n` draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BernoulliEstimator {
    /// `X / n`.
    Empirical,
    /// `(X + √n/2) / (n + √n)`, which has constant risk.
    AddHalfSqrtN,
}

impl BernoulliEstimator {
    fn shifts(self, n: usize) -> (f64, f64) {
        match self {
            Self::Empirical => (0.0, 0.0),
            Self::AddHalfSqrtN => {
                let r = (n as f64).sqrt();
                (0.5 * r, r)
            }
        }
    }

    pub fn estimate(self, n: usize, x: usize) -> f64 {
        let (beta, gamma) = self.shifts(n);
        (x as f64 + beta) / (n as f64 + gamma)
    }

    /// Closed-form supremum of the risk over `p ∈ [1/2, 1]`.
    pub fn worst_case_closed_form(self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            Self::Empirical => 0.25 / nf,
            Self::AddHalfSqrtN => 0.25 / ((1.0 + nf.sqrt()) * (1.0 + nf.sqrt())),
        }
    }
}

/// `E[(p̂ - p)^2]` for `X ~ Bin(n, p)`, from the first two binomial moments.
pub fn bernoulli_risk(n: usize, kind: BernoulliEstimator, p: f64) -> f64 {
    let (beta, gamma) = kind.shifts(n);
    let nf = n as f64;
    let denom = nf + gamma;
    let variance = nf * p * (1.0 - p) / (denom * denom);
    let bias = (nf * p + beta) / denom - p;
    variance + bias * bias
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorstCase {
    pub p_worst: f64,
    pub risk: f64,
}

/// Worst-case risk of a Bernoulli estimator over an evenly spaced grid of
/// `grid_size` points covering `p(0) ∈ [1/2, 1]`.
pub fn bernoulli_worst_case_risk(
    n: usize,
    kind: BernoulliEstimator,
    grid_size: usize,
) -> Result<WorstCase> {
    ensure!(n >= 1, "n must be >= 1");
    ensure!(
        grid_size >= 101,
        "grid needs at least 101 points, got {grid_size}"
    );
    let mut best = WorstCase {
        p_worst: 0.5,
        risk: f64::NEG_INFINITY,
    };
    for i in 0..grid_size {
        let p = 0.5 + 0.5 * i as f64 / (grid_size - 1) as f64;
        let r = bernoulli_risk(n, kind, p);
        if r > best.risk {
            best = WorstCase {
                p_worst: p,
                risk: r,
            };
        }
    }
    Ok(best)
}

/// Outcome of simulating the `P_c` family with `k = ⌈e^n⌉` tail symbols.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct De3Report {
    pub n: usize,
    pub p0: f64,
    pub k: usize,
    pub reps: u64,
    /// Fraction of replicates with `|M0 - (1 - p0)| > (1 - p0) n e^(-n)`.
    pub violation_rate: f64,
    /// Largest `|M0 - (1 - p0)|` among non-violating replicates.
    pub max_gap: f64,
    /// `(1 - p0) n e^(-n)`.
    pub gap_bound: f64,
    /// `2^(-n)`.
    pub rate_bound: f64,
    /// Binomial standard error of the violation rate at `rate_bound`.
    pub stderr: f64,
    /// Smallest and largest `M0` over replicates in which symbol 0 appeared.
    pub head_m0_min: f64,
    pub head_m0_max: f64,
}

impl De3Report {
    pub fn rate_ok(&self) -> bool {
        self.violation_rate <= self.rate_bound + 3.0 * self.stderr
    }

    pub fn gap_ok(&self) -> bool {
        self.max_gap <= self.gap_bound
    }
}

/// Absolute slack on the gap test for rounding in `1 - Σ seen`.
const DE3_TOLERANCE: f64 = 1e-12;

pub fn de3_check(n: usize, p0: f64, reps: u64, seed: u64) -> Result<De3Report> {
    ensure!((8..=14).contains(&n), "n must be in 8..=14, got {n}");
    ensure!(
        (0.5..=1.0).contains(&p0),
        "p0 must be in [1/2, 1], got {p0}"
    );
    ensure!(reps >= 1, "need at least one replicate");
    let nf = n as f64;
    let k = nf.exp().ceil() as usize;
    let d = Distribution::pc(p0, k)?;
    let sampler = Sampler::new(&d);
    let probs = d.probs();
    let gap_bound = (1.0 - p0) * nf * (-nf).exp();

    #[derive(Clone, Copy)]
    struct Tally {
        violations: u64,
        max_gap: f64,
        head_min: f64,
        head_max: f64,
    }
    let empty = Tally {
        violations: 0,
        max_gap: 0.0,
        head_min: f64::INFINITY,
        head_max: f64::NEG_INFINITY,
    };

    let chunks = reps.div_ceil(CHUNK);
    let base = stream_rng(seed, 0);
    let tallies: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut t = empty;
            let mut buf = Vec::with_capacity(n);
            for r in c * CHUNK..((c + 1) * CHUNK).min(reps) {
                let mut rng = base.clone();
                rng.set_stream(r);
                sampler.fill(&mut rng, n, &mut buf);
                let counts = SymbolCounts::from_unsorted_buffer(&mut buf);
                let m0 = missing_mass_unchecked(probs, &counts);
                let gap = (m0 - (1.0 - p0)).abs();
                if gap > gap_bound + DE3_TOLERANCE {
                    t.violations += 1;
                } else {
                    t.max_gap = t.max_gap.max(gap);
                }
                if counts.entries().first().is_some_and(|&(s, _)| s == 0) {
                    t.head_min = t.head_min.min(m0);
                    t.head_max = t.head_max.max(m0);
                }
            }
            t
        })
        .collect();
    let total = tallies.iter().fold(empty, |acc, t| Tally {
        violations: acc.violations + t.violations,
        max_gap: acc.max_gap.max(t.max_gap),
        head_min: acc.head_min.min(t.head_min),
        head_max: acc.head_max.max(t.head_max),
    });
    let rate_bound = 0.5f64.powi(n as i32);
    Ok(De3Report {
        n,
        p0,
        k,
        reps,
        violation_rate: total.violations as f64 / reps as f64,
        max_gap: total.max_gap,
        gap_bound,
        rate_bound,
        stderr: (rate_bound * (1.0 - rate_bound) / reps as f64).sqrt(),
        head_m0_min: total.head_min,
        head_m0_max: total.head_max,
    })
}

/// Lower and upper bounds on the minimax risk at sample length `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimaxBracket {
    pub lower: BoundReport,
    pub upper: BoundReport,
}

pub fn minimax_bracket(n: usize) -> Result<MinimaxBracket> {
    ensure!(n >= 1, "n must be >= 1");
    let nf = n as f64;
    Ok(MinimaxBracket {
        lower: BoundReport::new(
            n,
            BoundMethod::Reduction,
            BoundSide::Lower,
            0.25 / nf,
            "reduction from Bernoulli estimation on the P_c family (k = e^n)".into(),
        ),
        upper: BoundReport::new(
            n,
            BoundMethod::Bracket,
            BoundSide::Upper,
            gt_upper_bound_constant() / nf,
            "Good-Turing worst-case risk, (1/4 + 1/e)/n".into(),
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(DirichletSpec::new(0, 1.0).is_err());
        assert!(DirichletSpec::new(3, 0.0).is_err());
        assert!(DirichletSpec::new(3, f64::NAN).is_err());
        let s = DirichletSpec::new(200, 0.05).unwrap();
        assert!((s.total() - 10.0).abs() < 1e-12);
        let s = DirichletSpec::scaled(500, 0.5).unwrap();
        assert_eq!(s.k(), 125_000);
        assert_eq!(s.alpha(), 1.0 / 500.0);
    }

    #[test]
    fn single_symbol_prior_has_zero_risk() {
        let spec = DirichletSpec::new(1, 0.7).unwrap();
        assert_eq!(dirichlet_bayes_risk(10, &spec).unwrap(), 0.0);
        let mc = mc_bayes_variance(10, &spec, 100, 1).unwrap();
        assert_eq!((mc.mean, mc.stderr), (0.0, 0.0));
    }

    #[test]
    fn hand_case_one_eighteenth() {
        let spec = DirichletSpec::new(2, 1.0).unwrap();
        let exact = dirichlet_bayes_risk(1, &spec).unwrap();
        assert!((exact - 1.0 / 18.0).abs() < 1e-15, "{exact}");
        let mc = mc_bayes_variance(1, &spec, 1000, 4).unwrap();
        assert!((mc.mean - 1.0 / 18.0).abs() < 1e-15);
        assert_eq!(mc.stderr, 0.0);
        assert!((posterior_missing_mass_variance(&spec, 1, 1) - 1.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn product_and_lgamma_forms_agree() {
        for &(a, w, n) in &[
            (10.0, 0.05, 20),
            (250.0, 0.002, 500),
            (3.0, 1.0, 7),
            (0.5, 0.01, 60),
        ] {
            let p = ln_unseen(a, w, n);
            let g = ln_unseen_lgamma(a, w, n);
            assert!((p - g).abs() <= 1e-9 * p.abs().max(1.0), "{p} vs {g}");
        }
    }

    #[test]
    fn general_form_matches_symmetric() {
        for &(n, k, alpha) in &[(5, 50, 0.1), (20, 200, 0.05), (3, 2, 1.0), (7, 3, 0.4)] {
            let spec = DirichletSpec::new(k, alpha).unwrap();
            let sym = dirichlet_bayes_risk(n, &spec).unwrap();
            let gen = dirichlet_bayes_risk_general(n, &vec![alpha; k]).unwrap();
            assert!(
                (sym - gen).abs() <= 1e-12 * sym.max(1e-300),
                "{sym} vs {gen}"
            );
        }
        assert!(dirichlet_bayes_risk_general(3, &vec![0.1; GENERAL_PRIOR_LIMIT + 1]).is_err());
        assert!(dirichlet_bayes_risk_general(3, &[0.5, -0.1]).is_err());
    }

    #[test]
    fn asymmetric_prior_matches_enumeration() {
        // k = 3, n = 2: enumerate the Dirichlet-multinomial marginal and the
        // Beta posterior variance of the unseen coordinates.
        let alphas = [0.3, 1.1, 2.0];
        let a: f64 = alphas.iter().sum();
        let n = 2;
        let mut expect = 0.0;
        for x1 in 0..3 {
            for x2 in 0..3 {
                let mut counts = [0.0; 3];
                let p1 = alphas[x1] / a;
                counts[x1] += 1.0;
                let p2 = (alphas[x2] + counts[x2]) / (a + 1.0);
                counts[x2] += 1.0;
                let x: f64 = (0..3)
                    .filter(|&u| counts[u] == 0.0)
                    .map(|u| alphas[u])
                    .sum();
                let y = a + n as f64 - x;
                let s = x + y;
                expect += p1 * p2 * x * y / (s * s * (s + 1.0));
            }
        }
        let got = dirichlet_bayes_risk_general(n, &alphas).unwrap();
        assert!((got - expect).abs() < 1e-15, "{got} vs {expect}");
    }

    #[test]
    fn closed_form_agrees_with_urn() {
        let spec = DirichletSpec::new(200, 0.05).unwrap();
        let exact = dirichlet_bayes_risk(20, &spec).unwrap();
        let mc = mc_bayes_variance(20, &spec, 100_000, 17).unwrap();
        assert!(
            (exact - mc.mean).abs() <= 3.0 * mc.stderr,
            "{exact} vs {mc:?}"
        );
        assert!(mc_bayes_variance(20, &spec, 99, 17).is_err());
    }

    #[test]
    fn dirichlet_coefficient_values() {
        assert!((dirichlet_coefficient(0.5).unwrap() - 4.0 / 27.0).abs() < 1e-16);
        assert!((dirichlet_coefficient(1.0).unwrap() - 0.125).abs() < 1e-16);
        assert!(dirichlet_coefficient(1e6).unwrap() < 1e-11);
        assert!(dirichlet_coefficient(0.0).is_err());
    }

    #[test]
    fn dirichlet_coefficient_maximum() {
        let m = maximize_dirichlet_coefficient();
        assert!((m.argmax - 0.5).abs() < 1e-6, "{}", m.argmax);
        assert!((m.value - 4.0 / 27.0).abs() < 1e-9);
        assert!(m.value < 0.25);
        // dg/dc = (1 - 2c)/(c + 1)^4
        let h = 1e-5;
        let fd = (dirichlet_coefficient(m.argmax + h).unwrap()
            - dirichlet_coefficient(m.argmax - h).unwrap())
            / (2.0 * h);
        let analytic = (1.0 - 2.0 * m.argmax) / (m.argmax + 1.0).powi(4);
        assert!(fd.abs() < 1e-6 && analytic.abs() < 1e-6);
    }

    #[test]
    fn bernoulli_examples() {
        for n in [1, 10, 100] {
            let w = bernoulli_worst_case_risk(n, BernoulliEstimator::Empirical, 101).unwrap();
            assert_eq!(w.p_worst, 0.5);
            assert!((w.risk - 0.25 / n as f64).abs() < 1e-16);
        }
        let w = bernoulli_worst_case_risk(100, BernoulliEstimator::AddHalfSqrtN, 1001).unwrap();
        assert!((w.risk - 1.0 / 484.0).abs() < 1e-10);
        for i in 0..=100 {
            let p = i as f64 / 100.0;
            let r = bernoulli_risk(100, BernoulliEstimator::AddHalfSqrtN, p);
            assert!((r - 1.0 / 484.0).abs() < 1e-12);
        }
        assert!(bernoulli_worst_case_risk(10, BernoulliEstimator::Empirical, 100).is_err());
        assert!(bernoulli_worst_case_risk(0, BernoulliEstimator::Empirical, 101).is_err());
    }

    #[test]
    fn moment_risk_matches_pmf_sum() {
        // Binomial pmf by the ratio recurrence, summed term by term.
        for n in [1usize, 7, 40] {
            for kind in [
                BernoulliEstimator::Empirical,
                BernoulliEstimator::AddHalfSqrtN,
            ] {
                for &p in &[0.5f64, 0.61, 0.9, 0.999, 1.0] {
                    let mut pmf = (1.0 - p).powi(n as i32);
                    let mut direct = 0.0;
                    for x in 0..=n {
                        if x > 0 {
                            pmf = if p == 1.0 {
                                if x == n {
                                    1.0
                                } else {
                                    0.0
                                }
                            } else {
                                pmf * (n - x + 1) as f64 / x as f64 * p / (1.0 - p)
                            };
                        }
                        let e = kind.estimate(n, x) - p;
                        direct += pmf * e * e;
                    }
                    let r = bernoulli_risk(n, kind, p);
                    assert!((r - direct).abs() <= 1e-14, "n={n} p={p}: {r} vs {direct}");
                }
            }
        }
    }

    #[test]
    fn de3_degenerate_head() {
        let r = de3_check(9, 1.0, 500, 2).unwrap();
        assert_eq!(r.violation_rate, 0.0);
        assert_eq!(r.max_gap, 0.0);
        assert!(de3_check(7, 0.5, 10, 1).is_err());
        assert!(de3_check(15, 0.5, 10, 1).is_err());
        assert!(de3_check(10, 0.4, 10, 1).is_err());
    }

    #[test]
    fn de3_head_present_bounds() {
        let (n, p0) = (10, 0.5);
        let r = de3_check(n, p0, 20_000, 3).unwrap();
        let k = r.k as f64;
        assert!(r.head_m0_max <= (1.0 - p0) + 1e-15);
        assert!(r.head_m0_min >= (1.0 - p0) * (1.0 - n as f64 / k) - 1e-15);
        assert!(r.gap_ok());
    }

    #[test]
    fn bracket_values() {
        let b = minimax_bracket(100).unwrap();
        assert!((b.lower.value - 0.0025).abs() < 1e-18);
        assert!((b.upper.value - 0.006_178_794_411_714_423).abs() < 1e-17);
        for n in [1, 7, 1000, 1_000_000] {
            let b = minimax_bracket(n).unwrap();
            assert!(b.lower.value < b.upper.value);
            assert!((b.lower.normalized - 0.25).abs() < 1e-15);
            assert!((b.upper.normalized - gt_upper_bound_constant()).abs() < 1e-15);
        }
        assert!(minimax_bracket(0).is_err());
    }
}
