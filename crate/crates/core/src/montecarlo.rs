//! Deterministic parallel Monte Carlo for estimator risk and bias.
//!
//! Replicate `r` always draws from stream `r` of the configured seed, and
//! replicates are grouped into fixed-size chunks whose statistics are merged
//! in chunk order. Output is therefore bit-identical for any thread count.

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{
    missing_mass_unchecked, stream_rng, DistSpec, Distribution, Sampler, SymbolCounts,
};
use crate::error::ensure;
use crate::estimators::{Estimator, EstimatorSpec};
use crate::risk::{self, RiskMethod, RiskReport};
use crate::{Error, Result};

/// Replicates per work item. Part of the determinism contract: changing it
/// changes the merge tree and hence the last bits of the output.
pub const CHUNK: u64 = 1024;

/// Streaming count/mean/variance/min/max (Welford), mergeable across
/// workers with the pairwise update of Chan et al.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
}

impl Default for RunningStats {
    fn default() -> Self {
        Self {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let total = na + nb;
        let delta = other.mean - self.mean;
        self.mean += delta * nb / total;
        self.m2 += other.m2 + delta * delta * na * nb / total;
        self.count += other.count;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// Unbiased sample variance; zero with fewer than two observations.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.push(x);
        }
        s
    }
}

/// Runs `reps` replicates of `f` and merges their outputs. `f` receives the
/// replicate's own generator and its index.
pub fn run_replicates<S, I, F>(reps: u64, seed: u64, init: I, f: F) -> RunningStats
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &mut ChaCha8Rng, u64) -> f64 + Sync,
{
    let base = stream_rng(seed, 0);
    let chunks = reps.div_ceil(CHUNK);
    let partials: Vec<RunningStats> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut scratch = init();
            let mut stats = RunningStats::new();
            for r in c * CHUNK..((c + 1) * CHUNK).min(reps) {
                let mut rng = base.clone();
                rng.set_stream(r);
                stats.push(f(&mut scratch, &mut rng, r));
            }
            stats
        })
        .collect();
    let mut total = RunningStats::new();
    for p in &partials {
        total.merge(p);
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub n: usize,
    pub reps: u64,
    pub seed: u64,
    #[serde(serialize_with = "serialize_display")]
    pub estimator: EstimatorSpec,
    #[serde(serialize_with = "serialize_display")]
    pub dist: DistSpec,
}

fn serialize_display<T: fmt::Display, S: serde::Serializer>(
    v: &T,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl SimConfig {
    pub fn new(n: usize, reps: u64, seed: u64, estimator: EstimatorSpec, dist: DistSpec) -> Self {
        Self {
            n,
            reps,
            seed,
            estimator,
            dist,
        }
    }

    pub fn validate(&self) -> Result<Distribution> {
        ensure!(self.n >= 1, "sample length n must be >= 1");
        ensure!(self.reps >= 1, "replicate count must be >= 1");
        let d = self.dist.build(self.n)?;
        if let EstimatorSpec::Dirichlet(spec) = &self.estimator {
            ensure!(
                spec.k() >= d.support_size(),
                "Dirichlet prior support {} is smaller than the distribution's {}",
                spec.k(),
                d.support_size()
            );
        }
        Ok(d)
    }
}

/// Monte Carlo estimate of a mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub stats: RunningStats,
}

impl From<RunningStats> for McEstimate {
    fn from(stats: RunningStats) -> Self {
        Self {
            mean: stats.mean(),
            stderr: stats.stderr(),
            stats,
        }
    }
}

struct Scratch {
    buf: Vec<usize>,
}

/// Estimator error `M̂0 - M0` on every replicate.
fn simulate_errors<G>(cfg: &SimConfig, g: G) -> Result<RunningStats>
where
    G: Fn(f64) -> f64 + Sync,
{
    let d = cfg.validate()?;
    let sampler = Sampler::new(&d);
    let probs = d.probs();
    let est = cfg.estimator;
    let n = cfg.n;
    Ok(run_replicates(
        cfg.reps,
        cfg.seed,
        || Scratch {
            buf: Vec::with_capacity(n),
        },
        |scratch, rng, _| {
            sampler.fill(rng, n, &mut scratch.buf);
            let counts = SymbolCounts::from_unsorted_buffer(&mut scratch.buf);
            // Validated up front: the estimator accepts every symbol of `d`.
            let estimate = est.estimate_counts(&counts).unwrap_or(f64::NAN);
            g(estimate - missing_mass_unchecked(probs, &counts))
        },
    ))
}

/// Mean squared error of the configured estimator against the true missing
/// mass.
pub fn mc_risk(cfg: &SimConfig) -> Result<McEstimate> {
    simulate_errors(cfg, |e| e * e).map(McEstimate::from)
}

/// Mean signed error (bias) of the configured estimator.
pub fn mc_bias(cfg: &SimConfig) -> Result<McEstimate> {
    simulate_errors(cfg, |e| e).map(McEstimate::from)
}

pub fn mc_risk_report(cfg: &SimConfig) -> Result<RiskReport> {
    let d = cfg.validate()?;
    let est = mc_risk(cfg)?;
    Ok(
        RiskReport::new(cfg.n, d.label(), RiskMethod::MonteCarlo, est.mean)
            .with_stderr(est.stderr, est.stats.count()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    N,
    K,
    C,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::N => "n",
            Self::K => "k",
            Self::C => "c",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(Self::N),
            "k" => Ok(Self::K),
            "c" => Ok(Self::C),
            _ => Err(Error::InvalidArgument(format!("unknown sweep axis `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMethod {
    Exact,
    Asymptotic,
    Mc,
}

impl FromStr for SweepMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "asymptotic" => Ok(Self::Asymptotic),
            "mc" => Ok(Self::Mc),
            _ => Err(Error::InvalidArgument(format!(
                "unknown sweep method `{s}`"
            ))),
        }
    }
}

/// One sweep row: the axis value and the report computed at it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub report: RiskReport,
}

fn as_count(v: f64, what: &str) -> Result<usize> {
    ensure!(
        v.is_finite() && v >= 1.0 && v.fract() == 0.0,
        "{what} axis values must be positive integers, got {v}"
    );
    Ok(v as usize)
}

/// Configuration of a single sweep row.
pub fn sweep_point(base: &SimConfig, axis: SweepAxis, value: f64) -> Result<SimConfig> {
    let mut cfg = base.clone();
    match axis {
        SweepAxis::N => cfg.n = as_count(value, "n")?,
        SweepAxis::K => cfg.dist = base.dist.with_k(as_count(value, "k")?)?,
        SweepAxis::C => {
            ensure!(
                value.is_finite() && value > 0.0,
                "c axis values must be > 0"
            );
            cfg.dist = DistSpec::UniformCn { c: value };
        }
    }
    Ok(cfg)
}

/// Evaluates `method` at every axis value. Rows are independent; Monte
/// Carlo rows all use the base seed.
pub fn sweep(
    base: &SimConfig,
    axis: SweepAxis,
    values: &[f64],
    method: SweepMethod,
) -> Result<Vec<SweepRow>> {
    ensure!(!values.is_empty(), "sweep needs at least one value");
    if method != SweepMethod::Mc {
        ensure!(
            base.estimator == EstimatorSpec::GoodTuring,
            "closed-form sweeps are only available for the Good-Turing estimator"
        );
    }
    values
        .iter()
        .map(|&value| {
            let cfg = sweep_point(base, axis, value)?;
            let report = match method {
                SweepMethod::Exact => risk::exact_risk_gt_spec(&cfg.dist, cfg.n)?,
                SweepMethod::Asymptotic => risk::asymptotic_risk_gt_spec(&cfg.dist, cfg.n)?,
                SweepMethod::Mc => mc_risk_report(&cfg)?,
            };
            Ok(SweepRow {
                axis,
                value,
                report,
            })
        })
        .collect()
}

/// Monte Carlo sweep.
pub fn mc_sweep(base: &SimConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>> {
    sweep(base, axis, values, SweepMethod::Mc)
}
