//! Occupancy profiles and missing-mass estimators.

use std::fmt;
use std::str::FromStr;

use crate::bounds::DirichletSpec;
use crate::dist::{Sample, SymbolCounts};
use crate::error::ensure;
use crate::{Error, Result};

/// Prevalence counts `Φ_i`: how many distinct symbols occur exactly `i`
/// times in a sample of length `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyProfile {
    // phi[i - 1] = Φ_i for i in 1..=n
    phi: Vec<usize>,
    n: usize,
}

impl OccupancyProfile {
    pub fn from_counts(counts: &SymbolCounts) -> Self {
        let n = counts.n();
        let mut phi = vec![0; n];
        for &(_, c) in counts.entries() {
            phi[c - 1] += 1;
        }
        Self { phi, n }
    }

    /// `Φ_i`; zero for `i = 0` and `i > n`.
    pub fn phi(&self, i: usize) -> usize {
        if i == 0 {
            return 0;
        }
        self.phi.get(i - 1).copied().unwrap_or(0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn singletons(&self) -> usize {
        self.phi(1)
    }

    /// Number of distinct symbols, `Σ_i Φ_i`.
    pub fn distinct(&self) -> usize {
        self.phi.iter().sum()
    }

    /// Non-zero `(i, Φ_i)` pairs in increasing `i`.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.phi
            .iter()
            .enumerate()
            .filter(|(_, &f)| f > 0)
            .map(|(i, &f)| (i + 1, f))
    }
}

pub fn profile(s: &Sample) -> Result<OccupancyProfile> {
    ensure!(!s.is_empty(), "profile of an empty sample");
    Ok(OccupancyProfile::from_counts(&s.counts()))
}

/// A rule mapping a sample to a missing-mass estimate in `[0, 1]`.
pub trait Estimator {
    fn name(&self) -> String;

    /// Estimate from per-symbol counts; implementors may assume `n >= 1`.
    fn estimate_counts(&self, counts: &SymbolCounts) -> Result<f64>;

    fn estimate(&self, s: &Sample) -> Result<f64> {
        ensure!(!s.is_empty(), "estimator applied to an empty sample");
        self.estimate_counts(&s.counts())
    }
}

/// Good-Turing: fraction of sample positions holding a singleton, `Φ1/n`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GoodTuring;

impl Estimator for GoodTuring {
    fn name(&self) -> String {
        "gt".to_string()
    }

    fn estimate_counts(&self, counts: &SymbolCounts) -> Result<f64> {
        ensure!(counts.n() >= 1, "estimator applied to an empty sample");
        let singletons = counts.entries().iter().filter(|&&(_, c)| c == 1).count();
        Ok(singletons as f64 / counts.n() as f64)
    }
}

/// Posterior mean of the missing mass under a symmetric Dirichlet prior.
///
/// Under `Dir(k, α)` the posterior mass of the `m` unseen coordinates is
/// `Beta(mα, kα + n - mα)`, so the estimate is `mα / (kα + n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletBayes {
    pub spec: DirichletSpec,
}

impl Estimator for DirichletBayes {
    fn name(&self) -> String {
        format!("dirichlet:{}:{}", self.spec.alpha(), self.spec.k())
    }

    fn estimate_counts(&self, counts: &SymbolCounts) -> Result<f64> {
        let k = self.spec.k();
        if let Some(max) = counts.max_symbol() {
            ensure!(
                max < k,
                "symbol {max} outside the prior's support of size {k}"
            );
        }
        let unseen = (k - counts.distinct()) as f64;
        let alpha = self.spec.alpha();
        Ok(unseen * alpha / (self.spec.total() + counts.n() as f64))
    }
}

pub fn good_turing(s: &Sample) -> Result<f64> {
    GoodTuring.estimate(s)
}

pub fn dirichlet_bayes(s: &Sample, spec: &DirichletSpec) -> Result<f64> {
    DirichletBayes { spec: *spec }.estimate(s)
}

/// Estimator selector: `gt` or `dirichlet:<alpha>:<k>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorSpec {
    GoodTuring,
    Dirichlet(DirichletSpec),
}

impl Estimator for EstimatorSpec {
    fn name(&self) -> String {
        self.to_string()
    }

    fn estimate_counts(&self, counts: &SymbolCounts) -> Result<f64> {
        match self {
            Self::GoodTuring => GoodTuring.estimate_counts(counts),
            Self::Dirichlet(spec) => DirichletBayes { spec: *spec }.estimate_counts(counts),
        }
    }
}

impl fmt::Display for EstimatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::GoodTuring => write!(f, "gt"),
            Self::Dirichlet(spec) => write!(f, "dirichlet:{}:{}", spec.alpha(), spec.k()),
        }
    }
}

impl FromStr for EstimatorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "gt" {
            return Ok(Self::GoodTuring);
        }
        let bad = || Error::InvalidArgument(format!("bad estimator `{s}`"));
        match s.split(':').collect::<Vec<_>>().as_slice() {
            ["dirichlet", alpha, k] => {
                let alpha = alpha.parse::<f64>().map_err(|_| bad())?;
                let k = k.parse::<usize>().map_err(|_| bad())?;
                Ok(Self::Dirichlet(DirichletSpec::new(k, alpha)?))
            }
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(xs: &[usize]) -> Sample {
        Sample::new(xs.to_vec())
    }

    #[test]
    fn profile_examples() {
        // a b c
        let p = profile(&sample(&[0, 1, 2])).unwrap();
        assert_eq!(p.phi(1), 3);
        assert!((2..=3).all(|i| p.phi(i) == 0));
        // b c b
        let p = profile(&sample(&[1, 2, 1])).unwrap();
        assert_eq!((p.phi(1), p.phi(2), p.phi(3)), (1, 1, 0));
        // a a a a
        let p = profile(&sample(&[0, 0, 0, 0])).unwrap();
        assert_eq!(p.nonzero().collect::<Vec<_>>(), vec![(4, 1)]);
        assert_eq!(p.phi(5), 0);
        assert!(profile(&sample(&[])).is_err());
    }

    #[test]
    fn good_turing_examples() {
        assert_eq!(good_turing(&sample(&[0, 1, 2])).unwrap(), 1.0);
        assert_eq!(good_turing(&sample(&[1, 2, 1])).unwrap(), 1.0 / 3.0);
        assert_eq!(good_turing(&sample(&[0, 0, 0, 0])).unwrap(), 0.0);
        assert!(good_turing(&sample(&[])).is_err());
    }

    #[test]
    fn dirichlet_bayes_examples() {
        let spec = DirichletSpec::new(2, 1.0).unwrap();
        assert!((dirichlet_bayes(&sample(&[0]), &spec).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(dirichlet_bayes(&sample(&[0, 1, 1]), &spec).unwrap(), 0.0);
        let spec = DirichletSpec::new(3, 1.0).unwrap();
        assert!((dirichlet_bayes(&sample(&[0, 0]), &spec).unwrap() - 0.4).abs() < 1e-15);
        assert!(dirichlet_bayes(&sample(&[3]), &spec).is_err());
    }

    #[test]
    fn selector_round_trip() {
        assert_eq!(
            "gt".parse::<EstimatorSpec>().unwrap(),
            EstimatorSpec::GoodTuring
        );
        let d: EstimatorSpec = "dirichlet:0.5:10".parse().unwrap();
        assert_eq!(
            d,
            EstimatorSpec::Dirichlet(DirichletSpec::new(10, 0.5).unwrap())
        );
        assert_eq!(d.to_string().parse::<EstimatorSpec>().unwrap(), d);
        for bad in [
            "",
            "gt:1",
            "dirichlet:0.5",
            "dirichlet:-1:3",
            "dirichlet:x:3",
            "laplace",
        ] {
            assert!(bad.parse::<EstimatorSpec>().is_err(), "{bad}");
        }
    }
}
