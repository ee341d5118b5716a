//! Finite-support distributions over `{0, .., k-1}` and seeded i.i.d. sampling.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ensure;
use crate::numeric::{compensated_sum, NeumaierSum};
use crate::{Error, Result};

/// Absolute tolerance on `Σ p = 1` accepted by [`Distribution::explicit`].
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Alphabets above this size are sampled through an alias table.
pub const ALIAS_THRESHOLD: usize = 64;

/// Largest support for which [`missing_mass`] sums unseen entries directly
/// instead of complementing the observed mass.
const DIRECT_SCAN_LIMIT: usize = 4096;

/// A probability vector over `{0, .., k-1}`. Zero entries are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
    label: String,
}

impl Distribution {
    /// Uniform distribution on `k` symbols.
    pub fn uniform(k: usize) -> Result<Self> {
        ensure!(k >= 1, "uniform distribution needs k >= 1");
        Ok(Self {
            probs: vec![1.0 / k as f64; k],
            label: format!("uniform:{k}"),
        })
    }

    /// Member of the `P_c` family: symbol 0 carries `p0`, the `k` tail
    /// symbols `1..=k` share `1 - p0` equally. Support size is `k + 1`.
    pub fn pc(p0: f64, k: usize) -> Result<Self> {
        ensure!(
            (0.5..=1.0).contains(&p0),
            "pc distribution needs p0 in [1/2, 1], got {p0}"
        );
        ensure!(k >= 1, "pc distribution needs k >= 1 tail symbols");
        let mut probs = vec![(1.0 - p0) / k as f64; k + 1];
        probs[0] = p0;
        Ok(Self {
            probs,
            label: format!("pc:{p0}:{k}"),
        })
    }

    /// Arbitrary probability vector, renormalized so that it sums to one.
    pub fn explicit(probs: Vec<f64>) -> Result<Self> {
        ensure!(
            !probs.is_empty(),
            "explicit distribution needs at least one entry"
        );
        for (i, &p) in probs.iter().enumerate() {
            ensure!(
                p.is_finite() && p >= 0.0,
                "probability {i} is {p}, must be finite and non-negative"
            );
        }
        let total = compensated_sum(probs.iter().copied());
        ensure!(
            (total - 1.0).abs() <= SUM_TOLERANCE,
            "probabilities sum to {total}, not 1"
        );
        let probs: Vec<f64> = probs.into_iter().map(|p| p / total).collect();
        let label = format!("explicit:{}", probs.len());
        Ok(Self { probs, label })
    }

    /// Zipf law on `k` ranks: `p(i) ∝ (i + 1)^(-s)`.
    pub fn zipf(k: usize, s: f64) -> Result<Self> {
        ensure!(k >= 1, "zipf distribution needs k >= 1");
        ensure!(
            s.is_finite() && s >= 0.0,
            "zipf exponent must be >= 0, got {s}"
        );
        let weights: Vec<f64> = (1..=k).map(|r| (r as f64).powf(-s)).collect();
        let total = compensated_sum(weights.iter().copied());
        Ok(Self {
            probs: weights.into_iter().map(|w| w / total).collect(),
            label: format!("zipf:{k}:{s}"),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn support_size(&self) -> usize {
        self.probs.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Distinct probability values with their multiplicities, ordered by
    /// value. Entries are grouped only when bitwise equal.
    pub fn classes(&self) -> Vec<(f64, f64)> {
        let mut sorted = self.probs.clone();
        sorted.sort_by(f64::total_cmp);
        let mut out: Vec<(f64, f64)> = Vec::new();
        for p in sorted {
            match out.last_mut() {
                Some((q, m)) if q.to_bits() == p.to_bits() => *m += 1.0,
                _ => out.push((p, 1.0)),
            }
        }
        out
    }
}

/// Symbols drawn from a distribution, as indices into its support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    symbols: Vec<usize>,
}

impl Sample {
    pub fn new(symbols: Vec<usize>) -> Self {
        Self { symbols }
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn push(&mut self, symbol: usize) {
        self.symbols.push(symbol);
    }

    pub fn counts(&self) -> SymbolCounts {
        SymbolCounts::from_symbols(&self.symbols)
    }
}

impl From<Vec<usize>> for Sample {
    fn from(symbols: Vec<usize>) -> Self {
        Self::new(symbols)
    }
}

/// Per-symbol multiplicities of a sample, restricted to observed symbols and
/// sorted by symbol index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymbolCounts {
    entries: Vec<(usize, usize)>,
    n: usize,
}

impl SymbolCounts {
    pub fn from_symbols(symbols: &[usize]) -> Self {
        let mut sorted = symbols.to_vec();
        Self::from_unsorted_buffer(&mut sorted)
    }

    /// Sorts `buf` in place and run-length encodes it.
    pub fn from_unsorted_buffer(buf: &mut [usize]) -> Self {
        buf.sort_unstable();
        let mut entries: Vec<(usize, usize)> = Vec::new();
        for &s in buf.iter() {
            match entries.last_mut() {
                Some((sym, c)) if *sym == s => *c += 1,
                _ => entries.push((s, 1)),
            }
        }
        Self {
            entries,
            n: buf.len(),
        }
    }

    /// `(symbol, count)` pairs for every observed symbol.
    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    /// Sample length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of distinct observed symbols.
    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    pub fn max_symbol(&self) -> Option<usize> {
        self.entries.last().map(|&(s, _)| s)
    }
}

/// Precomputed draw table for a distribution: inverse CDF for small
/// alphabets, Vose alias table above [`ALIAS_THRESHOLD`].
#[derive(Debug, Clone)]
pub enum Sampler {
    InverseCdf { cdf: Vec<f64> },
    Alias { prob: Vec<f64>, alias: Vec<usize> },
}

impl Sampler {
    pub fn new(d: &Distribution) -> Self {
        if d.support_size() > ALIAS_THRESHOLD {
            Self::alias(d.probs())
        } else {
            Self::inverse_cdf(d.probs())
        }
    }

    pub fn inverse_cdf(probs: &[f64]) -> Self {
        let mut acc = NeumaierSum::new();
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|&p| {
                acc += p;
                acc.value()
            })
            .collect();
        // Pin everything from the last positive entry up, so that u < 1
        // never lands on a trailing zero-mass symbol.
        let top = probs
            .iter()
            .rposition(|&p| p > 0.0)
            .unwrap_or(cdf.len().saturating_sub(1));
        for c in cdf.iter_mut().skip(top) {
            *c = f64::INFINITY;
        }
        Self::InverseCdf { cdf }
    }

    pub fn alias(probs: &[f64]) -> Self {
        let k = probs.len();
        let mut scaled: Vec<f64> = probs.iter().map(|&p| p * k as f64).collect();
        let mut prob = vec![1.0; k];
        let mut alias: Vec<usize> = (0..k).collect();
        let mut small: Vec<usize> = Vec::new();
        let mut large: Vec<usize> = Vec::new();
        for (i, &s) in scaled.iter().enumerate() {
            if s < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            prob[s] = scaled[s];
            alias[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are 1 up to rounding, unless they carry no mass at all.
        let heaviest = (0..k)
            .max_by(|&a, &b| probs[a].total_cmp(&probs[b]))
            .unwrap_or(0);
        for i in large.into_iter().chain(small) {
            if probs[i] > 0.0 {
                prob[i] = 1.0;
                alias[i] = i;
            } else {
                prob[i] = 0.0;
                alias[i] = heaviest;
            }
        }
        Self::Alias { prob, alias }
    }

    pub fn support_size(&self) -> usize {
        match self {
            Self::InverseCdf { cdf } => cdf.len(),
            Self::Alias { prob, .. } => prob.len(),
        }
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            Self::InverseCdf { cdf } => {
                let u: f64 = rng.random();
                // First index whose cumulative mass exceeds u; zero-mass
                // symbols share their predecessor's value and are skipped.
                cdf.partition_point(|&c| c <= u)
            }
            Self::Alias { prob, alias } => {
                let k = prob.len();
                let i = rng.random_range(0..k);
                let u: f64 = rng.random();
                if u < prob[i] {
                    i
                } else {
                    alias[i]
                }
            }
        }
    }

    /// Overwrites `buf` with `n` fresh draws.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, n: usize, buf: &mut Vec<usize>) {
        buf.clear();
        buf.extend((0..n).map(|_| self.draw(rng)));
    }
}

/// Generator for stream `stream` of `seed`. Every Monte Carlo replicate gets
/// its own stream, so results do not depend on how replicates are scheduled.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` i.i.d. draws from `d`; a pure function of `(d, n, seed)`.
pub fn sample_iid(d: &Distribution, n: usize, seed: u64) -> Result<Sample> {
    ensure!(n >= 1, "sample length must be >= 1");
    let sampler = Sampler::new(d);
    let mut rng = stream_rng(seed, 0);
    let mut buf = Vec::with_capacity(n);
    sampler.fill(&mut rng, n, &mut buf);
    Ok(Sample::new(buf))
}

/// Total probability of the symbols of `d` that do not occur in `s`.
pub fn missing_mass(d: &Distribution, s: &Sample) -> Result<f64> {
    missing_mass_counts(d, &s.counts())
}

pub fn missing_mass_counts(d: &Distribution, counts: &SymbolCounts) -> Result<f64> {
    let k = d.support_size();
    if let Some(max) = counts.max_symbol() {
        ensure!(max < k, "symbol {max} outside support of size {k}");
    }
    Ok(missing_mass_unchecked(d.probs(), counts))
}

pub(crate) fn missing_mass_unchecked(probs: &[f64], counts: &SymbolCounts) -> f64 {
    let k = probs.len();
    if k <= DIRECT_SCAN_LIMIT {
        let mut seen = vec![false; k];
        for &(sym, _) in counts.entries() {
            seen[sym] = true;
        }
        compensated_sum(
            probs
                .iter()
                .zip(&seen)
                .filter(|(_, &hit)| !hit)
                .map(|(&p, _)| p),
        )
    } else {
        let observed = compensated_sum(counts.entries().iter().map(|&(sym, _)| probs[sym]));
        (1.0 - observed).clamp(0.0, 1.0)
    }
}

/// Serializable description of a distribution, as accepted on the command
/// line and in JSON descriptor files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DistSpec {
    Uniform {
        k: usize,
    },
    Pc {
        p0: f64,
        k: usize,
    },
    Explicit {
        probs: Vec<f64>,
    },
    Zipf {
        k: usize,
        s: f64,
    },
    /// Uniform on `⌈c·n⌉` symbols; the alphabet depends on the sample length.
    #[serde(rename = "uniform-cn")]
    UniformCn {
        c: f64,
    },
}

impl DistSpec {
    /// Support size of the uniform distribution selected by `uniform-cn`.
    pub fn uniform_cn_size(c: f64, n: usize) -> Result<usize> {
        ensure!(c.is_finite() && c > 0.0, "uniform-cn needs c > 0, got {c}");
        Ok(((c * n as f64).ceil() as usize).max(1))
    }

    /// Builds the distribution for sample length `n`.
    pub fn build(&self, n: usize) -> Result<Distribution> {
        match self {
            Self::Uniform { k } => Distribution::uniform(*k),
            Self::Pc { p0, k } => Distribution::pc(*p0, *k),
            Self::Explicit { probs } => Distribution::explicit(probs.clone()),
            Self::Zipf { k, s } => Distribution::zipf(*k, *s),
            Self::UniformCn { c } => {
                let k = Self::uniform_cn_size(*c, n)?;
                Ok(Distribution::uniform(k)?.with_label(format!("uniform-cn:{c}(k={k})")))
            }
        }
    }

    /// Same family with its alphabet-size parameter replaced by `k`.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        match self {
            Self::Uniform { .. } | Self::UniformCn { .. } => Ok(Self::Uniform { k }),
            Self::Pc { p0, .. } => Ok(Self::Pc { p0: *p0, k }),
            Self::Zipf { s, .. } => Ok(Self::Zipf { k, s: *s }),
            Self::Explicit { .. } => Err(Error::InvalidArgument(
                "explicit distributions have no alphabet-size parameter".into(),
            )),
        }
    }
}

impl fmt::Display for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform { k } => write!(f, "uniform:{k}"),
            Self::Pc { p0, k } => write!(f, "pc:{p0}:{k}"),
            Self::Explicit { probs } => {
                write!(f, "explicit:")?;
                for (i, p) in probs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
            Self::Zipf { k, s } => write!(f, "zipf:{k}:{s}"),
            Self::UniformCn { c } => write!(f, "uniform-cn:{c}"),
        }
    }
}

impl FromStr for DistSpec {
    type Err = Error;

    /// Parses `uniform:K`, `pc:P0:K`, `zipf:K:S`, `uniform-cn:C` or
    /// `explicit:P1,P2,..`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |what: &str| Error::InvalidArgument(format!("bad distribution `{s}`: {what}"));
        let (kind, rest) = s.split_once(':').ok_or_else(|| bad("missing parameters"))?;
        let parts: Vec<&str> = rest.split(':').collect();
        let int = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| bad("expected an integer"))
        };
        let real = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| bad("expected a number"))
        };
        match (kind, parts.as_slice()) {
            ("uniform", [k]) => Ok(Self::Uniform { k: int(k)? }),
            ("pc", [p0, k]) => Ok(Self::Pc {
                p0: real(p0)?,
                k: int(k)?,
            }),
            ("zipf", [k, e]) => Ok(Self::Zipf {
                k: int(k)?,
                s: real(e)?,
            }),
            ("uniform-cn", [c]) => Ok(Self::UniformCn { c: real(c)? }),
            ("explicit", [list]) => Ok(Self::Explicit {
                probs: list.split(',').map(real).collect::<Result<_>>()?,
            }),
            _ => Err(bad("unknown family or wrong number of parameters")),
        }
    }
}
