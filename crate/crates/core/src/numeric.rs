//! Small numerical kernels shared by the risk and bound evaluators.

use std::iter::Sum;
use std::ops::AddAssign;

use libm::lgamma as ln_gamma;

/// Compensated accumulator (Kahan summation with Neumaier's correction for
/// addends larger than the running total).
#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another partial sum in, keeping both compensation terms.
    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl Sum<f64> for NeumaierSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator of `f64`.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().sum::<NeumaierSum>().value()
}

/// `(1 - x)^m` evaluated as `exp(m * ln(1 - x))`.
///
/// `x >= 1` gives 0 for `m > 0` and 1 for `m = 0` (`0^0 = 1`).
pub fn pow1m(x: f64, m: f64) -> f64 {
    if m == 0.0 {
        return 1.0;
    }
    if x >= 1.0 {
        return 0.0;
    }
    (m * (-x).ln_1p()).exp()
}

pub fn lgamma(x: f64) -> f64 {
    ln_gamma(x)
}

/// `ln B(x, y)`; `+inf` when either argument is zero.
pub fn ln_beta(x: f64, y: f64) -> f64 {
    if x == 0.0 || y == 0.0 {
        return f64::INFINITY;
    }
    ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y)
}

pub const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Result of a one-dimensional maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub argmax: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `tol`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Maximum {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while (b - a).abs() > tol && iterations < 10_000 {
        iterations += 1;
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    let argmax = 0.5 * (a + b);
    Maximum {
        argmax,
        value: f(argmax),
        iterations,
    }
}

/// Maximizes `f(c)` over `c` in `[lo, hi]` (both positive) by golden-section
/// search in `ln c`. The search in log space continues until the bracket in
/// `c` itself is narrower than `tol_c`.
pub fn golden_section_max_log<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol_c: f64) -> Maximum {
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let g = |t: f64| f(t.exp());
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    let mut iterations = 0;
    while b.exp() - a.exp() > tol_c && iterations < 10_000 {
        iterations += 1;
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = g(x1);
        }
    }
    let argmax = (0.5 * (a + b)).exp();
    Maximum {
        argmax,
        value: f(argmax),
        iterations,
    }
}
