//! Summation kernels.
//!
//! Noise moments are differences of sums of ~1e-8 sized terms taken over
//! 1e4..1e6 observations, so every long reduction in the crate goes through a
//! compensated accumulator and a fixed iteration order.

use std::ops::AddAssign;

/// Kahan-Babuska (Neumaier) compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline(always)]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        // select instead of branch so the multi-lag loop stays branch-free
        let big = if self.sum.abs() >= x.abs() {
            (self.sum - t) + x
        } else {
            (x - t) + self.sum
        };
        self.comp += big;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of a slice, left to right.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<NeumaierSum>().value()
}

/// Sample mean and standard deviation with the `n - 1` denominator.
///
/// Returns `None` for an empty slice; the standard deviation of a single
/// value is reported as 0.
pub fn mean_sd(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = compensated_sum(xs) / n;
    if xs.len() == 1 {
        return Some((mean, 0.0));
    }
    let ss: NeumaierSum = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    Some((mean, (ss.value() / (n - 1.0)).sqrt()))
}
