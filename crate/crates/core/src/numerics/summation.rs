//! Compensated (Kahan–Babuška–Neumaier) summation.

use std::ops::AddAssign;

/// Running sum that carries the rounding error of every addition.
///
/// Accumulation order is the order of the `add` calls, so the result is a
/// deterministic function of the input sequence.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
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
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of `terms` in the given order.
pub fn compensated_sum(terms: &[f64]) -> f64 {
    terms.iter().copied().collect::<NeumaierSum>().value()
}

/// Compensated running sums: `out[i] = terms[0] + ... + terms[i]`.
pub fn compensated_prefix_sums(terms: &[f64]) -> Vec<f64> {
    let mut acc = NeumaierSum::new();
    terms
        .iter()
        .map(|&t| {
            acc.add(t);
            acc.value()
        })
        .collect()
}
