//! Per-batch tallies and batch-means standard errors.

use serde::{Deserialize, Serialize};

/// Point estimate with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, std_err: 0.0 }
    }

    /// |self − target| in units of the standard error (∞ if the error is 0 and they differ).
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.value - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_err
        }
    }

    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        self.z_score(target) <= sigmas
    }

    pub fn scaled(self, k: f64) -> Self {
        Self { value: self.value * k, std_err: self.std_err * k.abs() }
    }
}

/// Difference of two independent estimates.
pub fn difference(a: &Estimate, b: &Estimate) -> Estimate {
    Estimate { value: a.value - b.value, std_err: a.std_err.hypot(b.std_err) }
}

/// Sum of two independent estimates.
pub fn sum(a: &Estimate, b: &Estimate) -> Estimate {
    Estimate { value: a.value + b.value, std_err: a.std_err.hypot(b.std_err) }
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Tally {
    pub slots: f64,
    pub interior: f64,
    pub interior_s: f64,
    pub empty: f64,
    pub empty_s: f64,
    pub full: f64,
    pub full_r: f64,
    pub offered_s: f64,
    pub offered_r: f64,
    /// Flow through the relay (bits or packets).
    pub delivered: f64,
    /// Arrivals to the tracked queue (packets for FIFO, holes for LIFO).
    pub arrivals: f64,
    pub occupancy: f64,
    pub underflow: f64,
    pub overflow: f64,
    pub s_tx: f64,
    pub r_tx: f64,
    pub pe_s: f64,
    pub pe_r: f64,
    pub err_s: f64,
    pub err_r: f64,
    pub delay_sum: f64,
    pub delay_n: f64,
}

/// ΣN/ΣD over batches with the linearised batch-means error. `None` when ΣD = 0.
pub(crate) fn ratio<T>(batches: &[T], num: impl Fn(&T) -> f64, den: impl Fn(&T) -> f64) -> Option<Estimate> {
    let n: f64 = batches.iter().map(&num).sum();
    let d: f64 = batches.iter().map(&den).sum();
    if !(d > 0.0) {
        return None;
    }
    let r = n / d;
    let k = batches.len() as f64;
    let ss: f64 = batches.iter().map(|b| (num(b) - r * den(b)).powi(2)).sum();
    let std_err = if k > 1.0 { (ss * k / (k - 1.0)).sqrt() / d } else { f64::INFINITY };
    Some(Estimate { value: r, std_err })
}
