//! Deterministic reductions.
//!
//! Every mass and energy total in the crate goes through [`pairwise_sum`], whose
//! association order depends only on the length of the input. Running sums
//! (cumulative mass, prefix tables) use [`Neumaier`] compensation instead.

const BLOCK: usize = 32;

/// Pairwise (cascade) summation with a fixed split rule.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Maps then reduces with [`pairwise_sum`].
pub fn pairwise_sum_map<T, F: Fn(&T) -> f64>(items: &[T], f: F) -> f64 {
    let terms: Vec<f64> = items.iter().map(f).collect();
    pairwise_sum(&terms)
}

/// Compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
