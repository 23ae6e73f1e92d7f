//! Running mean and standard-error accumulators that merge exactly.
//!
//! Merging uses the pairwise update of Chan et al., so the result depends
//! only on the order of merges, never on thread scheduling.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Mean and variance of a stream of reals.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl MeanAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &MeanAccumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        let wa = self.count as f64 / n;
        let wb = other.count as f64 / n;
        self.mean = wa * self.mean + wb * other.mean;
        self.m2 += other.m2 + delta * delta * self.count as f64 * wb;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        self.m2 / (self.count - 1) as f64
    }

    pub fn estimate(&self) -> MeanEstimate {
        let se = if self.count == 0 { f64::NAN } else { math::sqrt(self.variance() / self.count as f64) };
        MeanEstimate { mean: self.mean, std_error: se, samples: self.count }
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl MeanEstimate {
    /// `|mean - target| / std_error`; zero when both the deviation and the
    /// error vanish.
    pub fn z_score(&self, target: f64) -> f64 {
        let dev = math::abs(self.mean - target);
        if dev == 0.0 {
            0.0
        } else {
            dev / self.std_error
        }
    }
}

/// A fixed-length vector of independent [`MeanAccumulator`]s fed together.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorAccumulator(Vec<MeanAccumulator>);

impl VectorAccumulator {
    pub fn new(len: usize) -> Self {
        VectorAccumulator(vec![MeanAccumulator::new(); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, xs: &[f64]) {
        assert_eq!(xs.len(), self.0.len());
        for (acc, &x) in self.0.iter_mut().zip(xs) {
            acc.push(x);
        }
    }

    pub fn merge(&mut self, other: &VectorAccumulator) {
        assert_eq!(self.0.len(), other.0.len());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            a.merge(b);
        }
    }

    pub fn get(&self, i: usize) -> &MeanAccumulator {
        &self.0[i]
    }

    pub fn estimates(&self) -> Vec<MeanEstimate> {
        self.0.iter().map(MeanAccumulator::estimate).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mean_and_variance() {
        let mut a = MeanAccumulator::new();
        for x in [1.0, 2.0, 3.0, 4.0] {
            a.push(x);
        }
        assert_eq!(a.mean(), 2.5);
        assert!((a.variance() - 5.0 / 3.0).abs() < 1e-15);
        let e = a.estimate();
        assert!((e.std_error - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(e.z_score(2.5), 0.0);
    }

    #[test]
    fn empty_merge_is_identity() {
        let mut a = MeanAccumulator::new();
        a.push(3.0);
        let before = a;
        a.merge(&MeanAccumulator::new());
        assert_eq!(a, before);
        let mut e = MeanAccumulator::new();
        e.merge(&before);
        assert_eq!(e, before);
    }

    proptest! {
        #[test]
        fn merge_matches_single_stream(xs in proptest::collection::vec(-1e3f64..1e3, 2..200), split in 0usize..200) {
            let split = split.min(xs.len());
            let mut whole = MeanAccumulator::new();
            xs.iter().for_each(|&x| whole.push(x));
            let mut a = MeanAccumulator::new();
            let mut b = MeanAccumulator::new();
            xs[..split].iter().for_each(|&x| a.push(x));
            xs[split..].iter().for_each(|&x| b.push(x));
            a.merge(&b);
            prop_assert_eq!(a.count(), whole.count());
            prop_assert!((a.mean() - whole.mean()).abs() <= 1e-9 * (1.0 + whole.mean().abs()));
            prop_assert!((a.variance() - whole.variance()).abs() <= 1e-8 * (1.0 + whole.variance()));
        }
    }
}
