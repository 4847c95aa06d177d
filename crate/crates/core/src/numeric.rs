//! Deterministic floating-point reductions.

use num_traits::Float;

/// Pairwise (cascade) summation: the reduction tree depends only on the
/// length of `xs`, so results are reproducible regardless of how the terms
/// were produced.
pub fn pairwise_sum<F: Float>(xs: &[F]) -> F {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().fold(F::zero(), |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Compensated (Neumaier) running sum.
#[derive(Clone, Copy, Debug)]
pub struct CompensatedSum<F> {
    sum: F,
    carry: F,
}

impl<F: Float> CompensatedSum<F> {
    pub fn new() -> Self {
        CompensatedSum {
            sum: F::zero(),
            carry: F::zero(),
        }
    }

    pub fn add(&mut self, x: F) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry = self.carry + ((self.sum - t) + x);
        } else {
            self.carry = self.carry + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> F {
        self.sum + self.carry
    }
}

impl<F: Float> Default for CompensatedSum<F> {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_small_integers() {
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500_500.0);
        assert_eq!(pairwise_sum::<f64>(&[]), 0.0);
    }

    #[test]
    fn compensated_recovers_cancellation() {
        let mut s = CompensatedSum::<f64>::new();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn works_in_single_precision() {
        let xs = vec![0.1f32; 1 << 16];
        let naive: f32 = xs.iter().sum();
        let exact = 6553.6f32;
        assert!((pairwise_sum(&xs) - exact).abs() < (naive - exact).abs());
    }
}
