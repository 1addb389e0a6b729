//! Poisson-binomial law of the anchored-box count.

use serde::Serialize;

use crate::geometry::SuccessProfile;

/// Distribution of a sum of independent Bernoulli variables with
/// non-identical success probabilities. `probabilities[k] = P(count = k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonBinomialPmf {
    pub probabilities: Vec<f64>,
}

impl PoissonBinomialPmf {
    /// `O(N^2)` convolution recurrence, one Bernoulli factor at a time.
    pub fn from_probabilities(q: &[f64]) -> Self {
        let mut pmf = Vec::with_capacity(q.len() + 1);
        pmf.push(1.0);
        for &p in q {
            let p = p.clamp(0.0, 1.0);
            pmf.push(0.0);
            for k in (1..pmf.len()).rev() {
                pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p;
            }
            pmf[0] *= 1.0 - p;
        }
        Self { probabilities: pmf }
    }

    /// Classical binomial law `Bin(n, p)`.
    pub fn binomial(n: usize, p: f64) -> Self {
        Self::from_probabilities(&vec![p; n])
    }

    pub fn trials(&self) -> usize {
        self.probabilities.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.probabilities.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    /// `E |count/N - center|^p`.
    pub fn abs_moment_about(&self, center: f64, p: f64) -> f64 {
        let n = self.trials().max(1) as f64;
        self.probabilities
            .iter()
            .enumerate()
            .map(|(k, w)| w * (k as f64 / n - center).abs().powf(p))
            .sum()
    }
}

pub fn pb_pmf(q: &SuccessProfile) -> PoissonBinomialPmf {
    PoissonBinomialPmf::from_probabilities(&q.q)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Sum over all 2^N outcomes.
    fn enumerate(q: &[f64]) -> Vec<f64> {
        let n = q.len();
        let mut out = vec![0.0; n + 1];
        for mask in 0u32..(1 << n) {
            let mut w = 1.0;
            for (i, &p) in q.iter().enumerate() {
                w *= if mask >> i & 1 == 1 { p } else { 1.0 - p };
            }
            out[mask.count_ones() as usize] += w;
        }
        out
    }

    #[test]
    fn small_examples() {
        let pmf = PoissonBinomialPmf::from_probabilities(&[0.5, 0.5]);
        assert_eq!(pmf.probabilities, vec![0.25, 0.5, 0.25]);
        let pmf = PoissonBinomialPmf::from_probabilities(&[1.0, 1.0, 1.0]);
        assert_eq!(pmf.probabilities, vec![0.0, 0.0, 0.0, 1.0]);
        let pmf = PoissonBinomialPmf::from_probabilities(&[0.2, 0.7]);
        for (a, b) in pmf.probabilities.iter().zip([0.24, 0.62, 0.14]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_enumeration() {
        let q = [0.1, 0.35, 0.9, 0.5, 0.77, 0.02];
        for n in 1..=q.len() {
            let fast = PoissonBinomialPmf::from_probabilities(&q[..n]);
            let slow = enumerate(&q[..n]);
            for (a, b) in fast.probabilities.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-15);
            }
            assert!((fast.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
