use serde::Serialize;

use crate::error::{Error, Result};

/// A normalized, symmetric 1D Gaussian kernel with an odd number of taps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianKernel {
    size: usize,
    sigma: f64,
    weights: Vec<f64>,
}

impl GaussianKernel {
    /// Samples `exp(-d² / 2σ²)` at integer offsets `d` from the center tap and
    /// normalizes the taps to sum to one.
    pub fn new(size: usize, sigma: f64) -> Result<Self> {
        if size.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "kernel size must be odd and positive, got {size}"
            )));
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::invalid(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        let half = (size / 2) as f64;
        let denom = 2.0 * sigma * sigma;
        let raw: Vec<f64> = (0..size)
            .map(|i| {
                let d = i as f64 - half;
                (-(d * d) / denom).exp()
            })
            .collect();
        let total: f64 = raw.iter().sum();
        let weights = raw.into_iter().map(|w| w / total).collect();
        Ok(Self {
            size,
            sigma,
            weights,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent evaluation of the defining formula.
    fn oracle(size: usize, sigma: f64) -> Vec<f64> {
        let c = (size as f64 - 1.0) / 2.0;
        let w: Vec<f64> = (0..size)
            .map(|i| (-((i as f64 - c).powi(2)) / (2.0 * sigma.powi(2))).exp())
            .collect();
        let s: f64 = w.iter().sum();
        w.iter().map(|v| v / s).collect()
    }

    #[test]
    fn single_tap_is_identity() {
        assert_eq!(GaussianKernel::new(1, 0.5).unwrap().weights(), &[1.0]);
    }

    #[test]
    fn default_kernel_weights() {
        let k = GaussianKernel::new(3, 0.5).unwrap();
        let w = k.weights();
        // exp(-2) / (1 + 2 exp(-2)) and 1 / (1 + 2 exp(-2))
        let e = (-2.0f64).exp();
        assert!((w[0] - e / (1.0 + 2.0 * e)).abs() < 1e-15);
        assert!((w[1] - 1.0 / (1.0 + 2.0 * e)).abs() < 1e-15);
        assert!((w[0] - 0.1065).abs() < 5e-5);
        assert!((w[1] - 0.7870).abs() < 5e-5);
        assert_eq!(w[0], w[2]);
    }

    #[test]
    fn matches_formula_and_invariants() {
        for &(size, sigma) in &[(5, 1.0), (7, 0.3), (9, 2.0), (3, 10.0)] {
            let k = GaussianKernel::new(size, sigma).unwrap();
            let w = k.weights();
            let o = oracle(size, sigma);
            for (a, b) in w.iter().zip(&o) {
                assert!((a - b).abs() < 1e-15);
            }
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for i in 0..size {
                assert_eq!(w[i], w[size - 1 - i]);
                assert!(w[i] > 0.0);
            }
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(GaussianKernel::new(4, 0.5).is_err());
        assert!(GaussianKernel::new(0, 0.5).is_err());
        assert!(GaussianKernel::new(3, 0.0).is_err());
        assert!(GaussianKernel::new(3, -1.0).is_err());
        assert!(GaussianKernel::new(3, f64::NAN).is_err());
    }
}
