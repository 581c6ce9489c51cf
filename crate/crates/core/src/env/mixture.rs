use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_distr::Normal;

use crate::error::{Error, Result};

/// One-dimensional Gaussian mixture stream, clipped to [0, 1].
#[derive(Clone, Debug)]
pub struct GaussianMixture {
    means: Vec<f64>,
    stds: Vec<f64>,
    weights: Vec<f64>,
    picker: WeightedIndex<f64>,
    components: Vec<Normal<f64>>,
}

impl Default for GaussianMixture {
    /// Means 0.2, 0.5, 0.8 with std 0.03 and equal weights.
    fn default() -> Self {
        Self::new(vec![0.2, 0.5, 0.8], vec![0.03; 3], vec![1.0; 3]).expect("valid default mixture")
    }
}

impl GaussianMixture {
    pub fn new(means: Vec<f64>, stds: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if means.is_empty() || means.len() != stds.len() || means.len() != weights.len() {
            return Err(Error::config(
                "mixture",
                "means, stds and weights must be non-empty and of equal length",
            ));
        }
        let picker =
            WeightedIndex::new(&weights).map_err(|e| Error::config("mixture.weights", e.to_string()))?;
        let components = means
            .iter()
            .zip(&stds)
            .map(|(&m, &s)| Normal::new(m, s).map_err(|e| Error::config("mixture.stds", e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            means,
            stds,
            weights,
            picker,
            components,
        })
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    /// Weighted average of the component means (ignores clipping).
    pub fn mean(&self) -> f64 {
        let total: f64 = self.weights.iter().sum();
        self.means.iter().zip(&self.weights).map(|(m, w)| m * w).sum::<f64>() / total
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let k = self.picker.sample(rng);
        self.components[k].sample(rng).clamp(0.0, 1.0)
    }
}
