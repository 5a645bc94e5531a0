//! Importance-sampled Monte-Carlo over the hat coordinates.
//!
//! Each hat electron is drawn independently from the isotropic density
//! `p(y) = κ³/(8π)·e^{-κ|y|}` with `κ = 2·envelope_rate`, which mirrors
//! the squared exponential decay of the models. Samples are generated in
//! fixed-size chunks, each from its own ChaCha stream, so the sample set does
//! not depend on how chunks are distributed across threads.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, UnitSphere};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CuspError, Result};

/// Samples per independent random stream.
pub const CHUNK: usize = 1024;

/// Ratio above the running mean that counts as an envelope excursion.
pub const ENVELOPE_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSampler {
    pub seed: u64,
    pub n_samples: usize,
    /// Per-electron amplitude decay rate; the sampling density decays at twice this.
    pub envelope_rate: f64,
    /// Number of batches used for batch-means error estimates.
    #[serde(default = "default_batches")]
    pub batches: usize,
}

fn default_batches() -> usize {
    32
}

/// A fixed set of hat configurations with their sampling densities.
#[derive(Debug, Clone)]
pub struct HatSamples {
    pub points: Vec<Vec<Vector3<f64>>>,
    pub density: Vec<f64>,
    pub batches: usize,
}

impl McSampler {
    pub fn new(seed: u64, n_samples: usize, envelope_rate: f64) -> Self {
        McSampler {
            seed,
            n_samples,
            envelope_rate,
            batches: default_batches(),
        }
    }

    fn check(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(CuspError::integration(
                "monte-carlo",
                "zero samples requested",
            ));
        }
        if !(self.envelope_rate > 0.0) {
            return Err(CuspError::Domain(format!(
                "envelope rate must be positive, got {}",
                self.envelope_rate
            )));
        }
        Ok(())
    }

    /// Sampling density of a single electron at `y`.
    pub fn single_density(&self, y: &Vector3<f64>) -> f64 {
        let k = 2.0 * self.envelope_rate;
        k * k * k / (8.0 * PI) * (-k * y.norm()).exp()
    }

    /// Draws `n_samples` configurations of `n_hat` electrons.
    pub fn draw(&self, n_hat: usize) -> Result<HatSamples> {
        self.check()?;
        let k = 2.0 * self.envelope_rate;
        let gamma = Gamma::new(3.0, 1.0 / k).expect("valid gamma");
        let n_chunks = self.n_samples.div_ceil(CHUNK);
        let chunks: Vec<Vec<Vec<Vector3<f64>>>> = (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(c as u64);
                let len = CHUNK.min(self.n_samples - c * CHUNK);
                (0..len)
                    .map(|_| {
                        (0..n_hat)
                            .map(|_| {
                                let r: f64 = gamma.sample(&mut rng);
                                let d: [f64; 3] = UnitSphere.sample(&mut rng);
                                // guard against an exact zero radius
                                let r = if r > 0.0 { r } else { rng.gen::<f64>() * 1e-300 };
                                Vector3::new(d[0], d[1], d[2]) * r
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let points: Vec<Vec<Vector3<f64>>> = chunks.into_iter().flatten().collect();
        let density = points
            .iter()
            .map(|hat| hat.iter().map(|y| self.single_density(y)).product())
            .collect();
        Ok(HatSamples {
            points,
            density,
            batches: self.batches.clamp(1, self.n_samples),
        })
    }
}

/// Mean, batch means and excursion count of a weighted sample `f_i/p_i`.
#[derive(Debug, Clone)]
pub struct SampleStats {
    pub mean: f64,
    pub batch_means: Vec<f64>,
    pub standard_error: f64,
    pub excursions: usize,
}

/// Summarizes the importance weights `ratios[i] = f(y_i)/p(y_i)`.
pub fn summarize(ratios: &[f64], batches: usize) -> SampleStats {
    let n = ratios.len();
    let mean = super::estimate::pairwise_sum(ratios) / n as f64;
    let var = if n > 1 {
        super::estimate::pairwise_sum(&ratios.iter().map(|v| (v - mean).powi(2)).collect::<Vec<_>>())
            / (n as f64 - 1.0)
    } else {
        f64::INFINITY
    };
    let standard_error = if n > 1 {
        (var / n as f64).sqrt()
    } else {
        mean.abs().max(f64::MIN_POSITIVE)
    };
    let b = batches.clamp(1, n);
    let batch_means = (0..b)
        .map(|i| {
            let lo = i * n / b;
            let hi = (i + 1) * n / b;
            super::estimate::pairwise_sum(&ratios[lo..hi]) / (hi - lo) as f64
        })
        .collect();
    let threshold = ENVELOPE_FACTOR * mean.abs();
    let excursions = if mean != 0.0 {
        ratios.iter().filter(|v| v.abs() > threshold).count()
    } else {
        0
    };
    SampleStats {
        mean,
        batch_means,
        standard_error,
        excursions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_samples() {
        let s = McSampler::new(7, 3000, 1.0);
        let a = s.draw(2).unwrap();
        let b = s.draw(2).unwrap();
        assert_eq!(a.points, b.points);
        let c = McSampler::new(8, 3000, 1.0).draw(2).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn density_is_normalized() {
        // E[1/p] over p-samples of p itself equals 1 trivially; check the
        // moment E[|y|] = 3/κ instead.
        let s = McSampler::new(1, 40_000, 0.5);
        let d = s.draw(1).unwrap();
        let m: f64 = d.points.iter().map(|h| h[0].norm()).sum::<f64>() / 40_000.0;
        assert!((m - 3.0).abs() < 0.05, "{m}");
    }

    #[test]
    fn zero_samples_fail() {
        let s = McSampler::new(1, 0, 1.0);
        assert!(matches!(
            s.draw(1),
            Err(CuspError::IntegrationFailure { .. })
        ));
    }

    #[test]
    fn summary_of_constant_is_exact() {
        let st = summarize(&[2.0; 100], 10);
        assert_eq!(st.mean, 2.0);
        assert_eq!(st.standard_error, 0.0);
        assert_eq!(st.batch_means.len(), 10);
        assert_eq!(st.excursions, 0);
    }
}
