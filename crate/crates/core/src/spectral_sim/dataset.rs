use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::beam::{assemble_model, DEFAULT_ELEMENTS};
use super::modal::natural_frequencies;
use super::params::{DamageSpec, StructureParams};
use super::DEFAULT_MODES;
use crate::error::{domain, Result};

/// Ground-truth condition of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Healthy,
    Damaged,
}

impl Condition {
    /// Class encoding used by the classifier: healthy +1, damaged -1.
    pub fn sign(self) -> f64 {
        match self {
            Condition::Healthy => 1.0,
            Condition::Damaged => -1.0,
        }
    }

    /// Non-negative values map to healthy.
    pub fn from_sign(value: f64) -> Self {
        if value >= 0.0 {
            Condition::Healthy
        } else {
            Condition::Damaged
        }
    }
}

/// Noisy natural-frequency samples of one structure.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalDataset {
    /// `n_samples x D`, column j holds the j-th lowest frequency (Hz).
    pub features: DMatrix<f64>,
    pub condition_labels: Vec<Condition>,
    /// Whether the learner may see the label of each row.
    pub label_visible: Vec<bool>,
    /// Position in the chain, 0 for the source bridge.
    pub domain_index: usize,
}

impl ModalDataset {
    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    /// Rows that are both healthy and label-visible.
    pub fn visible_healthy_rows(&self) -> Vec<usize> {
        self.condition_labels
            .iter()
            .zip(&self.label_visible)
            .enumerate()
            .filter(|(_, (c, v))| **v && **c == Condition::Healthy)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn count(&self, condition: Condition) -> usize {
        self.condition_labels
            .iter()
            .filter(|&&c| c == condition)
            .count()
    }

    /// Hides every label except a random `fraction` of the healthy rows
    /// (rounded, at least two when that many exist).
    pub fn with_visible_normals<R: Rng + ?Sized>(
        mut self,
        fraction: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(domain(format!(
                "visible fraction must lie in (0, 1], got {fraction}"
            )));
        }
        let healthy: Vec<usize> = self
            .condition_labels
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == Condition::Healthy)
            .map(|(i, _)| i)
            .collect();
        let wanted = ((fraction * healthy.len() as f64).round() as usize)
            .max(2)
            .min(healthy.len());
        self.label_visible.iter_mut().for_each(|v| *v = false);
        for pick in index::sample(rng, healthy.len(), wanted) {
            self.label_visible[healthy[pick]] = true;
        }
        Ok(self)
    }
}

/// Draws `n_reps` healthy rows around `healthy` and `n_reps` damaged rows
/// around `damaged`, each feature perturbed by zero-mean Gaussian noise with
/// standard deviation `noise_coeff` times the noise-free frequency.
///
/// Healthy rows come first. All labels are visible.
pub fn sample_dataset<R: Rng + ?Sized>(
    healthy: &[f64],
    damaged: &[f64],
    n_reps: usize,
    noise_coeff: f64,
    domain_index: usize,
    rng: &mut R,
) -> Result<ModalDataset> {
    if n_reps == 0 {
        return Err(domain("n_reps must be at least 1"));
    }
    if !(noise_coeff >= 0.0 && noise_coeff.is_finite()) {
        return Err(domain(format!(
            "noise_coeff must be non-negative, got {noise_coeff}"
        )));
    }
    if healthy.len() != damaged.len() || healthy.is_empty() {
        return Err(crate::error::dimension(format!(
            "healthy ({}) and damaged ({}) frequency vectors must have equal non-zero length",
            healthy.len(),
            damaged.len()
        )));
    }
    let d = healthy.len();
    let n = 2 * n_reps;
    let mut features = DMatrix::zeros(n, d);
    let mut labels = Vec::with_capacity(n);
    for (block, (mean, condition)) in [(healthy, Condition::Healthy), (damaged, Condition::Damaged)]
        .into_iter()
        .enumerate()
    {
        for r in 0..n_reps {
            let row = block * n_reps + r;
            for (j, &f) in mean.iter().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                features[(row, j)] = f + noise_coeff * f * z;
            }
            labels.push(condition);
        }
    }
    Ok(ModalDataset {
        features,
        condition_labels: labels,
        label_visible: vec![true; n],
        domain_index,
    })
}

/// Computes the 15 lowest natural frequencies of the healthy and damaged
/// variants of `params` and samples a fully labelled dataset from them.
///
/// Deterministic for a fixed `rng_seed`.
pub fn generate_dataset(
    params: &StructureParams,
    damage: &DamageSpec,
    n_reps: usize,
    noise_coeff: f64,
    rng_seed: u64,
) -> Result<ModalDataset> {
    if noise_coeff.is_nan() || noise_coeff < 0.0 {
        return Err(domain(format!(
            "noise_coeff must be non-negative, got {noise_coeff}"
        )));
    }
    let (m, k) = assemble_model(params, None, DEFAULT_ELEMENTS)?;
    let healthy = natural_frequencies(&m, &k, DEFAULT_MODES)?;
    let (m, k) = assemble_model(params, Some(damage), DEFAULT_ELEMENTS)?;
    let damaged = natural_frequencies(&m, &k, DEFAULT_MODES)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    sample_dataset(&healthy, &damaged, n_reps, noise_coeff, 0, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_reproduces_mean() {
        let p = StructureParams::bridge();
        let ds = generate_dataset(&p, &DamageSpec::default(), 5, 0.0, 1).unwrap();
        let (m, k) = assemble_model(&p, None, DEFAULT_ELEMENTS).unwrap();
        let f = natural_frequencies(&m, &k, DEFAULT_MODES).unwrap();
        for r in 0..5 {
            for (j, fj) in f.iter().enumerate() {
                assert_eq!(ds.features[(r, j)], *fj);
            }
        }
        assert_eq!(ds.n_samples(), 10);
        assert_eq!(ds.count(Condition::Damaged), 5);
    }

    #[test]
    fn same_seed_same_bits() {
        let p = StructureParams::aeroplane();
        let a = generate_dataset(&p, &DamageSpec::default(), 20, 0.01, 7).unwrap();
        let b = generate_dataset(&p, &DamageSpec::default(), 20, 0.01, 7).unwrap();
        assert_eq!(a, b);
        let c = generate_dataset(&p, &DamageSpec::default(), 20, 0.01, 8).unwrap();
        assert_ne!(a.features, c.features);
    }

    #[test]
    fn negative_noise_rejected() {
        let p = StructureParams::bridge();
        assert!(generate_dataset(&p, &DamageSpec::default(), 5, -0.1, 1).is_err());
        assert!(generate_dataset(&p, &DamageSpec::default(), 0, 0.1, 1).is_err());
    }

    #[test]
    fn visible_normals_subset() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ds = sample_dataset(&[1.0, 2.0], &[0.9, 1.9], 100, 0.01, 1, &mut rng)
            .unwrap()
            .with_visible_normals(0.5, &mut rng)
            .unwrap();
        let visible = ds.visible_healthy_rows();
        assert_eq!(visible.len(), 50);
        assert!(visible.iter().all(|&i| i < 100));
        assert_eq!(ds.label_visible.iter().filter(|&&v| v).count(), 50);
    }

    #[test]
    fn sign_round_trip() {
        for c in [Condition::Healthy, Condition::Damaged] {
            assert_eq!(Condition::from_sign(c.sign()), c);
        }
        assert_eq!(Condition::from_sign(0.0), Condition::Healthy);
    }
}
