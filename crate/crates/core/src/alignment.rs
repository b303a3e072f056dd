//! Normal-condition alignment: each domain is standardized column by column
//! with the mean and standard deviation of its label-visible healthy rows,
//! so that every structure's normal condition sits at the origin with unit
//! spread.

use nalgebra::DVector;

use crate::error::{dimension, Error, Result};
use crate::spectral_sim::ModalDataset;

/// Relative floor for a vanishing standard deviation.
pub const STD_FLOOR: f64 = 1e-12;

/// Per-feature statistics of the visible normal-condition data.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalStats {
    pub mean: DVector<f64>,
    /// Strictly positive.
    pub std: DVector<f64>,
}

impl NormalStats {
    /// Statistics that leave data unchanged.
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: DVector::zeros(dim),
            std: DVector::from_element(dim, 1.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Column means and sample standard deviations over exactly the rows that
/// are healthy and label-visible.
///
/// A standard deviation below `STD_FLOOR * |mean|` (or `STD_FLOOR` for a
/// zero mean) is raised to that floor and logged. Rounding in the mean
/// leaves constant columns with a std of a few ulps rather than exactly 0.
pub fn fit_normal_stats(dataset: &ModalDataset) -> Result<NormalStats> {
    let rows = dataset.visible_healthy_rows();
    if rows.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "domain {} has {} visible normal samples, need at least 2",
            dataset.domain_index,
            rows.len()
        )));
    }
    let d = dataset.n_features();
    let n = rows.len() as f64;
    let mut mean: DVector<f64> = DVector::zeros(d);
    for &r in &rows {
        for j in 0..d {
            mean[j] += dataset.features[(r, j)];
        }
    }
    mean /= n;
    let mut std: DVector<f64> = DVector::zeros(d);
    for &r in &rows {
        for j in 0..d {
            let dev = dataset.features[(r, j)] - mean[j];
            std[j] += dev * dev;
        }
    }
    for j in 0..d {
        let s = (std[j] / (n - 1.0)).sqrt();
        let floor = if mean[j] != 0.0 {
            STD_FLOOR * mean[j].abs()
        } else {
            STD_FLOOR
        };
        std[j] = if s >= floor {
            s
        } else {
            log::warn!(
                "domain {}: feature {j} has negligible normal-condition variance, flooring std at {floor:e}",
                dataset.domain_index
            );
            floor
        };
    }
    Ok(NormalStats { mean, std })
}

/// Standardizes every feature column with `stats`; labels, visibility and
/// domain index are carried over unchanged.
pub fn align(dataset: &ModalDataset, stats: &NormalStats) -> Result<ModalDataset> {
    let d = dataset.n_features();
    if stats.dim() != d || stats.std.len() != d {
        return Err(dimension(format!(
            "stats have dimension {} but features have {d}",
            stats.dim()
        )));
    }
    let mut out = dataset.clone();
    for j in 0..d {
        let (m, s) = (stats.mean[j], stats.std[j]);
        out.features.column_mut(j).apply(|x| *x = (*x - m) / s);
    }
    Ok(out)
}

/// Fits on `dataset` and aligns it with its own statistics.
pub fn self_align(dataset: &ModalDataset) -> Result<ModalDataset> {
    let stats = fit_normal_stats(dataset)?;
    align(dataset, &stats)
}
