//! PCA subspaces, orthogonal completion and the principal-angle
//! factorization between a source and a target subspace.
//!
//! For orthonormal bases `S₁, S₂ ∈ ℝ^{D×d}` with `Q = [S₁ R₁]` orthogonal,
//! the factorization satisfies
//!
//! ```text
//! S₁ᵀ S₂ =  V₁ diag(cos θ) Vᵀ
//! R₁ᵀ S₂ = -Ṽ₂ diag(sin θ) Vᵀ
//! ```
//!
//! It is built from an SVD of `S₁ᵀS₂`; the angles come from both the cosines
//! and the column norms of `R₁ᵀS₂V`, which keeps small angles accurate.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{dimension, domain, Error, Result};

/// Orthonormality tolerance accepted by [`SubspaceBasis::new`].
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Below this `sin θ` the bottom rotation column is completed by
/// orthonormalization instead of division.
pub const SMALL_SINE: f64 = 1e-6;

const RANK_TOL: f64 = 1e-10;

/// A `D×d` matrix with orthonormal columns, `1 ≤ d ≤ D/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    basis: DMatrix<f64>,
}

impl SubspaceBasis {
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        let (big_d, d) = basis.shape();
        if d == 0 || 2 * d > big_d {
            return Err(dimension(format!(
                "subspace dimension {d} must satisfy 1 <= d <= D/2 for D = {big_d}"
            )));
        }
        let gram = basis.transpose() * &basis;
        let err = (gram - DMatrix::<f64>::identity(d, d)).amax();
        if err.is_nan() || err > ORTHONORMAL_TOL {
            return Err(Error::Numeric(format!(
                "basis columns are not orthonormal (max deviation {err:e})"
            )));
        }
        Ok(Self { basis })
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn subspace_dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthogonal projector `S Sᵀ`.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.basis
    }
}

fn check_subspace_dim(d: usize, big_d: usize) -> Result<()> {
    if d == 0 || 2 * d > big_d {
        return Err(dimension(format!(
            "subspace dimension {d} must satisfy 1 <= d <= D/2 for D = {big_d}"
        )));
    }
    Ok(())
}

/// Singular values (descending) and right singular vectors of the
/// column-centred data.
fn centred_svd(features: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = features.nrows();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "PCA needs at least 2 samples, got {n}"
        )));
    }
    let mut centred = features.clone();
    for mut col in centred.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    if centred.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite feature value".into()));
    }
    let svd = SVD::new(centred, false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numeric("SVD did not return V".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut directions = DMatrix::zeros(features.ncols(), order.len());
    for (k, &i) in order.iter().enumerate() {
        directions.set_column(k, &v_t.row(i).transpose());
    }
    Ok((values, directions))
}

/// Top-`d` principal directions of the column-centred data, ordered by
/// descending explained variance. Each column is signed so that its
/// largest-magnitude entry is positive.
pub fn pca_basis(features: &DMatrix<f64>, d: usize) -> Result<SubspaceBasis> {
    check_subspace_dim(d, features.ncols())?;
    let (values, directions) = centred_svd(features)?;
    let top = values.first().copied().unwrap_or(0.0);
    let rank = values
        .iter()
        .filter(|&&s| s > RANK_TOL * top && s > 0.0)
        .count();
    if rank < d {
        return Err(Error::DegenerateSubspace { requested: d, rank });
    }
    let mut basis = directions.columns(0, d).into_owned();
    for mut col in basis.column_iter_mut() {
        let pivot = col
            .iter()
            .copied()
            .fold(0.0_f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        if pivot < 0.0 {
            col.neg_mut();
        }
    }
    SubspaceBasis::new(basis)
}

/// Fraction of total variance carried by each principal direction,
/// descending. Padded with zeros to `D` entries.
pub fn explained_variance_ratios(features: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (values, _) = centred_svd(features)?;
    let total: f64 = values.iter().map(|s| s * s).sum();
    let mut ratios: Vec<f64> = if total > 0.0 {
        values.iter().map(|s| s * s / total).collect()
    } else {
        vec![0.0; values.len()]
    };
    ratios.resize(features.ncols(), 0.0);
    Ok(ratios)
}

fn dimension_for(ratios: &[f64], threshold: f64) -> usize {
    let mut acc = 0.0;
    for (k, r) in ratios.iter().enumerate() {
        acc += r;
        if acc >= threshold {
            return k + 1;
        }
    }
    ratios.len()
}

/// Smallest `d` at which both domains' cumulative explained variance reaches
/// `variance_threshold`, clamped to `[1, ⌊D/2⌋]`.
///
/// Domains whose variance cannot be computed (fewer than two samples)
/// contribute nothing, so the result is always a usable dimension.
pub fn select_dimension(
    features_src: &DMatrix<f64>,
    features_tgt: &DMatrix<f64>,
    variance_threshold: f64,
) -> usize {
    let cap = (features_src.ncols().min(features_tgt.ncols()) / 2).max(1);
    let needed = [features_src, features_tgt]
        .into_iter()
        .filter_map(|f| explained_variance_ratios(f).ok())
        .map(|r| dimension_for(&r, variance_threshold))
        .max()
        .unwrap_or(1);
    needed.clamp(1, cap)
}

fn orthogonalize_against(v: &mut DVector<f64>, columns: &[DVector<f64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for c in columns {
            let proj = c.dot(v);
            v.axpy(-proj, c, 1.0);
        }
    }
}

/// `Q = [S R]` with `R` an orthonormal basis of the orthogonal complement of
/// `span(S)`.
pub fn orthogonal_completion(basis: &SubspaceBasis) -> DMatrix<f64> {
    let s = basis.basis();
    let (big_d, d) = s.shape();
    let complement_projector = DMatrix::<f64>::identity(big_d, big_d) - basis.projector();
    let eig = SymmetricEigen::new(complement_projector);
    let mut order: Vec<usize> = (0..big_d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut columns: Vec<DVector<f64>> = s.column_iter().map(|c| c.into_owned()).collect();
    let candidates = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .chain((0..big_d).map(|k| DVector::from_fn(big_d, |r, _| if r == k { 1.0 } else { 0.0 })));
    for mut v in candidates {
        if columns.len() == big_d {
            break;
        }
        orthogonalize_against(&mut v, &columns);
        let norm = v.norm();
        if norm > 0.5 {
            columns.push(v / norm);
        }
    }
    debug_assert_eq!(columns.len(), big_d);
    let mut q = DMatrix::zeros(big_d, big_d);
    for (k, c) in columns.iter().enumerate() {
        q.set_column(k, c);
    }
    // keep the leading block bit-identical to the input basis
    q.columns_mut(0, d).copy_from(s);
    q
}

/// Factorization `(Q, V₁, Ṽ₂, V, θ)` relating a source and target subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowDecomposition {
    /// `D×D` orthogonal completion `[S₁ R₁]` of the source basis.
    pub completion: DMatrix<f64>,
    /// `d×d` orthogonal `V₁`.
    pub rot_top: DMatrix<f64>,
    /// `(D−d)×d` column-orthonormal `Ṽ₂`.
    pub rot_bottom: DMatrix<f64>,
    /// `d×d` orthogonal `V`.
    pub rot_right: DMatrix<f64>,
    /// Ascending, each in `[0, π/2]`.
    pub principal_angles: DVector<f64>,
}

impl FlowDecomposition {
    pub fn ambient_dim(&self) -> usize {
        self.completion.nrows()
    }

    pub fn subspace_dim(&self) -> usize {
        self.principal_angles.len()
    }

    /// `S₁` (leading columns of the completion).
    pub fn source_basis(&self) -> DMatrix<f64> {
        self.completion.columns(0, self.subspace_dim()).into_owned()
    }

    /// `R₁` (trailing columns of the completion).
    pub fn complement(&self) -> DMatrix<f64> {
        let d = self.subspace_dim();
        self.completion
            .columns(d, self.ambient_dim() - d)
            .into_owned()
    }
}

/// Principal-angle factorization of `tgt` relative to `src`, using a fresh
/// orthogonal completion of `src`.
pub fn principal_decomposition(
    src: &SubspaceBasis,
    tgt: &SubspaceBasis,
) -> Result<FlowDecomposition> {
    check_pair(src, tgt)?;
    let q = orthogonal_completion(src);
    decompose_with_completion(q, tgt)
}

fn check_pair(src: &SubspaceBasis, tgt: &SubspaceBasis) -> Result<()> {
    if src.ambient_dim() != tgt.ambient_dim() || src.subspace_dim() != tgt.subspace_dim() {
        return Err(domain(format!(
            "source is {}x{} but target is {}x{}",
            src.ambient_dim(),
            src.subspace_dim(),
            tgt.ambient_dim(),
            tgt.subspace_dim()
        )));
    }
    Ok(())
}

/// Same as [`principal_decomposition`] with a caller-supplied completion
/// `Q`, whose leading `d` columns must span the source subspace.
pub fn decompose_with_completion(
    completion: DMatrix<f64>,
    tgt: &SubspaceBasis,
) -> Result<FlowDecomposition> {
    let big_d = tgt.ambient_dim();
    let d = tgt.subspace_dim();
    if completion.shape() != (big_d, big_d) {
        return Err(dimension(format!(
            "completion is {}x{}, expected {big_d}x{big_d}",
            completion.nrows(),
            completion.ncols()
        )));
    }
    let s1 = completion.columns(0, d);
    let r1 = completion.columns(d, big_d - d);
    let s2 = tgt.basis();

    let cross = s1.transpose() * s2;
    let svd = SVD::new(cross, true, true);
    let u = svd
        .u
        .ok_or_else(|| Error::Numeric("SVD did not return U".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numeric("SVD did not return V".into()))?;
    let v = v_t.transpose();

    let b = r1.transpose() * s2 * &v;
    let mut angles: Vec<(f64, usize)> = (0..d)
        .map(|i| {
            let c = svd.singular_values[i].clamp(0.0, 1.0);
            let s = b.column(i).norm().clamp(0.0, 1.0);
            (s.atan2(c), i)
        })
        .collect();
    angles.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut rot_top = DMatrix::zeros(d, d);
    let mut rot_right = DMatrix::zeros(d, d);
    let mut sorted_b = DMatrix::zeros(big_d - d, d);
    for (k, &(_, i)) in angles.iter().enumerate() {
        rot_top.set_column(k, &u.column(i));
        rot_right.set_column(k, &v.column(i));
        sorted_b.set_column(k, &b.column(i));
    }

    // Ṽ₂ e_i = -B e_i / sin θᵢ; tiny angles are completed by orthonormalization.
    let mut built: Vec<Option<DVector<f64>>> = vec![None; d];
    let mut done: Vec<DVector<f64>> = Vec::with_capacity(d);
    for (k, slot) in built.iter_mut().enumerate() {
        let col = sorted_b.column(k);
        let s = col.norm();
        if s >= SMALL_SINE {
            let v = -col / s;
            done.push(v.clone());
            *slot = Some(v);
        }
    }
    let m = big_d - d;
    for (k, slot) in built.iter_mut().enumerate() {
        if slot.is_some() {
            continue;
        }
        let col = sorted_b.column(k);
        let s = col.norm();
        let first = if s > 0.0 { Some(-col / s) } else { None };
        let canonical = (0..m).map(|r| DVector::from_fn(m, |i, _| if i == r { 1.0 } else { 0.0 }));
        let mut chosen = None;
        for mut candidate in first.into_iter().chain(canonical) {
            orthogonalize_against(&mut candidate, &done);
            let norm = candidate.norm();
            if norm > 0.5 {
                chosen = Some(candidate / norm);
                break;
            }
        }
        let v =
            chosen.ok_or_else(|| Error::Numeric("could not complete bottom rotation".into()))?;
        done.push(v.clone());
        *slot = Some(v);
    }
    let mut rot_bottom = DMatrix::zeros(m, d);
    for (k, v) in built.into_iter().enumerate() {
        rot_bottom.set_column(k, &v.expect("every column built"));
    }

    Ok(FlowDecomposition {
        completion,
        rot_top,
        rot_bottom,
        rot_right,
        principal_angles: DVector::from_iterator(d, angles.iter().map(|a| a.0)),
    })
}
