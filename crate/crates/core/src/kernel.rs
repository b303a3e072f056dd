//! Geodesic flow between two subspaces and the geodesic flow kernel.
//!
//! Along the flow
//!
//! ```text
//! Φ(t) = S₁V₁ diag(cos tθ) − R₁Ṽ₂ diag(sin tθ)
//! ```
//!
//! and the kernel matrix is `G = 2∫₀¹ Φ(t)Φ(t)ᵀ dt`, so that
//! `xᵢᵀ G xⱼ` is (twice) the inner product of the projections of `xᵢ` and
//! `xⱼ` onto every subspace of the flow. In closed form, with `A = S₁V₁` and
//! `B = R₁Ṽ₂`,
//!
//! ```text
//! G = A Λ₁ Aᵀ + A Λ₂ Bᵀ + B Λ₂ Aᵀ + B Λ₃ Bᵀ
//! λ₁ = 1 + sin 2θ / 2θ,  λ₂ = (cos 2θ − 1) / 2θ,  λ₃ = 1 − sin 2θ / 2θ
//! ```

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{dimension, domain, Error, Result};
use crate::subspace::FlowDecomposition;

/// Below this angle the λ's are evaluated by their Taylor series.
pub const SMALL_ANGLE: f64 = 1e-4;

/// Negative eigenvalues down to this fraction of the largest are treated as
/// round-off and clamped.
pub const PSD_REPAIR_TOL: f64 = 1e-9;

const SYMMETRY_TOL: f64 = 1e-10;

/// Symmetric positive semidefinite `D×D` kernel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GfkMatrix {
    matrix: DMatrix<f64>,
}

impl GfkMatrix {
    /// Validates symmetry and semidefiniteness; negative eigenvalues within
    /// the repair tolerance are clamped to zero.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c {
            return Err(dimension(format!(
                "kernel matrix must be square, got {r}x{c}"
            )));
        }
        let scale = matrix.amax().max(1.0);
        let asym = (&matrix - matrix.transpose()).amax();
        if asym.is_nan() || asym > SYMMETRY_TOL * scale {
            return Err(Error::Numeric(format!(
                "kernel matrix is not symmetric ({asym:e})"
            )));
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        if min >= 0.0 {
            return Ok(Self { matrix: sym });
        }
        if min < -PSD_REPAIR_TOL * max.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::Numeric(format!(
                "kernel matrix is indefinite: eigenvalues span [{min:e}, {max:e}]"
            )));
        }
        let clamped = eig.eigenvalues.map(|v| v.max(0.0));
        let repaired =
            &eig.eigenvectors * DMatrix::from_diagonal(&clamped) * eig.eigenvectors.transpose();
        Ok(Self {
            matrix: (&repaired + repaired.transpose()) * 0.5,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Comma-separated rows, full precision, no header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.matrix.row_iter() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// `(λ₁, λ₂, λ₃)` for one principal angle.
pub fn lambda_triple(theta: f64) -> (f64, f64, f64) {
    let x = 2.0 * theta;
    if theta.abs() < SMALL_ANGLE {
        let x2 = x * x;
        let sinc = 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
        (1.0 + sinc, -x / 2.0 + x * x2 / 24.0, 1.0 - sinc)
    } else {
        let sinc = x.sin() / x;
        (1.0 + sinc, (x.cos() - 1.0) / x, 1.0 - sinc)
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(domain(format!(
            "flow parameter must lie in [0, 1], got {t}"
        )));
    }
    Ok(())
}

/// `D×d` orthonormal basis of the subspace at position `t` of the flow.
pub fn flow_point(decomp: &FlowDecomposition, t: f64) -> Result<DMatrix<f64>> {
    check_t(t)?;
    Ok(flow_point_unchecked(decomp, t))
}

fn flow_point_unchecked(decomp: &FlowDecomposition, t: f64) -> DMatrix<f64> {
    let d = decomp.subspace_dim();
    let cos = DVector::from_iterator(d, decomp.principal_angles.iter().map(|a| (t * a).cos()));
    let sin = DVector::from_iterator(d, decomp.principal_angles.iter().map(|a| (t * a).sin()));
    let top = &decomp.rot_top * DMatrix::from_diagonal(&cos);
    let bottom = -(&decomp.rot_bottom * DMatrix::from_diagonal(&sin));
    let mut stacked = DMatrix::zeros(decomp.ambient_dim(), d);
    stacked.rows_mut(0, d).copy_from(&top);
    stacked
        .rows_mut(d, decomp.ambient_dim() - d)
        .copy_from(&bottom);
    &decomp.completion * stacked
}

/// Closed-form geodesic flow kernel.
pub fn gfk_matrix(decomp: &FlowDecomposition) -> Result<GfkMatrix> {
    let d = decomp.subspace_dim();
    let big_d = decomp.ambient_dim();
    let a = decomp.completion.columns(0, d) * &decomp.rot_top;
    let b = decomp.completion.columns(d, big_d - d) * &decomp.rot_bottom;
    let (mut l1, mut l2, mut l3) = (DVector::zeros(d), DVector::zeros(d), DVector::zeros(d));
    for (i, &theta) in decomp.principal_angles.iter().enumerate() {
        let (x, y, z) = lambda_triple(theta);
        l1[i] = x;
        l2[i] = y;
        l3[i] = z;
    }
    let scale_cols = |m: &DMatrix<f64>, s: &DVector<f64>| {
        let mut out = m.clone();
        for (mut col, v) in out.column_iter_mut().zip(s.iter()) {
            col *= *v;
        }
        out
    };
    let a_t = a.transpose();
    let b_t = b.transpose();
    let cross = scale_cols(&a, &l2) * &b_t;
    let g = scale_cols(&a, &l1) * &a_t + &cross + cross.transpose() + scale_cols(&b, &l3) * &b_t;
    GfkMatrix::new(g)
}

/// Trapezoid-rule evaluation of `2∫₀¹ Φ(t)Φ(t)ᵀ dt` over `n_steps`
/// intervals. Independent of the closed form; used to cross-check it.
pub fn quadrature_oracle(decomp: &FlowDecomposition, n_steps: usize) -> Result<GfkMatrix> {
    if n_steps < 2 {
        return Err(domain(format!(
            "quadrature needs at least 2 steps, got {n_steps}"
        )));
    }
    let big_d = decomp.ambient_dim();
    let h = 1.0 / n_steps as f64;
    let mut acc = DMatrix::zeros(big_d, big_d);
    for k in 0..=n_steps {
        let phi = flow_point_unchecked(decomp, k as f64 * h);
        let w = if k == 0 || k == n_steps { 0.5 } else { 1.0 };
        acc.gemm(w, &phi, &phi.transpose(), 1.0);
    }
    GfkMatrix::new(acc * (2.0 * h))
}

/// `rows · G · colsᵀ`: entry `(i, j)` is `xᵢᵀ G xⱼ`.
pub fn gram(g: &GfkMatrix, rows: &DMatrix<f64>, cols: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let big_d = g.dim();
    if rows.ncols() != big_d || cols.ncols() != big_d {
        return Err(dimension(format!(
            "kernel is {big_d}x{big_d} but features have {} and {} columns",
            rows.ncols(),
            cols.ncols()
        )));
    }
    Ok(rows * g.matrix() * cols.transpose())
}

/// Plain inner products `rows · colsᵀ`.
pub fn linear_gram(rows: &DMatrix<f64>, cols: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if rows.ncols() != cols.ncols() {
        return Err(dimension(format!(
            "feature dimensions differ: {} vs {}",
            rows.ncols(),
            cols.ncols()
        )));
    }
    Ok(rows * cols.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspace::{principal_decomposition, SubspaceBasis};
    use std::f64::consts::PI;

    #[test]
    fn right_angle_lambdas() {
        let (a, b, c) = lambda_triple(PI / 2.0);
        assert!((a - 1.0).abs() < 1e-12);
        assert!((b + 2.0 / PI).abs() < 1e-12);
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_angle_limit() {
        assert_eq!(lambda_triple(0.0), (2.0, 0.0, 0.0));
        // series branch agrees with the direct formula just below the switch-over
        let th = SMALL_ANGLE * 0.99;
        let x = 2.0 * th;
        let direct = (1.0 + x.sin() / x, (x.cos() - 1.0) / x, 1.0 - x.sin() / x);
        let series = lambda_triple(th);
        assert!((direct.0 - series.0).abs() < 1e-12);
        assert!((direct.1 - series.1).abs() < 1e-11);
        assert!((direct.2 - series.2).abs() < 1e-12);
    }

    #[test]
    fn identical_subspaces_double_projector() {
        let s = SubspaceBasis::new(DMatrix::identity(6, 2)).unwrap();
        let dec = principal_decomposition(&s, &s).unwrap();
        let g = gfk_matrix(&dec).unwrap();
        assert!((g.matrix() - s.projector() * 2.0).amax() < 1e-10);
        let q = quadrature_oracle(&dec, 3).unwrap();
        assert!((q.matrix() - s.projector() * 2.0).amax() < 1e-10);
    }

    #[test]
    fn flow_rejects_bad_t() {
        let s = SubspaceBasis::new(DMatrix::identity(4, 1)).unwrap();
        let dec = principal_decomposition(&s, &s).unwrap();
        assert!(flow_point(&dec, 1.5).is_err());
        assert!(flow_point(&dec, -0.1).is_err());
        assert!(quadrature_oracle(&dec, 1).is_err());
    }

    #[test]
    fn gram_hand_computation() {
        let g = GfkMatrix::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0])).unwrap();
        let x = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let y = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        assert_eq!(gram(&g, &x, &y).unwrap()[(0, 0)], 1.0);
        let eye = GfkMatrix::new(DMatrix::identity(2, 2)).unwrap();
        assert_eq!(gram(&eye, &x, &y).unwrap(), linear_gram(&x, &y).unwrap());
        assert!(gram(&eye, &DMatrix::zeros(1, 3), &y).is_err());
    }

    #[test]
    fn indefinite_and_asymmetric_rejected() {
        assert!(GfkMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).is_err());
        assert!(GfkMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0])).is_err());
        let tiny = GfkMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-12])).unwrap();
        assert_eq!(tiny.matrix()[(1, 1)], 0.0);
    }

    #[test]
    fn csv_dump_shape() {
        let g = GfkMatrix::new(DMatrix::identity(3, 3)).unwrap();
        let csv = g.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().all(|l| l.split(',').count() == 3));
    }
}
