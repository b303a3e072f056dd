use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{dimension, domain, Error, Result};

/// Eigenvalues below this fraction of the largest one are rigid-body modes
/// and are reported as 0 Hz.
pub const RIGID_BODY_CUTOFF: f64 = 1e-12;

const SYMMETRY_TOL: f64 = 1e-12;

/// The `n_modes` lowest natural frequencies (Hz) of `K v = λ M v`, sorted
/// ascending.
///
/// Reduces to a standard symmetric problem through the Cholesky factor of
/// the mass matrix.
pub fn natural_frequencies(
    mass: &DMatrix<f64>,
    stiffness: &DMatrix<f64>,
    n_modes: usize,
) -> Result<Vec<f64>> {
    let n = mass.nrows();
    if mass.ncols() != n || stiffness.nrows() != n || stiffness.ncols() != n {
        return Err(dimension(format!(
            "mass {}x{} and stiffness {}x{} must be square and equal",
            mass.nrows(),
            mass.ncols(),
            stiffness.nrows(),
            stiffness.ncols()
        )));
    }
    if n_modes > n {
        return Err(domain(format!(
            "requested {n_modes} modes from a {n}-DOF model"
        )));
    }
    check_symmetric("mass", mass)?;
    check_symmetric("stiffness", stiffness)?;

    let chol = mass.clone().cholesky().ok_or_else(|| {
        Error::Numeric("mass matrix is not positive definite (Cholesky failed)".into())
    })?;
    let l = chol.l();
    // C = L⁻¹ K L⁻ᵀ
    let half = l
        .solve_lower_triangular(stiffness)
        .ok_or_else(|| Error::Numeric("singular Cholesky factor".into()))?;
    let reduced = l
        .solve_lower_triangular(&half.transpose())
        .ok_or_else(|| Error::Numeric("singular Cholesky factor".into()))?;
    let reduced = (&reduced + reduced.transpose()) * 0.5;

    let mut eig: Vec<f64> = SymmetricEigen::new(reduced)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    if eig.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite eigenvalue".into()));
    }
    eig.sort_by(f64::total_cmp);
    let largest = eig.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let cutoff = RIGID_BODY_CUTOFF * largest;
    Ok(eig
        .into_iter()
        .take(n_modes)
        .map(|lambda| {
            if lambda < cutoff {
                0.0
            } else {
                lambda.sqrt() / (2.0 * PI)
            }
        })
        .collect())
}

fn check_symmetric(name: &str, m: &DMatrix<f64>) -> Result<()> {
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = (m[(i, j)] - m[(j, i)]).abs();
            if diff > SYMMETRY_TOL * scale || diff.is_nan() {
                return Err(Error::Numeric(format!(
                    "{name} matrix is not symmetric: entries ({i},{j}) and ({j},{i}) differ by {diff:e}"
                )));
            }
        }
    }
    Ok(())
}
