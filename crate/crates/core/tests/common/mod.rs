#![allow(dead_code)]

use gfk_core::subspace::SubspaceBasis;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Orthonormal `rows×cols` matrix from modified Gram-Schmidt on Gaussian
/// columns. Deliberately avoids the library's own orthonormalization.
pub fn random_orthonormal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut m = gaussian(rows, cols, rng);
    for j in 0..cols {
        for _ in 0..2 {
            for i in 0..j {
                let proj = m.column(i).dot(&m.column(j));
                let ci = m.column(i).into_owned();
                m.column_mut(j).axpy(-proj, &ci, 1.0);
            }
        }
        let norm = m.column(j).norm();
        m.column_mut(j).scale_mut(1.0 / norm);
    }
    m
}

pub fn random_basis(big_d: usize, d: usize, rng: &mut ChaCha8Rng) -> SubspaceBasis {
    SubspaceBasis::new(random_orthonormal(big_d, d, rng)).unwrap()
}

/// Symmetric positive definite matrix with eigenvalues in `[lo, hi]`.
pub fn random_spd(n: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let q = random_orthonormal(n, n, rng);
    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
        rng.random_range(lo..hi)
    }));
    let m = &q * diag * q.transpose();
    (&m + m.transpose()) * 0.5
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
pub fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        let scale: f64 = m.iter().map(|v| v * v).sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let tau = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Generalized eigenvalues of `K v = λ M v` via the inverse square root of
/// `M` built from Jacobi eigenpairs (no Cholesky).
pub fn generalized_eigenvalues_oracle(mass: &DMatrix<f64>, stiffness: &DMatrix<f64>) -> Vec<f64> {
    let eig = nalgebra::SymmetricEigen::new(mass.clone());
    let inv_sqrt = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()))
        * eig.eigenvectors.transpose();
    let c = &inv_sqrt * stiffness * &inv_sqrt;
    jacobi_eigenvalues(&((&c + c.transpose()) * 0.5))
}

/// Box-constrained dual QP `max Σα − ½ αᵀQα, 0 ≤ α ≤ C, yᵀα = 0` solved by
/// projected gradient with an exact projection onto the feasible set
/// (bisection on the equality multiplier). Returns the objective value.
pub fn qp_oracle(gram: &DMatrix<f64>, y: &[f64], c: f64, iters: usize) -> (f64, Vec<f64>) {
    let n = y.len();
    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * gram[(i, j)]);
    let lipschitz = jacobi_eigenvalues(&q)
        .last()
        .copied()
        .unwrap_or(1.0)
        .max(1e-12);
    let step = 1.0 / lipschitz;
    let project = |v: &[f64]| -> Vec<f64> {
        let at = |mu: f64| -> (f64, Vec<f64>) {
            let a: Vec<f64> = v
                .iter()
                .zip(y)
                .map(|(vi, yi)| (vi - mu * yi).clamp(0.0, c))
                .collect();
            let s = a.iter().zip(y).map(|(ai, yi)| ai * yi).sum();
            (s, a)
        };
        let (mut lo, mut hi) = (-1e6, 1e6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if at(mid).0 > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(0.5 * (lo + hi)).1
    };
    let objective = |a: &[f64]| -> f64 {
        let av = nalgebra::DVector::from_column_slice(a);
        a.iter().sum::<f64>() - 0.5 * (av.transpose() * &q * &av)[(0, 0)]
    };
    // accelerated projected gradient (FISTA)
    let mut x = vec![0.0; n];
    let mut z = x.clone();
    let mut t = 1.0_f64;
    for _ in 0..iters {
        let zv = nalgebra::DVector::from_column_slice(&z);
        let grad = nalgebra::DVector::from_element(n, 1.0) - &q * zv;
        let stepped: Vec<f64> = z
            .iter()
            .zip(grad.iter())
            .map(|(zi, gi)| zi + step * gi)
            .collect();
        let x_new = project(&stepped);
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = x_new
            .iter()
            .zip(&x)
            .map(|(xn, xo)| xn + (t - 1.0) / t_new * (xn - xo))
            .collect();
        x = x_new;
        t = t_new;
    }
    (objective(&x), x)
}
