//! Binary soft-margin SVM trained from a precomputed Gram matrix.
//!
//! The dual problem
//!
//! ```text
//! min ½ αᵀQα − eᵀα   s.t. 0 ≤ αᵢ ≤ C,  yᵀα = 0,   Q_ij = yᵢyⱼK_ij
//! ```
//!
//! is solved by sequential minimal optimization with maximal-violating-pair
//! working-set selection. Labels are ±1 with healthy = +1.

use nalgebra::DMatrix;

use crate::error::{dimension, domain, Error, Result};

pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_TOLERANCE: f64 = 1e-5;
pub const DEFAULT_MAX_ITER: usize = 100_000;

const TAU: f64 = 1e-12;

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    /// Stop once the maximal KKT violation drops below this.
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: DEFAULT_C,
            tolerance: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl SvmParams {
    pub fn with_c(c: f64) -> Self {
        Self {
            c,
            ..Self::default()
        }
    }
}

/// A trained classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    /// `αᵢyᵢ` for every training sample.
    pub dual_coefficients: Vec<f64>,
    pub bias: f64,
    /// Training samples with `αᵢ > 0`.
    pub support_indices: Vec<usize>,
    pub regularization: f64,
    pub iterations: usize,
    /// Maximal KKT violation at exit.
    pub kkt_violation: f64,
    pub converged: bool,
}

impl SvmModel {
    pub fn n_train(&self) -> usize {
        self.dual_coefficients.len()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.dual_coefficients.iter().map(|c| c.abs()).collect()
    }

    /// `Σⱼ αⱼyⱼ K(i, j) + b` for every row of `cross_gram` (`m × n_train`).
    pub fn decision_function(&self, cross_gram: &DMatrix<f64>) -> Result<Vec<f64>> {
        if cross_gram.ncols() != self.n_train() {
            return Err(dimension(format!(
                "cross gram has {} columns, model was trained on {} samples",
                cross_gram.ncols(),
                self.n_train()
            )));
        }
        Ok(cross_gram
            .row_iter()
            .map(|row| {
                self.support_indices
                    .iter()
                    .map(|&j| self.dual_coefficients[j] * row[j])
                    .sum::<f64>()
                    + self.bias
            })
            .collect())
    }
}

fn validate_problem(gram: &DMatrix<f64>, labels: &[f64], c: f64) -> Result<()> {
    let n = labels.len();
    if gram.shape() != (n, n) {
        return Err(dimension(format!(
            "gram is {}x{} but there are {n} labels",
            gram.nrows(),
            gram.ncols()
        )));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(domain(format!("C must be positive, got {c}")));
    }
    if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(domain("labels must be +1 or -1"));
    }
    if !labels.contains(&1.0) || !labels.contains(&-1.0) {
        return Err(Error::DegenerateTraining(
            "labels contain a single class".into(),
        ));
    }
    let scale = gram.amax();
    if !scale.is_finite() {
        return Err(Error::Numeric("gram contains non-finite entries".into()));
    }
    for i in 0..n {
        if gram[(i, i)] < -1e-12 * scale {
            return Err(Error::Numeric(format!(
                "gram has negative diagonal entry at {i}"
            )));
        }
        for j in (i + 1)..n {
            if (gram[(i, j)] - gram[(j, i)]).abs() > 1e-10 * scale.max(1.0) {
                return Err(Error::Numeric(format!(
                    "gram is not symmetric at ({i},{j})"
                )));
            }
        }
    }
    Ok(())
}

/// Trains with the given regularization and default tolerances.
pub fn train(gram: &DMatrix<f64>, labels: &[f64], c: f64) -> Result<SvmModel> {
    train_with(gram, labels, &SvmParams::with_c(c))
}

pub fn train_with(gram: &DMatrix<f64>, labels: &[f64], params: &SvmParams) -> Result<SvmModel> {
    let c = params.c;
    validate_problem(gram, labels, c)?;
    let n = labels.len();
    let y = labels;
    let q = |i: usize, j: usize| y[i] * y[j] * gram[(i, j)];
    let scale = gram.amax().max(f64::MIN_POSITIVE);

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let mut violation;
    loop {
        let (i, j, gap) = select_pair(&alpha, &grad, y, c);
        violation = gap;
        if gap < params.tolerance || iterations >= params.max_iter {
            break;
        }
        let (i, j) = match (i, j) {
            (Some(i), Some(j)) => (i, j),
            _ => break,
        };
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if quad < -1e-9 * scale {
                return Err(Error::Numeric("gram is not positive semidefinite".into()));
            }
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if quad < -1e-9 * scale {
                return Err(Error::Numeric("gram is not positive semidefinite".into()));
            }
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
    }

    let converged = violation < params.tolerance;
    if !converged {
        log::warn!(
            "SMO stopped after {iterations} iterations with KKT violation {violation:e} (tolerance {:e})",
            params.tolerance
        );
    }

    let bias = -compute_rho(&alpha, &grad, y, c);
    let support_indices = (0..n).filter(|&i| alpha[i] > 0.0).collect();
    Ok(SvmModel {
        dual_coefficients: alpha.iter().zip(y).map(|(a, y)| a * y).collect(),
        bias,
        support_indices,
        regularization: c,
        iterations,
        kkt_violation: violation,
        converged,
    })
}

fn in_up(a: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && a < c) || (y < 0.0 && a > 0.0)
}

fn in_low(a: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && a > 0.0) || (y < 0.0 && a < c)
}

/// Maximal violating pair and the KKT gap `m(α) − M(α)`.
fn select_pair(
    alpha: &[f64],
    grad: &[f64],
    y: &[f64],
    c: f64,
) -> (Option<usize>, Option<usize>, f64) {
    let mut best_up = (None, f64::NEG_INFINITY);
    let mut best_low = (None, f64::INFINITY);
    for t in 0..alpha.len() {
        let v = -y[t] * grad[t];
        if in_up(alpha[t], y[t], c) && v > best_up.1 {
            best_up = (Some(t), v);
        }
        if in_low(alpha[t], y[t], c) && v < best_low.1 {
            best_low = (Some(t), v);
        }
    }
    let gap = if best_up.0.is_some() && best_low.0.is_some() {
        best_up.1 - best_low.1
    } else {
        0.0
    };
    (best_up.0, best_low.0, gap)
}

fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    }
}

/// Dual objective `½ αᵀQα − eᵀα` of a coefficient vector.
pub fn dual_objective(gram: &DMatrix<f64>, labels: &[f64], alphas: &[f64]) -> f64 {
    let n = labels.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alphas[i] * alphas[j] * labels[i] * labels[j] * gram[(i, j)];
        }
    }
    0.5 * quad - alphas.iter().sum::<f64>()
}

/// Maximal KKT violation of `model` on its training problem.
pub fn kkt_violation(gram: &DMatrix<f64>, labels: &[f64], model: &SvmModel) -> f64 {
    let alphas = model.alphas();
    let grad: Vec<f64> = (0..labels.len())
        .map(|i| {
            (0..labels.len())
                .map(|j| labels[i] * labels[j] * gram[(i, j)] * alphas[j])
                .sum::<f64>()
                - 1.0
        })
        .collect();
    select_pair(&alphas, &grad, labels, model.regularization).2
}

/// Class signs (+1 healthy, −1 damaged); an exact zero decision maps to +1.
pub fn predict(model: &SvmModel, cross_gram: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(model
        .decision_function(cross_gram)?
        .into_iter()
        .map(|v| if v >= 0.0 { 1.0 } else { -1.0 })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_gram(x: &[[f64; 2]]) -> DMatrix<f64> {
        DMatrix::from_fn(x.len(), x.len(), |i, j| {
            x[i][0] * x[j][0] + x[i][1] * x[j][1]
        })
    }

    #[test]
    fn two_points_symmetric_boundary() {
        let gram = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let model = train(&gram, &[1.0, -1.0], 10.0).unwrap();
        assert!(model.bias.abs() < 1e-12);
        let pred = predict(&model, &gram).unwrap();
        assert_eq!(pred, vec![1.0, -1.0]);
        // x = 0 sits on the boundary
        let origin = DMatrix::from_row_slice(1, 2, &[0.0, 0.0]);
        assert_eq!(model.decision_function(&origin).unwrap()[0], 0.0);
    }

    #[test]
    fn separable_blobs_are_recalled() {
        let x = [
            [2.0, 2.0],
            [3.0, 2.5],
            [2.5, 3.5],
            [-2.0, -2.0],
            [-3.0, -1.5],
            [-2.5, -3.0],
        ];
        let y = [1.0, 1.0, 1.0, -1.0, -1.0, -1.0];
        let gram = linear_gram(&x);
        let model = train(&gram, &y, 100.0).unwrap();
        assert!(model.converged);
        assert_eq!(predict(&model, &gram).unwrap(), y.to_vec());
        let balance: f64 = model.dual_coefficients.iter().sum();
        assert!(balance.abs() < 1e-10);
    }

    #[test]
    fn bias_only_row() {
        let x = [[1.0, 0.0], [-1.0, 0.0], [2.0, 0.0]];
        let model = train(&linear_gram(&x), &[1.0, -1.0, 1.0], 1.0).unwrap();
        let zero = DMatrix::zeros(1, 3);
        let expected = if model.bias >= 0.0 { 1.0 } else { -1.0 };
        assert_eq!(predict(&model, &zero).unwrap(), vec![expected]);
    }

    #[test]
    fn degenerate_inputs() {
        let gram = DMatrix::identity(2, 2);
        assert!(matches!(
            train(&gram, &[1.0, 1.0], 1.0),
            Err(Error::DegenerateTraining(_))
        ));
        assert!(matches!(
            train(&gram, &[1.0, 0.5], 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            train(&gram, &[1.0, -1.0], 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            train(&gram, &[1.0, -1.0, 1.0], 1.0),
            Err(Error::Dimension(_))
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.0, 1.0]);
        assert!(matches!(
            train(&asym, &[1.0, -1.0], 1.0),
            Err(Error::Numeric(_))
        ));
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 3.0, 1.0]);
        assert!(matches!(
            train(&indefinite, &[1.0, -1.0], 1.0),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn wrong_cross_gram_width() {
        let gram = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let model = train(&gram, &[1.0, -1.0], 1.0).unwrap();
        assert!(predict(&model, &DMatrix::zeros(1, 3)).is_err());
    }
}
