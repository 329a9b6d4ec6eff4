//! Soft-margin SVM over a precomputed kernel.
//!
//! The dual
//!
//! ```text
//! min_a  1/2 a' Q a - 1' a,   Q_ij = y_i y_j K_ij,   0 <= a_i <= C,   y' a = 0
//! ```
//!
//! is solved by two-variable decomposition with second-order working-set
//! selection. The decision function is `f(x) = sum_i a_i y_i k(x, x_i) + b`.

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::GramMatrix;

/// Default stopping tolerance on the maximal KKT violation.
pub const DEFAULT_TOL: f64 = 1e-3;
const TAU: f64 = 1e-12;
const MIN_ITERATION_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvcModel {
    /// `alpha_i * y_i` for every training sample.
    pub dual_coefs: Array1<f64>,
    pub alpha: Array1<f64>,
    pub bias: f64,
    /// Indices with `alpha_i > 0`.
    pub support_indices: Vec<usize>,
    pub c: f64,
    pub tol: f64,
    pub iterations: usize,
    /// Maximal KKT violation `m(a) - M(a)` at exit.
    pub kkt_gap: f64,
    /// The training kernel failed the numerical PSD check.
    pub psd_warning: bool,
}

/// Fits the classifier on a square training kernel.
pub fn fit_svc(k: &GramMatrix, labels: ArrayView1<'_, f64>, c: f64, tol: f64) -> Result<SvcModel> {
    let (m, cols) = k.shape();
    if m != cols {
        return Err(Error::Data("training kernel must be square".into()));
    }
    if labels.len() != m {
        return Err(Error::Data(format!("{} labels for a {m}x{m} kernel", labels.len())));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Parameter(format!("C must be positive, got {c}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(Error::Data("labels must be -1 or +1".into()));
    }
    if labels.iter().all(|&y| y == labels[0]) {
        return Err(Error::DegenerateTarget);
    }
    let psd_warning = !k.is_psd();
    let kk = k.entries();
    let y = labels;

    let mut alpha = Array1::<f64>::zeros(m);
    let mut grad = Array1::<f64>::from_elem(m, -1.0);
    let max_iter = 100usize.saturating_mul(m).saturating_mul(m).max(MIN_ITERATION_CAP);
    let mut iterations = 0;

    let gap = loop {
        let Some((i, j)) = select_pair(kk, y, &alpha, &grad, c, tol) else {
            break violation(y, &alpha, &grad, c);
        };
        if iterations >= max_iter {
            return Err(Error::NonConvergence { iterations });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let q_ij = y[i] * y[j] * kk[[i, j]];
        if y[i] != y[j] {
            let quad = positive(kk[[i, i]] + kk[[j, j]] + 2.0 * q_ij);
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
            let quad = positive(kk[[i, i]] + kk[[j, j]] - 2.0 * q_ij);
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
        for t in 0..m {
            grad[t] += y[t] * (y[i] * kk[[t, i]] * di + y[j] * kk[[t, j]] * dj);
        }
    };

    let bias = -threshold(y, &alpha, &grad, c);
    let dual_coefs = &alpha * &y;
    let support_indices = alpha
        .iter()
        .enumerate()
        .filter_map(|(i, &a)| (a > 0.0).then_some(i))
        .collect();
    Ok(SvcModel {
        dual_coefs,
        alpha,
        bias,
        support_indices,
        c,
        tol,
        iterations,
        kkt_gap: gap,
        psd_warning,
    })
}

fn positive(q: f64) -> f64 {
    if q > 0.0 {
        q
    } else {
        TAU
    }
}

#[inline]
fn in_up(y: f64, a: f64, c: f64) -> bool {
    (y > 0.0 && a < c) || (y < 0.0 && a > 0.0)
}

#[inline]
fn in_low(y: f64, a: f64, c: f64) -> bool {
    (y > 0.0 && a > 0.0) || (y < 0.0 && a < c)
}

/// `m(a) - M(a)` with `m = max_{I_up} -y G`, `M = min_{I_low} -y G`.
fn violation(y: ArrayView1<'_, f64>, alpha: &Array1<f64>, grad: &Array1<f64>, c: f64) -> f64 {
    let mut up = f64::NEG_INFINITY;
    let mut low = f64::INFINITY;
    for t in 0..y.len() {
        let v = -y[t] * grad[t];
        if in_up(y[t], alpha[t], c) {
            up = up.max(v);
        }
        if in_low(y[t], alpha[t], c) {
            low = low.min(v);
        }
    }
    if up == f64::NEG_INFINITY || low == f64::INFINITY {
        0.0
    } else {
        (up - low).max(0.0)
    }
}

/// Second-order working-set selection; `None` once the violation is below `tol`.
fn select_pair(
    k: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    alpha: &Array1<f64>,
    grad: &Array1<f64>,
    c: f64,
    tol: f64,
) -> Option<(usize, usize)> {
    let m = y.len();
    let mut i = usize::MAX;
    let mut g_max = f64::NEG_INFINITY;
    for t in 0..m {
        if in_up(y[t], alpha[t], c) {
            let v = -y[t] * grad[t];
            if v > g_max {
                g_max = v;
                i = t;
            }
        }
    }
    if i == usize::MAX {
        return None;
    }
    let mut j = usize::MAX;
    let mut low_min = f64::INFINITY;
    let mut best_obj = f64::INFINITY;
    for t in 0..m {
        if !in_low(y[t], alpha[t], c) {
            continue;
        }
        let v = -y[t] * grad[t];
        low_min = low_min.min(v);
        let b = g_max - v;
        if b > 0.0 {
            let a = positive(k[[i, i]] + k[[t, t]] - 2.0 * k[[i, t]]);
            let obj = -(b * b) / a;
            if obj < best_obj {
                best_obj = obj;
                j = t;
            }
        }
    }
    if g_max - low_min < tol || j == usize::MAX {
        None
    } else {
        Some((i, j))
    }
}

/// Average of `y_i G_i` over free vectors, or the midpoint of the feasible
/// interval when every multiplier sits at a bound.
fn threshold(y: ArrayView1<'_, f64>, alpha: &Array1<f64>, grad: &Array1<f64>, c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut n_free = 0usize;
    for t in 0..y.len() {
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
        0.5 * (ub + lb)
    }
}

/// Continuous scores `K_cross * (alpha ∘ y) + b` for each row of a cross kernel.
pub fn decision_values(model: &SvcModel, k_cross: &GramMatrix) -> Result<Array1<f64>> {
    if k_cross.ncols() != model.dual_coefs.len() {
        return Err(Error::Data(format!(
            "cross kernel has {} columns, model has {} training samples",
            k_cross.ncols(),
            model.dual_coefs.len()
        )));
    }
    Ok(k_cross.entries().dot(&model.dual_coefs) + model.bias)
}

impl SvcModel {
    /// Primal weight vector `w = sum_i alpha_i y_i x_i` when the kernel was linear in `x`.
    pub fn linear_weights(&self, x_train: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        if x_train.nrows() != self.dual_coefs.len() {
            return Err(Error::Data("training rows do not match the model".into()));
        }
        Ok(x_train.t().dot(&self.dual_coefs))
    }
}

/// Recomputes the maximal KKT violation of `model` on its training kernel
/// from scratch.
pub fn kkt_violation(model: &SvcModel, k: &GramMatrix, labels: ArrayView1<'_, f64>) -> Result<f64> {
    if k.shape() != (model.alpha.len(), model.alpha.len()) || labels.len() != model.alpha.len() {
        return Err(Error::Data("kernel or labels do not match the model".into()));
    }
    let f = k.entries().dot(&model.dual_coefs);
    let grad = Array1::from_iter((0..labels.len()).map(|t| labels[t] * f[t] - 1.0));
    Ok(violation(labels, &model.alpha, &grad, model.c))
}

/// `sum_i max(0, 1 - y_i f(x_i))` over the training set.
pub fn training_hinge_loss(model: &SvcModel, k: &GramMatrix, labels: ArrayView1<'_, f64>) -> Result<f64> {
    let f = decision_values(model, k)?;
    Ok(f.iter()
        .zip(labels.iter())
        .map(|(f, y)| (1.0 - y * f).max(0.0))
        .sum())
}
