//! Gram matrices and the alignment algebra built on them.
//!
//! Alignment is the uncentered Frobenius cosine
//! `A(K1, K2) = <K1, K2>_F / sqrt(<K1, K1>_F <K2, K2>_F)`, and the ideal label
//! kernel has entries `1` for same-class pairs and `0` otherwise.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use ndarray::parallel::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative tolerance for the numerical PSD check: `eig_min >= -PSD_TOL * eig_max`.
pub const PSD_TOL: f64 = 1e-8;
/// Absolute tolerance for the symmetry check.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GramKind {
    /// Same sample set on both axes.
    Square,
    /// Rows and columns index different sample sets (e.g. test × train).
    Cross,
}

/// A matrix of pairwise similarities between two sample sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    entries: Array2<f64>,
    row_ids: Vec<usize>,
    col_ids: Vec<usize>,
    kind: GramKind,
}

impl GramMatrix {
    /// Wraps a square matrix; sample ids default to `0..m`.
    pub fn square(entries: Array2<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::Data(format!(
                "square Gram matrix expected, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let ids: Vec<usize> = (0..entries.nrows()).collect();
        Ok(Self {
            row_ids: ids.clone(),
            col_ids: ids,
            entries,
            kind: GramKind::Square,
        })
    }

    pub fn cross(entries: Array2<f64>) -> Self {
        Self {
            row_ids: (0..entries.nrows()).collect(),
            col_ids: (0..entries.ncols()).collect(),
            entries,
            kind: GramKind::Cross,
        }
    }

    /// Attaches caller-side sample identifiers.
    pub fn with_ids(mut self, row_ids: Vec<usize>, col_ids: Vec<usize>) -> Result<Self> {
        if row_ids.len() != self.entries.nrows() || col_ids.len() != self.entries.ncols() {
            return Err(Error::Data("sample id count does not match Gram shape".into()));
        }
        self.row_ids = row_ids;
        self.col_ids = col_ids;
        Ok(self)
    }

    pub fn entries(&self) -> ArrayView2<'_, f64> {
        self.entries.view()
    }

    pub fn into_entries(self) -> Array2<f64> {
        self.entries
    }

    pub fn kind(&self) -> GramKind {
        self.kind
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[usize] {
        &self.col_ids
    }

    pub fn shape(&self) -> (usize, usize) {
        self.entries.dim()
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn is_symmetric(&self) -> bool {
        self.kind == GramKind::Square
            && self
                .entries
                .indexed_iter()
                .all(|((i, j), &v)| (v - self.entries[[j, i]]).abs() <= SYMMETRY_TOL)
    }

    /// Numerical positive semi-definiteness: symmetric and
    /// `eig_min >= -PSD_TOL * max(eig_max, 0)`.
    pub fn is_psd(&self) -> bool {
        if !self.is_symmetric() {
            return false;
        }
        let (lo, hi) = linalg::eigen_extremes(self.entries.view());
        lo >= -PSD_TOL * hi.max(0.0)
    }

    /// `self * a + other * b`, keeping this matrix's ids and kind.
    pub fn linear_combination(&self, a: f64, other: &GramMatrix, b: f64) -> Result<GramMatrix> {
        check_same_shape(self, other)?;
        let mut entries = Array2::zeros(self.entries.dim());
        Zip::from(&mut entries)
            .and(&self.entries)
            .and(&other.entries)
            .for_each(|e, &x, &y| *e = a * x + b * y);
        Ok(GramMatrix {
            entries,
            row_ids: self.row_ids.clone(),
            col_ids: self.col_ids.clone(),
            kind: self.kind,
        })
    }

    pub fn scaled(&self, c: f64) -> GramMatrix {
        GramMatrix {
            entries: &self.entries * c,
            row_ids: self.row_ids.clone(),
            col_ids: self.col_ids.clone(),
            kind: self.kind,
        }
    }
}

fn check_same_shape(a: &GramMatrix, b: &GramMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Data(format!(
            "Gram shapes differ: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Parameter(format!("gamma must be positive and finite, got {gamma}")));
    }
    Ok(())
}

fn check_finite(x: ArrayView2<'_, f64>, what: &str) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data(format!("{what} contains non-finite values")));
    }
    Ok(())
}

#[inline]
pub(crate) fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Square RBF Gram matrix `exp(-gamma * ||x_i - x_j||^2)` over the rows of `x`.
///
/// Rows are filled in parallel; each entry depends only on its own pair of
/// rows, so the result does not depend on the thread count. Only the upper
/// triangle is evaluated and mirrored, so the output is exactly symmetric.
pub fn rbf_gram(x: ArrayView2<'_, f64>, gamma: f64) -> Result<GramMatrix> {
    check_gamma(gamma)?;
    check_finite(x, "input rows")?;
    let m = x.nrows();
    let mut entries = Array2::<f64>::zeros((m, m));
    entries
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            row[i] = 1.0;
            for j in (i + 1)..m {
                row[j] = (-gamma * squared_distance(x.row(i), x.row(j))).exp();
            }
        });
    for i in 0..m {
        for j in 0..i {
            entries[[i, j]] = entries[[j, i]];
        }
    }
    GramMatrix::square(entries)
}

/// Cross RBF kernel between `test` rows and `train` rows.
pub fn rbf_cross(test: ArrayView2<'_, f64>, train: ArrayView2<'_, f64>, gamma: f64) -> Result<GramMatrix> {
    check_gamma(gamma)?;
    if test.ncols() != train.ncols() {
        return Err(Error::Data(format!(
            "feature dimension mismatch: {} vs {}",
            test.ncols(),
            train.ncols()
        )));
    }
    check_finite(test, "test rows")?;
    check_finite(train, "train rows")?;
    let mut entries = Array2::<f64>::zeros((test.nrows(), train.nrows()));
    entries
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            for (j, e) in row.iter_mut().enumerate() {
                *e = (-gamma * squared_distance(test.row(i), train.row(j))).exp();
            }
        });
    Ok(GramMatrix::cross(entries))
}

/// Linear kernel `<x_i, x_j>`; square when `a` and `b` are the same rows.
pub fn linear_cross(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Result<GramMatrix> {
    if a.ncols() != b.ncols() {
        return Err(Error::Data(format!(
            "feature dimension mismatch: {} vs {}",
            a.ncols(),
            b.ncols()
        )));
    }
    Ok(GramMatrix::cross(a.dot(&b.t())))
}

pub fn linear_gram(x: ArrayView2<'_, f64>) -> Result<GramMatrix> {
    let g = x.dot(&x.t());
    // the BLAS-free dot can differ in the last bit across the diagonal
    let sym = Array2::from_shape_fn(g.dim(), |(i, j)| if i <= j { g[[i, j]] } else { g[[j, i]] });
    GramMatrix::square(sym)
}

/// `<K1, K2>_F`, summed sequentially in row-major order.
pub fn frobenius_inner(k1: &GramMatrix, k2: &GramMatrix) -> Result<f64> {
    check_same_shape(k1, k2)?;
    Ok(k1.entries.iter().zip(k2.entries.iter()).map(|(a, b)| a * b).sum())
}

/// Frobenius cosine between two kernels on the same sample set.
pub fn alignment(k1: &GramMatrix, k2: &GramMatrix) -> Result<f64> {
    let cross = frobenius_inner(k1, k2)?;
    let n1 = frobenius_inner(k1, k1)?;
    let n2 = frobenius_inner(k2, k2)?;
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::DegenerateKernel);
    }
    Ok(cross / (n1 * n2).sqrt())
}

/// Kernel target alignment: [`alignment`] against a target kernel.
pub fn kta(k: &GramMatrix, target: &GramMatrix) -> Result<f64> {
    alignment(k, target)
}

/// Ideal label kernel: `1` where `y_i == y_j`, `0` otherwise.
pub fn target_from_labels(labels: ArrayView1<'_, f64>) -> Result<GramMatrix> {
    let first = labels.first().copied();
    if first.is_none() || labels.iter().all(|&y| Some(y) == first) {
        return Err(Error::DegenerateTarget);
    }
    let m = labels.len();
    let entries = Array2::from_shape_fn((m, m), |(i, j)| if labels[i] == labels[j] { 1.0 } else { 0.0 });
    GramMatrix::square(entries)
}

/// Row means, column means and grand mean of a kernel, used to center it and
/// any cross-kernel evaluated against the same training samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenteringStats {
    pub col_means: Array1<f64>,
    pub grand_mean: f64,
}

impl CenteringStats {
    pub fn of(k_train: &GramMatrix) -> Self {
        let col_means = k_train
            .entries
            .mean_axis(Axis(0))
            .unwrap_or_else(|| Array1::zeros(k_train.ncols()));
        let grand_mean = col_means.mean().unwrap_or(0.0);
        Self { col_means, grand_mean }
    }

    /// Centers a `s × m` kernel whose columns are the training samples.
    pub fn center_cross(&self, k_cross: &GramMatrix) -> Result<GramMatrix> {
        let m = self.col_means.len();
        if k_cross.ncols() != m {
            return Err(Error::Data(format!(
                "cross kernel has {} columns, training set has {m}",
                k_cross.ncols()
            )));
        }
        let row_means = k_cross
            .entries
            .mean_axis(Axis(1))
            .unwrap_or_else(|| Array1::zeros(k_cross.nrows()));
        let entries = Array2::from_shape_fn(k_cross.shape(), |(i, j)| {
            k_cross.entries[[i, j]] - row_means[i] - self.col_means[j] + self.grand_mean
        });
        Ok(GramMatrix {
            entries,
            row_ids: k_cross.row_ids.clone(),
            col_ids: k_cross.col_ids.clone(),
            kind: k_cross.kind,
        })
    }
}

/// Double centering `K - 1K - K1 + 1K1` with `1` the matrix of `1/m`.
pub fn center_kernel(k: &GramMatrix) -> Result<GramMatrix> {
    if k.kind != GramKind::Square || k.nrows() != k.ncols() {
        return Err(Error::Data("centering needs a square kernel".into()));
    }
    let stats = CenteringStats::of(k);
    let mut centered = stats.center_cross(k)?;
    centered.kind = GramKind::Square;
    // restore exact symmetry lost to rounding in the mean terms
    let m = centered.nrows();
    for i in 0..m {
        for j in 0..i {
            let v = 0.5 * (centered.entries[[i, j]] + centered.entries[[j, i]]);
            centered.entries[[i, j]] = v;
            centered.entries[[j, i]] = v;
        }
    }
    Ok(centered)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rows(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Array2<f64> {
        Array2::from_shape_fn((m, n), |_| rng.random_range(-2.0..2.0))
    }

    #[test]
    fn rbf_unit_diagonal_and_known_entry() {
        let x = array![[0.0], [1.0]];
        let k = rbf_gram(x.view(), 1.0).unwrap();
        assert_eq!(k.entries()[[0, 0]], 1.0);
        assert_eq!(k.entries()[[1, 1]], 1.0);
        assert!((k.entries()[[0, 1]] - 0.367879).abs() < 1e-6);
        assert_eq!(k.entries()[[0, 1]], k.entries()[[1, 0]]);
    }

    #[test]
    fn rbf_rejects_bad_gamma_and_nan() {
        let x = array![[0.0], [1.0]];
        assert!(matches!(rbf_gram(x.view(), 0.0), Err(Error::Parameter(_))));
        assert!(matches!(rbf_gram(x.view(), -1.0), Err(Error::Parameter(_))));
        let bad = array![[0.0], [f64::INFINITY]];
        assert!(matches!(rbf_gram(bad.view(), 1.0), Err(Error::Data(_))));
    }

    #[test]
    fn rbf_random_is_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_rows(&mut rng, 20, 5);
        let k = rbf_gram(x.view(), 0.3).unwrap();
        assert!(k.is_symmetric());
        let (vals, _) = linalg::symmetric_eigen(k.entries());
        assert!(vals[vals.len() - 1] >= -PSD_TOL * vals[0]);
        assert!(k.is_psd());
    }

    #[test]
    fn rbf_cross_matches_naive_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_rows(&mut rng, 7, 4);
        let b = random_rows(&mut rng, 9, 4);
        let k = rbf_cross(a.view(), b.view(), 0.7).unwrap();
        for i in 0..7 {
            for j in 0..9 {
                let mut d = 0.0;
                for f in 0..4 {
                    d += (a[[i, f]] - b[[j, f]]).powi(2);
                }
                assert!((k.entries()[[i, j]] - (-0.7 * d).exp()).abs() < 1e-15);
            }
        }
        let same = rbf_cross(a.view(), a.view(), 0.7).unwrap();
        let sq = rbf_gram(a.view(), 0.7).unwrap();
        for (x, y) in same.entries().iter().zip(sq.entries().iter()) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(rbf_cross(a.view(), random_rows(&mut rng, 2, 3).view(), 1.0).is_err());
    }

    #[test]
    fn cross_column_is_one_for_identical_row() {
        let train = array![[0.0, 1.0], [2.0, -1.0], [0.5, 0.5]];
        let test = array![[2.0, -1.0]];
        let k = rbf_cross(test.view(), train.view(), 2.0).unwrap();
        assert_eq!(k.entries()[[0, 1]], 1.0);
    }

    #[test]
    fn frobenius_and_alignment_small_cases() {
        let eye = GramMatrix::square(Array2::eye(2)).unwrap();
        let ones = GramMatrix::square(Array2::ones((2, 2))).unwrap();
        assert_eq!(frobenius_inner(&eye, &ones).unwrap(), 2.0);
        assert_eq!(frobenius_inner(&ones, &ones).unwrap(), 4.0);
        let a = alignment(&eye, &ones).unwrap();
        assert!((a - 2.0 / (2f64.sqrt() * 2.0)).abs() < 1e-12);
        assert!((a - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let zero = GramMatrix::square(Array2::zeros((2, 2))).unwrap();
        assert!(matches!(alignment(&zero, &ones), Err(Error::DegenerateKernel)));
        let big = GramMatrix::square(Array2::ones((3, 3))).unwrap();
        assert!(matches!(frobenius_inner(&big, &ones), Err(Error::Data(_))));
    }

    #[test]
    fn frobenius_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = GramMatrix::cross(random_rows(&mut rng, 6, 8));
        let b = GramMatrix::cross(random_rows(&mut rng, 6, 8));
        let mut naive = 0.0;
        for i in 0..6 {
            for j in 0..8 {
                naive += a.entries()[[i, j]] * b.entries()[[i, j]];
            }
        }
        let got = frobenius_inner(&a, &b).unwrap();
        assert!((got - naive).abs() <= 1e-12 * naive.abs().max(1.0));
    }

    #[test]
    fn label_target() {
        let t = target_from_labels(array![1.0, 1.0, -1.0].view()).unwrap();
        assert_eq!(t.entries(), array![[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let t2 = target_from_labels(array![1.0, -1.0].view()).unwrap();
        assert_eq!(t2.entries(), Array2::<f64>::eye(2));
        assert!(matches!(
            target_from_labels(array![1.0, 1.0].view()),
            Err(Error::DegenerateTarget)
        ));
    }

    #[test]
    fn kta_cases() {
        let t = target_from_labels(array![1.0, -1.0, 1.0, -1.0].view()).unwrap();
        assert!((kta(&t, &t).unwrap() - 1.0).abs() < 1e-15);
        let t2 = target_from_labels(array![1.0, -1.0].view()).unwrap();
        let ones = GramMatrix::square(Array2::ones((2, 2))).unwrap();
        assert!((kta(&ones, &t2).unwrap() - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        // block-diagonal kernel matching the label blocks
        let labels = array![1.0, 1.0, -1.0, -1.0, -1.0];
        let t3 = target_from_labels(labels.view()).unwrap();
        let block = t3.scaled(0.37);
        assert!((kta(&block, &t3).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn centering_properties() {
        let ones = GramMatrix::square(Array2::ones((4, 4))).unwrap();
        let c = center_kernel(&ones).unwrap();
        assert!(c.entries().iter().all(|v| v.abs() < 1e-15));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_rows(&mut rng, 10, 3);
        let k = rbf_gram(x.view(), 0.5).unwrap();
        let kc = center_kernel(&k).unwrap();
        for row in kc.entries().rows() {
            assert!(row.sum().abs() < 1e-8);
        }
        let kcc = center_kernel(&kc).unwrap();
        for (a, b) in kc.entries().iter().zip(kcc.entries().iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(kc.is_symmetric());
    }

    #[test]
    fn cross_centering_of_training_rows_equals_square_centering() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_rows(&mut rng, 8, 2);
        let k = rbf_gram(x.view(), 1.0).unwrap();
        let stats = CenteringStats::of(&k);
        let via_cross = stats.center_cross(&GramMatrix::cross(k.entries().to_owned())).unwrap();
        let direct = center_kernel(&k).unwrap();
        for (a, b) in via_cross.entries().iter().zip(direct.entries().iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
