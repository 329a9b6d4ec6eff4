//! The labelled sample matrix every other module consumes.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples as rows, features as columns, with binary labels in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix {
    values: Array2<f64>,
    labels: Array1<f64>,
    feature_names: Vec<String>,
}

impl DataMatrix {
    /// Validates shapes, labels and finiteness.
    pub fn new(values: Array2<f64>, labels: Array1<f64>, feature_names: Vec<String>) -> Result<Self> {
        let (m, n) = values.dim();
        if m < 2 {
            return Err(Error::Data(format!("need at least 2 samples, got {m}")));
        }
        if n < 1 {
            return Err(Error::Data("need at least 1 feature".into()));
        }
        if labels.len() != m {
            return Err(Error::Data(format!(
                "{} labels for {m} samples",
                labels.len()
            )));
        }
        if feature_names.len() != n {
            return Err(Error::Data(format!(
                "{} feature names for {n} features",
                feature_names.len()
            )));
        }
        if let Some(bad) = labels.iter().position(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::Data(format!(
                "label of sample {bad} is {}, expected -1 or +1",
                labels[bad]
            )));
        }
        if let Some(((i, j), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite value {v} at sample {i}, feature {j}")));
        }
        Ok(Self {
            values,
            labels,
            feature_names,
        })
    }

    /// Builds a matrix with generated feature names `f0, f1, ...`.
    pub fn from_arrays(values: Array2<f64>, labels: Array1<f64>) -> Result<Self> {
        let names = (0..values.ncols()).map(|j| format!("f{j}")).collect();
        Self::new(values, labels, names)
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn labels(&self) -> ArrayView1<'_, f64> {
        self.labels.view()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.values.column(j)
    }

    /// `(positives, negatives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&y| y > 0.0).count();
        (pos, self.labels.len() - pos)
    }

    pub fn has_both_classes(&self) -> bool {
        let (p, n) = self.class_counts();
        p > 0 && n > 0
    }

    /// Sub-matrix over the given sample indices, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n_samples()) {
            return Err(Error::Data(format!("sample index {bad} out of range")));
        }
        Self::new(
            self.values.select(Axis(0), rows),
            self.labels.select(Axis(0), rows),
            self.feature_names.clone(),
        )
    }

    /// Sub-matrix over the given feature indices, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.n_features()) {
            return Err(Error::Data(format!("feature index {bad} out of range")));
        }
        if cols.is_empty() {
            return Err(Error::Data("empty column selection".into()));
        }
        Self::new(
            self.values.select(Axis(1), cols),
            self.labels.clone(),
            cols.iter().map(|&c| self.feature_names[c].clone()).collect(),
        )
    }

    /// Replaces the feature values, keeping labels and names.
    pub fn with_values(&self, values: Array2<f64>) -> Result<Self> {
        if values.dim() != self.values.dim() {
            return Err(Error::Data("replacement values change the shape".into()));
        }
        Self::new(values, self.labels.clone(), self.feature_names.clone())
    }

    /// Index of a feature by name.
    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    pub fn into_parts(self) -> (Array2<f64>, Array1<f64>, Vec<String>) {
        (self.values, self.labels, self.feature_names)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_bad_inputs() {
        let x = array![[1.0], [2.0]];
        assert!(DataMatrix::from_arrays(x.clone(), array![1.0, 0.0]).is_err());
        assert!(DataMatrix::from_arrays(x.clone(), array![1.0]).is_err());
        assert!(DataMatrix::from_arrays(array![[1.0]], array![1.0]).is_err());
        assert!(DataMatrix::from_arrays(array![[f64::NAN], [1.0]], array![1.0, -1.0]).is_err());
        assert!(DataMatrix::from_arrays(x, array![1.0, -1.0]).is_ok());
    }

    #[test]
    fn row_and_column_selection() {
        let d = DataMatrix::from_arrays(
            array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]],
            array![1.0, -1.0, 1.0],
        )
        .unwrap();
        let r = d.select_rows(&[2, 0]).unwrap();
        assert_eq!(r.values(), array![[7.0, 8.0, 9.0], [1.0, 2.0, 3.0]]);
        assert_eq!(r.labels(), array![1.0, 1.0]);
        let c = d.select_columns(&[2]).unwrap();
        assert_eq!(c.feature_names(), &["f2".to_string()]);
        assert_eq!(d.class_counts(), (2, 1));
    }
}
