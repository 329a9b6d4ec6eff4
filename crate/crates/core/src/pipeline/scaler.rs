//! Per-feature standardization fitted on training rows only.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Array1<f64>,
    /// Population standard deviations; `1` for zero-variance columns.
    pub scales: Array1<f64>,
    /// Columns that were constant on the fitting rows.
    pub constant: Vec<usize>,
}

/// Fits the scaler and returns the standardized rows.
pub fn standardize(x: ArrayView2<'_, f64>) -> Result<(Array2<f64>, Scaler)> {
    if x.nrows() == 0 {
        return Err(Error::Data("cannot standardize zero rows".into()));
    }
    let means = x.mean_axis(Axis(0)).expect("non-empty");
    let mut scales = x.std_axis(Axis(0), 0.0);
    let mut constant = Vec::new();
    for (j, s) in scales.iter_mut().enumerate() {
        if *s <= f64::EPSILON * (1.0 + means[j].abs()) {
            *s = 1.0;
            constant.push(j);
        }
    }
    let scaler = Scaler { means, scales, constant };
    let z = apply_scaler(&scaler, x)?;
    Ok((z, scaler))
}

pub fn apply_scaler(scaler: &Scaler, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if x.ncols() != scaler.means.len() {
        return Err(Error::Data(format!(
            "scaler fitted on {} columns, got {}",
            scaler.means.len(),
            x.ncols()
        )));
    }
    Ok((&x - &scaler.means) / &scaler.scales)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn unit_variance_and_constant_flags() {
        let x = array![[1.0, 5.0, 2.0], [3.0, 5.0, 4.0], [5.0, 5.0, 9.0]];
        let (z, s) = standardize(x.view()).unwrap();
        assert_eq!(s.constant, vec![1]);
        for j in [0, 2] {
            let c = z.column(j);
            assert!(c.mean().unwrap().abs() < 1e-12);
            assert!((c.var(0.0) - 1.0).abs() < 1e-12);
        }
        assert!(z.column(1).iter().all(|&v| v == 0.0));
        let t = apply_scaler(&s, array![[1.0, 6.0, 2.0]].view()).unwrap();
        assert_eq!(t[[0, 1]], 1.0);
        assert!(apply_scaler(&s, array![[1.0]].view()).is_err());
    }
}
