//! Synthetic two-class data with planted informative features.

use ndarray::{Array1, Array2};
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Generator settings plus the planted feature indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticMeta {
    pub n_samples: usize,
    pub n_features: usize,
    pub n_informative: usize,
    pub shift: f64,
    pub seed: u64,
    /// Sorted column indices of the informative features.
    pub planted: Vec<usize>,
    pub planted_names: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub data: DataMatrix,
    pub meta: SyntheticMeta,
}

/// `m` samples, `n` features, `k` of them informative.
///
/// Classes are balanced (the extra sample of an odd `m` is positive) and
/// rows are shuffled. Every cell is standard normal; on informative columns
/// the class means are `+shift/2` and `-shift/2`.
pub fn gen_synthetic(m: usize, n: usize, k: usize, shift: f64, seed: u64) -> Result<SyntheticDataset> {
    if m < 4 || n == 0 || k > n || !shift.is_finite() {
        return Err(Error::Parameter(format!(
            "synthetic data needs m >= 4, 0 < n, k <= n and finite shift (m={m}, n={n}, k={k}, shift={shift})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planted = sample(&mut rng, n, k).into_vec();
    planted.sort_unstable();
    let mut labels: Vec<f64> = (0..m).map(|i| if i < m.div_ceil(2) { 1.0 } else { -1.0 }).collect();
    labels.shuffle(&mut rng);
    let mut informative = vec![false; n];
    for &j in &planted {
        informative[j] = true;
    }
    let mut x = Array2::<f64>::zeros((m, n));
    for (i, mut row) in x.rows_mut().into_iter().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let noise: f64 = StandardNormal.sample(&mut rng);
            *v = if informative[j] { noise + labels[i] * shift / 2.0 } else { noise };
        }
    }
    let names: Vec<String> = (0..n).map(|j| format!("g{j}")).collect();
    let planted_names = planted.iter().map(|&j| names[j].clone()).collect();
    let data = DataMatrix::new(x, Array1::from(labels), names)?;
    Ok(SyntheticDataset {
        data,
        meta: SyntheticMeta {
            n_samples: m,
            n_features: n,
            n_informative: k,
            shift,
            seed,
            planted,
            planted_names,
        },
    })
}

/// Fraction of `planted` present in `selected`.
pub fn recovery(selected: &[usize], planted: &[usize]) -> f64 {
    if planted.is_empty() {
        return 1.0;
    }
    planted.iter().filter(|p| selected.contains(p)).count() as f64 / planted.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_columns_are_shifted() {
        let s = gen_synthetic(400, 20, 3, 2.0, 5).unwrap();
        assert_eq!(s.data.class_counts(), (200, 200));
        assert_eq!(s.meta.planted.len(), 3);
        let y = s.data.labels();
        for j in 0..20 {
            let c = s.data.column(j);
            let diff: f64 = c.iter().zip(y).map(|(v, l)| v * l).sum::<f64>() / 200.0;
            if s.meta.planted.contains(&j) {
                assert!((diff - 2.0).abs() < 0.4, "{j}: {diff}");
            } else {
                assert!(diff.abs() < 0.4, "{j}: {diff}");
            }
        }
        let again = gen_synthetic(400, 20, 3, 2.0, 5).unwrap();
        assert_eq!(again.data, s.data);
        assert_eq!(recovery(&[s.meta.planted[0]], &s.meta.planted), 1.0 / 3.0);
    }
}
