#![allow(dead_code)]

use klrfs::kernel::GramMatrix;
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `A Aᵀ` for a random `m × r` factor, symmetrized exactly.
pub fn random_psd(rng: &mut ChaCha8Rng, m: usize, r: usize) -> GramMatrix {
    let a = Array2::from_shape_fn((m, r), |_| rng.random_range(-1.0..1.0));
    let k = a.dot(&a.t());
    let sym = (&k + &k.t()) * 0.5;
    GramMatrix::square(sym).unwrap()
}

/// `{0,1}` target `y yᵀ` style matrix from random labels with both classes present.
pub fn random_labels(rng: &mut ChaCha8Rng, m: usize) -> Array1<f64> {
    loop {
        let y = Array1::from_iter((0..m).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }));
        if y.iter().any(|&v| v > 0.0) && y.iter().any(|&v| v < 0.0) {
            return y;
        }
    }
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Array2<f64> {
    use rand_distr::{Distribution, StandardNormal};
    Array2::from_shape_fn((m, n), |_| StandardNormal.sample(rng))
}

/// AUC by counting every positive/negative pair; ties count one half.
pub fn auc_by_pairs(scores: &[f64], labels: &[f64]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if labels[i] <= 0.0 {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] > 0.0 {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}
