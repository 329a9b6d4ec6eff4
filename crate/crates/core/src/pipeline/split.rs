//! Stratified random splits and stratified k-fold partitions.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seed for stream `stream`, item `index`, derived from a master seed.
///
/// SplitMix64 finalizer over the three inputs, so nearby seeds give
/// unrelated streams.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(0x94D0_49BB_1331_11EB);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) const STREAM_SPLIT: u64 = 1;
pub(crate) const STREAM_CV: u64 = 2;

/// One train/test partition. Both index lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub repeat: usize,
    pub seed: u64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn class_indices(labels: &[f64]) -> [Vec<usize>; 2] {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (i, &y) in labels.iter().enumerate() {
        if y > 0.0 {
            pos.push(i)
        } else {
            neg.push(i)
        }
    }
    [pos, neg]
}

/// Stratified split: each class contributes `round(fraction * n_c)` training
/// samples, at least one and at most `n_c - 1`.
pub fn stratified_split(labels: &[f64], train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Parameter(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for mut idx in class_indices(labels) {
        if idx.len() < 2 {
            return Err(Error::Data(format!(
                "stratified split needs at least 2 samples per class, found {}",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        let n_train = ((train_fraction * idx.len() as f64).round() as usize).clamp(1, idx.len() - 1);
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// `n_repeats` independent stratified splits with per-repeat seeds.
pub fn repeated_splits(labels: &[f64], train_fraction: f64, n_repeats: usize, master_seed: u64) -> Result<Vec<SplitSpec>> {
    (0..n_repeats)
        .map(|r| {
            let seed = derive_seed(master_seed, STREAM_SPLIT, r as u64);
            let (train, test) = stratified_split(labels, train_fraction, seed)?;
            Ok(SplitSpec {
                repeat: r,
                seed,
                train,
                test,
            })
        })
        .collect()
}

/// Stratified k-fold: returns `(train, validation)` position lists into
/// `labels`, each sorted. Within each class, shuffled samples are dealt to
/// folds round-robin.
pub fn stratified_kfold(labels: &[f64], k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 {
        return Err(Error::Parameter(format!("k-fold needs k >= 2, got {k}")));
    }
    if labels.len() < k {
        return Err(Error::Data(format!("{} samples cannot form {k} folds", labels.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; labels.len()];
    let mut offset = 0;
    for mut idx in class_indices(labels) {
        idx.shuffle(&mut rng);
        for (pos, &i) in idx.iter().enumerate() {
            fold_of[i] = (pos + offset) % k;
        }
        offset += idx.len();
    }
    Ok((0..k)
        .map(|f| {
            let (val, tr): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| fold_of[i] == f);
            (tr, val)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(p: usize, n: usize) -> Vec<f64> {
        let mut v = vec![1.0; p];
        v.extend(vec![-1.0; n]);
        v
    }

    #[test]
    fn split_is_stratified_and_disjoint() {
        let y = labels(30, 20);
        let (tr, te) = stratified_split(&y, 0.8, 9).unwrap();
        assert_eq!(tr.len() + te.len(), 50);
        assert_eq!(tr.iter().filter(|&&i| y[i] > 0.0).count(), 24);
        assert_eq!(tr.iter().filter(|&&i| y[i] < 0.0).count(), 16);
        assert!(tr.iter().all(|i| !te.contains(i)));
        assert_eq!(stratified_split(&y, 0.8, 9).unwrap(), (tr.clone(), te));
        assert_ne!(stratified_split(&y, 0.8, 10).unwrap().0, tr);
    }

    #[test]
    fn repeats_use_distinct_seeds() {
        let y = labels(10, 10);
        let s = repeated_splits(&y, 0.5, 3, 1).unwrap();
        assert_eq!(s.len(), 3);
        assert_ne!(s[0].seed, s[1].seed);
        assert_eq!(s, repeated_splits(&y, 0.5, 3, 1).unwrap());
    }

    #[test]
    fn kfold_partitions() {
        let y = labels(13, 7);
        let folds = stratified_kfold(&y, 5, 3).unwrap();
        let mut all: Vec<usize> = folds.iter().flat_map(|(_, v)| v.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..20).collect::<Vec<_>>());
        for (tr, va) in &folds {
            assert_eq!(tr.len() + va.len(), 20);
            assert!(va.iter().any(|&i| y[i] > 0.0));
            assert!(va.iter().any(|&i| y[i] < 0.0));
        }
        assert!(stratified_kfold(&y, 1, 0).is_err());
    }
}
