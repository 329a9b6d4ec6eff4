//! Comparison selectors: two-class ANOVA filter, SVM-RFE, and rankings
//! imported from other tools.

use std::collections::HashMap;
use std::path::Path;

use ndarray::Axis;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::kernel::linear_gram;
use crate::svc::{fit_svc, DEFAULT_TOL};

pub const DEFAULT_DROP_FRACTION: f64 = 0.1;

/// Features ordered best-first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    /// Higher is better; one entry per feature.
    pub scores: Vec<f64>,
    /// Permutation of feature indices, best first.
    pub order: Vec<usize>,
    pub method: String,
    /// Elimination rounds (SVM-RFE only).
    pub rounds: usize,
}

impl FeatureRanking {
    fn from_scores(scores: Vec<f64>, method: &str) -> Self {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        Self {
            scores,
            order,
            method: method.to_string(),
            rounds: 0,
        }
    }

    /// The `p` best features.
    pub fn top(&self, p: usize) -> Vec<usize> {
        self.order.iter().take(p).copied().collect()
    }
}

/// Two-class one-way F statistic per feature, ranked descending.
///
/// A feature with zero within-class variance scores `+inf` when the class
/// means differ and `0` when they do not.
pub fn anova_rank(x: &DataMatrix) -> Result<FeatureRanking> {
    let (n_pos, n_neg) = x.class_counts();
    if n_pos < 2 || n_neg < 2 {
        return Err(Error::DegenerateTarget);
    }
    let labels = x.labels();
    let n = (n_pos + n_neg) as f64;
    let scores = x
        .values()
        .axis_iter(Axis(1))
        .map(|col| {
            let (mut sp, mut sn) = (0.0, 0.0);
            for (&v, &y) in col.iter().zip(labels.iter()) {
                if y > 0.0 {
                    sp += v;
                } else {
                    sn += v;
                }
            }
            let (mp, mn) = (sp / n_pos as f64, sn / n_neg as f64);
            let grand = (sp + sn) / n;
            let between = n_pos as f64 * (mp - grand).powi(2) + n_neg as f64 * (mn - grand).powi(2);
            let within: f64 = col
                .iter()
                .zip(labels.iter())
                .map(|(&v, &y)| (v - if y > 0.0 { mp } else { mn }).powi(2))
                .sum();
            if within == 0.0 {
                if between == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                between / (within / (n - 2.0))
            }
        })
        .collect();
    Ok(FeatureRanking::from_scores(scores, "anova"))
}

/// Recursive feature elimination driven by linear-SVM weight magnitudes.
///
/// Each round fits a linear SVM on the surviving columns and removes the
/// `ceil(drop_fraction * surviving)` columns with the smallest `|w_j|`,
/// never going below `p_select`. Survivors lead the ranking ordered by their
/// final `|w_j|`, followed by eliminated features, latest eliminated first.
pub fn svm_rfe(x: &DataMatrix, p_select: usize, c: f64, drop_fraction: f64) -> Result<FeatureRanking> {
    let n = x.n_features();
    if p_select == 0 || p_select > n {
        return Err(Error::Parameter(format!("p_select must be in 1..={n}, got {p_select}")));
    }
    if !(drop_fraction > 0.0 && drop_fraction < 1.0) {
        return Err(Error::Parameter(format!(
            "drop fraction must lie in (0, 1), got {drop_fraction}"
        )));
    }
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut eliminated: Vec<usize> = Vec::with_capacity(n);
    let mut rounds = 0;
    loop {
        let xs = x.values().select(Axis(1), &remaining);
        let k = linear_gram(xs.view())?;
        let model = fit_svc(&k, x.labels(), c, DEFAULT_TOL)?;
        let w = model.linear_weights(xs.view())?;
        let mut by_weight: Vec<usize> = (0..remaining.len()).collect();
        by_weight.sort_by(|&a, &b| w[a].abs().total_cmp(&w[b].abs()).then(remaining[a].cmp(&remaining[b])));
        if remaining.len() == p_select {
            let survivors: Vec<usize> = by_weight.iter().rev().map(|&i| remaining[i]).collect();
            let order: Vec<usize> = survivors.into_iter().chain(eliminated.iter().rev().copied()).collect();
            let mut scores = vec![0.0; n];
            for (pos, &f) in order.iter().enumerate() {
                scores[f] = (n - pos) as f64;
            }
            return Ok(FeatureRanking {
                scores,
                order,
                method: "svm-rfe".into(),
                rounds,
            });
        }
        let drop = ((drop_fraction * remaining.len() as f64).ceil() as usize)
            .max(1)
            .min(remaining.len() - p_select);
        let dropped: Vec<usize> = by_weight[..drop].iter().map(|&i| remaining[i]).collect();
        eliminated.extend(&dropped);
        remaining.retain(|f| !dropped.contains(f));
        rounds += 1;
    }
}

/// Reads a ranking produced elsewhere: one feature name per line, best first.
/// Blank lines and `#` comments are skipped; features missing from the file
/// are appended in column order.
pub fn load_ranking(path: &Path, feature_names: &[String]) -> Result<FeatureRanking> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ranking(&text, feature_names, path)
}

pub(crate) fn parse_ranking(text: &str, feature_names: &[String], path: &Path) -> Result<FeatureRanking> {
    let index: HashMap<&str, usize> = feature_names
        .iter()
        .enumerate()
        .map(|(i, f)| (f.as_str(), i))
        .collect();
    let mut seen = vec![false; feature_names.len()];
    let mut order = Vec::with_capacity(feature_names.len());
    for (lineno, line) in text.lines().enumerate() {
        let name = line.trim();
        if name.is_empty() || name.starts_with('#') {
            continue;
        }
        let Some(&i) = index.get(name) else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("unknown feature '{name}'"),
            });
        };
        if seen[i] {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("feature '{name}' listed twice"),
            });
        }
        seen[i] = true;
        order.push(i);
    }
    order.extend((0..feature_names.len()).filter(|&i| !seen[i]));
    let n = order.len();
    let mut scores = vec![0.0; n];
    for (pos, &f) in order.iter().enumerate() {
        scores[f] = (n - pos) as f64;
    }
    Ok(FeatureRanking {
        scores,
        order,
        method: "external".into(),
        rounds: 0,
    })
}
