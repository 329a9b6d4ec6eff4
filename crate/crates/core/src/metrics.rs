//! Evaluation scores: ROC AUC, redundancy rate and confusion counts.

use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub fp: usize,
}

impl ConfusionCounts {
    pub fn accuracy(&self) -> f64 {
        let total = self.tp + self.fn_ + self.tn + self.fp;
        (self.tp + self.tn) as f64 / total as f64
    }
}

fn check_pair(scores: ArrayView1<'_, f64>, labels: ArrayView1<'_, f64>) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::Data(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Data("scores contain NaN".into()));
    }
    Ok(())
}

/// Area under the ROC curve via the Mann-Whitney rank statistic.
///
/// Equals the probability that a random positive outscores a random negative,
/// with ties counted as one half (average ranks).
pub fn auc_roc(scores: ArrayView1<'_, f64>, labels: ArrayView1<'_, f64>) -> Result<f64> {
    check_pair(scores, labels)?;
    let n_pos = labels.iter().filter(|&&y| y > 0.0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric("AUC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // ranks start..end (0-based) share the average 1-based rank
        let avg = (start + 1 + end) as f64 / 2.0;
        let pos_in_group = order[start..end].iter().filter(|&&i| labels[i] > 0.0).count();
        rank_sum_pos += avg * pos_in_group as f64;
        start = end;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos * n_neg) as f64)
}

/// Counts at the decision rule `score > threshold => positive`.
pub fn confusion(scores: ArrayView1<'_, f64>, labels: ArrayView1<'_, f64>, threshold: f64) -> Result<ConfusionCounts> {
    check_pair(scores, labels)?;
    let mut c = ConfusionCounts::default();
    for (&s, &y) in scores.iter().zip(labels.iter()) {
        match (s > threshold, y > 0.0) {
            (true, true) => c.tp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fp += 1,
        }
    }
    Ok(c)
}

/// Pearson correlation of two equally long columns; `None` if either is constant.
pub fn pearson(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.sum() / n;
    let mb = b.sum() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b.iter()) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        None
    } else {
        Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
    }
}

/// Redundancy rate: mean absolute Pearson correlation over all pairs of
/// distinct columns.
pub fn red_score_columns(x: ArrayView2<'_, f64>, names: &[String]) -> Result<f64> {
    let p = x.ncols();
    if p < 2 {
        return Err(Error::UndefinedMetric(format!(
            "redundancy needs at least 2 features, got {p}"
        )));
    }
    if x.nrows() < 2 {
        return Err(Error::UndefinedMetric("redundancy needs at least 2 samples".into()));
    }
    let name = |j: usize| names.get(j).cloned().unwrap_or_else(|| format!("#{j}"));
    for j in 0..p {
        let col = x.column(j);
        if col.iter().all(|&v| v == col[0]) {
            return Err(Error::UndefinedCorrelation { column: name(j) });
        }
    }
    let mut total = 0.0;
    for i in 0..p {
        for j in (i + 1)..p {
            let r = pearson(x.column(i), x.column(j))
                .ok_or_else(|| Error::UndefinedCorrelation { column: name(i) })?;
            total += r.abs();
        }
    }
    Ok(total / (p * (p - 1) / 2) as f64)
}

/// [`red_score_columns`] over every column of `x`.
pub fn red_score(x: &DataMatrix) -> Result<f64> {
    red_score_columns(x.values(), x.feature_names())
}
