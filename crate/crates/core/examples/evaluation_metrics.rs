//! ROC AUC and the redundancy score of a feature subset.

use klrfs::metrics::{auc_roc, red_score_columns};
use ndarray::array;

fn main() -> klrfs::Result<()> {
    let scores = array![0.1, 0.4, 0.35, 0.8];
    let labels = array![-1.0, -1.0, 1.0, 1.0];
    println!("AUC = {}", auc_roc(scores.view(), labels.view())?);

    let names = vec!["a".to_string(), "b".to_string(), "c".to_string()];
    let x = array![[1.0, 2.0, 0.5], [2.0, 4.1, -0.3], [3.0, 6.2, 0.9], [4.0, 7.9, 0.1]];
    println!("RED = {:.4}", red_score_columns(x.view(), &names)?);
    Ok(())
}
