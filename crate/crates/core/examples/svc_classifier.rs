//! Soft-margin SVM on a precomputed kernel.

use klrfs::kernel::{rbf_cross, rbf_gram};
use klrfs::metrics::{auc_roc, confusion};
use klrfs::pipeline::{apply_scaler, gen_synthetic, standardize, stratified_split};
use klrfs::svc::{decision_values, fit_svc, kkt_violation, DEFAULT_TOL};
use ndarray::Axis;

fn main() -> klrfs::Result<()> {
    let s = gen_synthetic(100, 5, 2, 2.0, 1)?;
    let labels = s.data.labels().to_vec();
    let (train, test) = stratified_split(&labels, 0.8, 0)?;
    let (x_tr, scaler) = standardize(s.data.values().select(Axis(0), &train).view())?;
    let x_te = apply_scaler(&scaler, s.data.values().select(Axis(0), &test).view())?;
    let y_tr = s.data.labels().select(Axis(0), &train);
    let y_te = s.data.labels().select(Axis(0), &test);

    let k = rbf_gram(x_tr.view(), 0.1)?;
    let model = fit_svc(&k, y_tr.view(), 1.0, DEFAULT_TOL)?;
    println!(
        "{} support vectors, {} iterations, KKT residual {:.2e}",
        model.support_indices.len(),
        model.iterations,
        kkt_violation(&model, &k, y_tr.view())?
    );

    let scores = decision_values(&model, &rbf_cross(x_te.view(), x_tr.view(), 0.1)?)?;
    let cm = confusion(scores.view(), y_te.view(), 0.0)?;
    println!("test AUC {:.3}, accuracy {:.3}", auc_roc(scores.view(), y_te.view())?, cm.accuracy());
    Ok(())
}
