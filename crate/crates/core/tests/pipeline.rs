#![allow(clippy::field_reassign_with_default)]

mod common;

use klrfs::pipeline::run::{cv_auc, klrfs_records, prepare_split, select_c};
use klrfs::pipeline::{
    gen_synthetic, repeated_splits, run_benchmark, run_delta_sweep, run_evaluate, run_klrfs, select_on_dataset,
    ExperimentConfig, Method,
};
use klrfs::kernel::target_from_labels;

fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.n_repeats = 2;
    cfg.p_select = vec![2, 4];
    cfg.cv_folds = 3;
    cfg
}

#[test]
fn evaluate_emits_one_record_per_repeat_and_p() {
    let s = gen_synthetic(40, 15, 3, 2.0, 1).unwrap();
    let cfg = small_config();
    let r = run_evaluate(&cfg, &s.data, 0.6).unwrap();
    assert_eq!(r.records.len(), 4);
    assert_eq!(r.aggregates.len(), 2);
    for rec in &r.records {
        assert!(rec.succeeded(), "{:?}", rec.error);
        assert!(rec.selected.len() <= rec.p);
        let w = rec.weights.as_ref().unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(w.iter().all(|&v| v > 0.0));
        assert!(cfg.c_grid.contains(&rec.c.unwrap()));
        assert!((0.0..=1.0).contains(&rec.auc.unwrap()));
    }
    let order: Vec<(usize, usize)> = r.records.iter().map(|r| (r.repeat, r.p)).collect();
    assert_eq!(order, vec![(0, 2), (0, 4), (1, 2), (1, 4)]);
}

#[test]
fn sweep_rows_cover_grid() {
    let s = gen_synthetic(30, 10, 2, 2.0, 2).unwrap();
    let mut cfg = small_config();
    cfg.delta = vec![0.0, 0.5, 1.0];
    let r = run_delta_sweep(&cfg, &s.data).unwrap();
    assert_eq!(r.records.len(), 3 * 2 * 2);
    assert_eq!(r.to_csv().lines().count(), 13);
}

#[test]
fn benchmark_runs_every_method_on_shared_splits() {
    let s = gen_synthetic(40, 12, 3, 2.0, 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let ranking = dir.path().join("rank.txt");
    std::fs::write(&ranking, "# best first\ng5\ng1\n").unwrap();
    let mut cfg = small_config();
    cfg.methods = vec![Method::Klrfs, Method::Anova, Method::SvmRfe, Method::External];
    cfg.external_ranking = Some(ranking);
    let r = run_benchmark(&cfg, &s.data).unwrap();
    assert_eq!(r.records.len(), 2 * 4 * 2);
    for rec in &r.records {
        assert!(rec.succeeded(), "{} {:?}", rec.method, rec.error);
    }
    let ext = r.records.iter().find(|r| r.method == "external" && r.p == 2).unwrap();
    assert_eq!(ext.selected_names, vec!["g5", "g1"]);
    let seeds: Vec<u64> = r.records.iter().filter(|r| r.repeat == 0).map(|r| r.split_seed).collect();
    assert!(seeds.windows(2).all(|w| w[0] == w[1]));
    let anova = r.records.iter().find(|r| r.method == "anova").unwrap();
    assert!(anova.gamma.is_some() && anova.delta.is_none());
}

#[test]
fn failures_are_recorded_not_fatal() {
    // p larger than the number of features is clamped; a one-component
    // latent space on tiny data still runs
    let s = gen_synthetic(20, 3, 1, 2.0, 4).unwrap();
    let mut cfg = small_config();
    cfg.p_select = vec![10];
    cfg.kpca_components = Some(1);
    let r = run_evaluate(&cfg, &s.data, 0.0).unwrap();
    assert_eq!(r.records.len(), 2);

    // duplicated rows make the latent kernel degenerate
    let same = ndarray::Array2::from_elem((12, 3), 1.0);
    let labels = ndarray::Array1::from_iter((0..12).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }));
    let data = klrfs::DataMatrix::from_arrays(same, labels).unwrap();
    let r = run_evaluate(&small_config(), &data, 0.6).unwrap();
    assert!(r.records.iter().all(|r| !r.succeeded()));
    assert!(r.aggregates.iter().all(|a| a.n_failed == 2 && a.auc_mean.is_none()));
}

#[test]
fn single_record_matches_batch() {
    let s = gen_synthetic(36, 10, 2, 2.0, 5).unwrap();
    let cfg = small_config();
    let labels = s.data.labels().to_vec();
    let split = &repeated_splits(&labels, cfg.train_fraction, 1, 0).unwrap()[0];
    let one = run_klrfs(&cfg, &s.data, split, 0.4, 4);
    let batch = klrfs_records(&cfg, &s.data, split, &[0.4], &[2, 4]);
    assert_eq!(one, batch[1]);
}

#[test]
fn cv_prefers_earliest_grid_entry_on_ties() {
    let y = ndarray::Array1::from_iter((0..12).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }));
    let k = target_from_labels(y.view()).unwrap();
    let folds = klrfs::pipeline::stratified_kfold(y.as_slice().unwrap(), 3, 0).unwrap();
    assert_eq!(cv_auc(k.entries(), y.view(), 1.0, &folds, 1e-3).unwrap(), 1.0);
    let (c, score) = select_c(k.entries(), y.view(), &[0.1, 1.0, 10.0], &folds, 1e-3).unwrap();
    assert_eq!((c, score), (0.1, 1.0));
}

#[test]
fn split_standardization_uses_training_rows_only() {
    let s = gen_synthetic(30, 4, 1, 1.0, 6).unwrap();
    let labels = s.data.labels().to_vec();
    let split = &repeated_splits(&labels, 0.8, 1, 2).unwrap()[0];
    let p = prepare_split(&s.data, split).unwrap();
    for j in 0..4 {
        let c = p.x_train.column(j);
        assert!(c.mean().unwrap().abs() < 1e-12);
        assert!((c.var(0.0) - 1.0).abs() < 1e-6);
    }
    assert_eq!(p.x_test.nrows(), split.test.len());
}

#[test]
fn whole_dataset_selection() {
    let s = gen_synthetic(60, 30, 3, 3.0, 7).unwrap();
    let sel = select_on_dataset(&ExperimentConfig::default(), &s.data, 0.6, 3).unwrap();
    assert!(sel.selected.len() <= 3);
    assert!(sel.selected.iter().all(|j| s.meta.planted.contains(j)));
    assert!(sel.kta_trace.windows(2).all(|w| w[1] >= w[0]));
}
