//! Repeated-split evaluation of KLR-FS and the baseline selectors.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use super::report::{ExperimentReport, RunRecord};
use super::scaler::{apply_scaler, standardize};
use super::split::{derive_seed, repeated_splits, stratified_kfold, SplitSpec, STREAM_CV};
use crate::baselines::{anova_rank, load_ranking, svm_rfe, FeatureRanking};
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::kernel::{rbf_cross, rbf_gram, GramMatrix};
use crate::latent::HybridTarget;
use crate::metrics::{auc_roc, red_score_columns};
use crate::mkl::{build_bank, compose_gram, compose_kernel, greedy_select, MklSolution};
use crate::svc::{decision_values, fit_svc};

/// Runs `f` on a pool of `jobs` threads (`0` means the global pool).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))?;
    Ok(pool.install(f))
}

/// Train and test rows of one split, standardized with training statistics.
#[derive(Debug, Clone)]
pub struct PreparedSplit {
    pub x_train: Array2<f64>,
    pub y_train: Array1<f64>,
    pub x_test: Array2<f64>,
    pub y_test: Array1<f64>,
    pub constant_in_train: Vec<usize>,
}

pub fn prepare_split(data: &DataMatrix, split: &SplitSpec) -> Result<PreparedSplit> {
    let raw_train = data.values().select(Axis(0), &split.train);
    let raw_test = data.values().select(Axis(0), &split.test);
    let (x_train, scaler) = standardize(raw_train.view())?;
    let x_test = apply_scaler(&scaler, raw_test.view())?;
    Ok(PreparedSplit {
        x_train,
        y_train: data.labels().select(Axis(0), &split.train),
        x_test,
        y_test: data.labels().select(Axis(0), &split.test),
        constant_in_train: scaler.constant,
    })
}

fn sub_kernel(k: ArrayView2<'_, f64>, rows: &[usize], cols: &[usize]) -> Array2<f64> {
    k.select(Axis(0), rows).select(Axis(1), cols)
}

/// Mean validation AUC of an SVM with fixed training kernel, per `C`.
///
/// Folds whose validation part lacks a class are skipped. Fails when every
/// fold is skipped.
pub fn cv_auc(
    k_train: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    c: f64,
    folds: &[(Vec<usize>, Vec<usize>)],
    tol: f64,
) -> Result<f64> {
    let mut total = 0.0;
    let mut used = 0usize;
    for (tr, va) in folds {
        let k_tr = GramMatrix::square(sub_kernel(k_train, tr, tr))?;
        let y_tr = y.select(Axis(0), tr);
        let y_va = y.select(Axis(0), va);
        if !y_va.iter().any(|&v| v > 0.0) || !y_va.iter().any(|&v| v < 0.0) {
            continue;
        }
        let model = fit_svc(&k_tr, y_tr.view(), c, tol)?;
        let scores = decision_values(&model, &GramMatrix::cross(sub_kernel(k_train, va, tr)))?;
        total += auc_roc(scores.view(), y_va.view())?;
        used += 1;
    }
    if used == 0 {
        return Err(Error::UndefinedMetric("no validation fold contains both classes".into()));
    }
    Ok(total / used as f64)
}

/// Picks `C` by cross-validated AUC; ties go to the earlier grid entry.
pub fn select_c(
    k_train: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    c_grid: &[f64],
    folds: &[(Vec<usize>, Vec<usize>)],
    tol: f64,
) -> Result<(f64, f64)> {
    let scores: Vec<Result<f64>> = c_grid.par_iter().map(|&c| cv_auc(k_train, y, c, folds, tol)).collect();
    let mut best: Option<(f64, f64)> = None;
    for (&c, s) in c_grid.iter().zip(scores) {
        let s = s?;
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((c, s));
        }
    }
    best.ok_or_else(|| Error::Config("c_grid is empty".into()))
}

fn sorted_grid(v: &[f64]) -> Vec<f64> {
    let mut g = v.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

fn red_of(x: ArrayView2<'_, f64>, cols: &[usize], names: &[String]) -> Option<f64> {
    if cols.len() < 2 {
        return None;
    }
    let sel_names: Vec<String> = cols.iter().map(|&j| names[j].clone()).collect();
    red_score_columns(x.select(Axis(1), cols).view(), &sel_names).ok()
}

fn cv_folds(cfg: &ExperimentConfig, split: &SplitSpec, y_train: ArrayView1<'_, f64>) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    stratified_kfold(y_train.as_slice().expect("contiguous labels"), cfg.cv_folds, derive_seed(split.seed, STREAM_CV, 0))
}

/// Selection computed on the training rows of one split, for one delta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSelection {
    pub delta: f64,
    pub solution: MklSolution,
    pub kpca_components: usize,
    pub gamma_z: f64,
}

/// Greedy selection against the hybrid target of the given training rows,
/// one solution per delta, each run to `p_max` kernels.
pub fn klrfs_select(
    x_train: ArrayView2<'_, f64>,
    y_train: ArrayView1<'_, f64>,
    cfg: &ExperimentConfig,
    deltas: &[f64],
    p_max: usize,
) -> Result<Vec<SplitSelection>> {
    let hybrid = HybridTarget::fit(x_train, y_train, cfg.component_count())?;
    deltas
        .iter()
        .map(|&delta| {
            let target = hybrid.mix(delta)?;
            let bank = build_bank(x_train, &target.k_delta, &cfg.gamma_grid)?;
            let mut solution = greedy_select(&bank, &target.k_delta, p_max.min(bank.len()), cfg.min_gain)?;
            solution.target_delta = Some(delta);
            Ok(SplitSelection {
                delta,
                solution,
                kpca_components: hybrid.kpca.num_components,
                gamma_z: hybrid.gamma_z,
            })
        })
        .collect()
}

fn evaluate_solution(
    prep: &PreparedSplit,
    solution: &MklSolution,
    cfg: &ExperimentConfig,
    folds: &[(Vec<usize>, Vec<usize>)],
    names: &[String],
    mut rec: RunRecord,
) -> Result<RunRecord> {
    let k_train = compose_gram(solution, prep.x_train.view())?;
    let (c, cv) = select_c(k_train.entries(), prep.y_train.view(), &sorted_grid(&cfg.c_grid), folds, cfg.svc_tol)?;
    let model = fit_svc(&k_train, prep.y_train.view(), c, cfg.svc_tol)?;
    let k_test = compose_kernel(solution, prep.x_test.view(), prep.x_train.view())?;
    let scores = decision_values(&model, &k_test)?;
    rec.selected = solution.selected.clone();
    rec.selected_names = solution.selected.iter().map(|&j| names[j].clone()).collect();
    rec.weights = Some(solution.weights.clone());
    rec.weights_decreasing = Some(solution.weights_decreasing());
    rec.kta = Some(solution.final_kta());
    rec.c = Some(c);
    rec.cv_auc = Some(cv);
    rec.auc = Some(auc_roc(scores.view(), prep.y_test.view())?);
    rec.red = red_of(prep.x_train.view(), &solution.selected, names);
    Ok(rec)
}

/// KLR-FS records for one split over every (delta, p) pair, in that order.
pub fn klrfs_records(
    cfg: &ExperimentConfig,
    data: &DataMatrix,
    split: &SplitSpec,
    deltas: &[f64],
    p_list: &[usize],
) -> Vec<RunRecord> {
    let blank = |delta: f64, p: usize| RunRecord::empty("klrfs", p, Some(delta), split.repeat, split.seed);
    let p_max = p_list.iter().copied().max().unwrap_or(1);
    let setup = prepare_split(data, split).and_then(|prep| {
        let folds = cv_folds(cfg, split, prep.y_train.view())?;
        let sels = klrfs_select(prep.x_train.view(), prep.y_train.view(), cfg, deltas, p_max)?;
        Ok((prep, folds, sels))
    });
    let (prep, folds, sels) = match setup {
        Ok(s) => s,
        Err(e) => {
            return deltas
                .iter()
                .flat_map(|&d| p_list.iter().map(move |&p| (d, p)))
                .map(|(d, p)| blank(d, p).failed(&e))
                .collect()
        }
    };
    let jobs: Vec<(&SplitSelection, usize)> = sels.iter().flat_map(|s| p_list.iter().map(move |&p| (s, p))).collect();
    jobs.par_iter()
        .map(|&(sel, p)| {
            let mut rec = blank(sel.delta, p);
            rec.kpca_components = Some(sel.kpca_components);
            let solution = sel.solution.truncate(p);
            evaluate_solution(&prep, &solution, cfg, &folds, data.feature_names(), rec.clone())
                .unwrap_or_else(|e| rec.failed(&e))
        })
        .collect()
}

/// A single KLR-FS evaluation on one split.
pub fn run_klrfs(cfg: &ExperimentConfig, data: &DataMatrix, split: &SplitSpec, delta: f64, p: usize) -> RunRecord {
    klrfs_records(cfg, data, split, &[delta], &[p]).remove(0)
}

/// Baseline classifier: RBF SVM on the chosen columns with (gamma, C)
/// searched jointly by cross validation.
fn evaluate_columns(
    prep: &PreparedSplit,
    cols: &[usize],
    cfg: &ExperimentConfig,
    folds: &[(Vec<usize>, Vec<usize>)],
    names: &[String],
    mut rec: RunRecord,
) -> Result<RunRecord> {
    let xs_train = prep.x_train.select(Axis(1), cols);
    let xs_test = prep.x_test.select(Axis(1), cols);
    let c_grid = sorted_grid(&cfg.c_grid);
    let mut best: Option<(f64, f64, f64)> = None;
    for gamma in sorted_grid(&cfg.gamma_grid) {
        let k = rbf_gram(xs_train.view(), gamma)?;
        let (c, score) = select_c(k.entries(), prep.y_train.view(), &c_grid, folds, cfg.svc_tol)?;
        if best.is_none_or(|b| score > b.2) {
            best = Some((gamma, c, score));
        }
    }
    let (gamma, c, cv) = best.ok_or_else(|| Error::Config("gamma_grid is empty".into()))?;
    let k = rbf_gram(xs_train.view(), gamma)?;
    let model = fit_svc(&k, prep.y_train.view(), c, cfg.svc_tol)?;
    let scores = decision_values(&model, &rbf_cross(xs_test.view(), xs_train.view(), gamma)?)?;
    rec.selected = cols.to_vec();
    rec.selected_names = cols.iter().map(|&j| names[j].clone()).collect();
    rec.gamma = Some(gamma);
    rec.c = Some(c);
    rec.cv_auc = Some(cv);
    rec.auc = Some(auc_roc(scores.view(), prep.y_test.view())?);
    rec.red = red_of(prep.x_train.view(), cols, names);
    Ok(rec)
}

/// Baseline records for one split, one per p.
pub fn baseline_records(
    cfg: &ExperimentConfig,
    data: &DataMatrix,
    split: &SplitSpec,
    method: Method,
    p_list: &[usize],
    external: Option<&FeatureRanking>,
) -> Vec<RunRecord> {
    let blank = |p: usize| RunRecord::empty(method.name(), p, None, split.repeat, split.seed);
    let n = data.n_features();
    let setup = prepare_split(data, split).and_then(|prep| {
        let folds = cv_folds(cfg, split, prep.y_train.view())?;
        let train = DataMatrix::new(prep.x_train.clone(), prep.y_train.clone(), data.feature_names().to_vec())?;
        let shared = match method {
            Method::Anova => Some(anova_rank(&train)?),
            Method::External => Some(
                external
                    .cloned()
                    .ok_or_else(|| Error::Config("method 'external' needs external_ranking".into()))?,
            ),
            Method::SvmRfe => None,
            Method::Klrfs => return Err(Error::Config("klrfs is not a ranking baseline".into())),
        };
        Ok((prep, folds, train, shared))
    });
    let (prep, folds, train, shared) = match setup {
        Ok(s) => s,
        Err(e) => return p_list.iter().map(|&p| blank(p).failed(&e)).collect(),
    };
    p_list
        .par_iter()
        .map(|&p| {
            let k = p.min(n);
            let cols = match &shared {
                Some(r) => Ok(r.top(k)),
                None => svm_rfe(&train, k, cfg.rfe_c, cfg.rfe_drop_fraction).map(|r| r.top(k)),
            };
            cols.and_then(|cols| evaluate_columns(&prep, &cols, cfg, &folds, data.feature_names(), blank(p)))
                .unwrap_or_else(|e| blank(p).failed(&e))
        })
        .collect()
}

fn splits_for(cfg: &ExperimentConfig, data: &DataMatrix) -> Result<Vec<SplitSpec>> {
    repeated_splits(
        data.labels().as_slice().expect("contiguous labels"),
        cfg.train_fraction,
        cfg.n_repeats,
        cfg.seed,
    )
}

/// KLR-FS over every delta in `deltas` and every p, across all repeats.
pub fn run_klrfs_grid(cfg: &ExperimentConfig, data: &DataMatrix, deltas: &[f64], kind: &str) -> Result<ExperimentReport> {
    cfg.validate()?;
    let splits = splits_for(cfg, data)?;
    let records = with_jobs(cfg.jobs, || {
        splits
            .par_iter()
            .map(|s| klrfs_records(cfg, data, s, deltas, &cfg.p_select))
            .collect::<Vec<_>>()
    })?;
    Ok(ExperimentReport::new(kind, cfg, records.into_iter().flatten().collect()))
}

/// KLR-FS at a single delta.
pub fn run_evaluate(cfg: &ExperimentConfig, data: &DataMatrix, delta: f64) -> Result<ExperimentReport> {
    run_klrfs_grid(cfg, data, &[delta], "evaluate")
}

/// KLR-FS across the configured delta grid.
pub fn run_delta_sweep(cfg: &ExperimentConfig, data: &DataMatrix) -> Result<ExperimentReport> {
    run_klrfs_grid(cfg, data, &cfg.delta, "sweep-delta")
}

/// Every configured method on the same splits. KLR-FS uses `benchmark_delta`.
pub fn run_benchmark(cfg: &ExperimentConfig, data: &DataMatrix) -> Result<ExperimentReport> {
    cfg.validate()?;
    let external = match (&cfg.external_ranking, cfg.methods.contains(&Method::External)) {
        (Some(path), true) => Some(load_ranking(path, data.feature_names())?),
        _ => None,
    };
    let splits = splits_for(cfg, data)?;
    let records = with_jobs(cfg.jobs, || {
        splits
            .par_iter()
            .map(|s| {
                cfg.methods
                    .iter()
                    .flat_map(|&m| match m {
                        Method::Klrfs => klrfs_records(cfg, data, s, &[cfg.benchmark_delta], &cfg.p_select),
                        _ => baseline_records(cfg, data, s, m, &cfg.p_select, external.as_ref()),
                    })
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    })?;
    Ok(ExperimentReport::new("benchmark", cfg, records.into_iter().flatten().collect()))
}

/// Selection on a whole dataset, as written by `select`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub schema_version: u32,
    pub delta: f64,
    pub p_select: usize,
    pub n_samples: usize,
    pub n_features: usize,
    pub selected: Vec<usize>,
    pub selected_names: Vec<String>,
    pub weights: Vec<f64>,
    pub gammas: Vec<f64>,
    pub kta_trace: Vec<f64>,
    pub weights_decreasing: bool,
    pub kpca_components: usize,
    pub gamma_z: f64,
}

/// Standardizes all rows and runs greedy selection up to `p` kernels.
pub fn select_on_dataset(cfg: &ExperimentConfig, data: &DataMatrix, delta: f64, p: usize) -> Result<SelectionReport> {
    cfg.validate()?;
    if p == 0 {
        return Err(Error::Parameter("p must be at least 1".into()));
    }
    let (x, _) = standardize(data.values())?;
    let sel = with_jobs(cfg.jobs, || klrfs_select(x.view(), data.labels(), cfg, &[delta], p))??.remove(0);
    let s = sel.solution;
    Ok(SelectionReport {
        schema_version: super::report::SCHEMA_VERSION,
        delta,
        p_select: p,
        n_samples: data.n_samples(),
        n_features: data.n_features(),
        selected_names: s.selected.iter().map(|&j| data.feature_names()[j].clone()).collect(),
        weights_decreasing: s.weights_decreasing(),
        selected: s.selected,
        weights: s.weights,
        gammas: s.gammas,
        kta_trace: s.kta_trace,
        kpca_components: sel.kpca_components,
        gamma_z: sel.gamma_z,
    })
}
