//! Experiment protocol: configuration, data files, splits, repeated
//! evaluation and reports.

pub mod config;
pub mod dataset;
pub mod report;
pub mod run;
pub mod scaler;
pub mod split;
pub mod synth;

pub use config::{schema_help, ExperimentConfig, Method};
pub use dataset::{load_dataset, save_dataset, LabelSpec};
pub use report::{Aggregate, ExperimentReport, RunRecord};
pub use run::{
    klrfs_records, klrfs_select, run_benchmark, run_delta_sweep, run_evaluate, run_klrfs, select_on_dataset,
    PreparedSplit, SelectionReport,
};
pub use scaler::{apply_scaler, standardize, Scaler};
pub use split::{repeated_splits, stratified_kfold, stratified_split, SplitSpec};
pub use synth::{gen_synthetic, SyntheticDataset, SyntheticMeta};
