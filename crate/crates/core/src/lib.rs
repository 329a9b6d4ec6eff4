//! Feature selection by greedy multiple kernel learning.
//!
//! One RBF kernel is built per feature; a greedy two-kernel solver then adds
//! kernels to a non-negative combination as long as its alignment with a
//! target kernel keeps growing. The target mixes the ideal label kernel with
//! an RBF kernel on kernel-PCA coordinates of the training samples, controlled
//! by a mixture coefficient `delta`:
//!
//! ```text
//! K_delta = delta * K_yy + (1 - delta) * K_z
//! ```
//!
//! The selected features and their weights define a combined kernel that is fed
//! to a precomputed-kernel SVM. The crate also ships the evaluation machinery:
//! AUC, redundancy rate, ANOVA and SVM-RFE baselines, stratified repeated
//! splits, cross-validated hyperparameter search and JSON/CSV reports.
//!
//! Runnable walkthroughs live in `crates/core/examples/`; the `klrfs` binary
//! wraps the [`pipeline`] for scripted experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod cli;
pub mod data;
pub mod error;
pub mod kernel;
pub mod latent;
mod linalg;
pub mod metrics;
pub mod mkl;
pub mod pipeline;
pub mod svc;

pub use data::DataMatrix;
pub use error::{Error, Result};
pub use kernel::{GramKind, GramMatrix};
pub use latent::{KpcaModel, LatentCoords, MixedTarget};
pub use mkl::{FeatureKernelBank, MklSolution};
pub use svc::SvcModel;
