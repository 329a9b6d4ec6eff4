//! Kernel-PCA latent coordinates and the hybrid selection target.
//!
//! Training samples are mapped through kernel PCA, an RBF kernel `K_z` is built
//! on the resulting coordinates, and the selection target becomes the convex
//! mixture `delta * K_yy + (1 - delta) * K_z`. At `delta = 1` the target is the
//! purely supervised label kernel; at `delta = 0` it carries no label
//! information at all.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{self, CenteringStats, GramMatrix};
use crate::linalg;

/// Eigenvalues below this fraction of the largest are treated as numerical zero.
pub const RANK_TOL: f64 = 1e-10;

/// How many principal components to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ComponentCount {
    Fixed(usize),
    /// Smallest count whose eigenvalues capture `fraction` of the retained
    /// spectrum, capped at `min(m - 1, cap)`.
    Variance { fraction: f64, cap: usize },
}

impl Default for ComponentCount {
    fn default() -> Self {
        ComponentCount::Variance { fraction: 0.95, cap: 50 }
    }
}

/// Column scaling applied to the eigenvectors before projecting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectionScaling {
    /// `u_j / sqrt(m * lambda_j)`: unit-norm axes in feature space, so a linear
    /// kernel reproduces classical PCA scores.
    #[default]
    FeatureSpace,
    /// Unit-norm eigenvectors of the kernel matrix, used as they are.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpcaModel {
    /// `m × p`, orthonormal columns.
    pub eigvecs: Array2<f64>,
    /// `lambda_j` with `m * lambda_j` the eigenvalues of the centered kernel.
    pub eigvals: Array1<f64>,
    /// Bandwidth of the training kernel when it was an RBF kernel.
    pub train_gamma: Option<f64>,
    pub num_components: usize,
    /// Statistics of the uncentered training kernel; `None` when the model was
    /// fitted on an already-centered matrix without them.
    pub centering_stats: Option<CenteringStats>,
    pub scaling: ProjectionScaling,
    /// Set when the requested component count exceeded the numerical rank.
    pub rank_limited: bool,
}

/// Latent coordinates, one row per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentCoords {
    pub coords: Array2<f64>,
}

/// The hybrid target and its mixture coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedTarget {
    pub delta: f64,
    pub k_delta: GramMatrix,
}

/// Fits kernel PCA on a centered square kernel.
pub fn fit_kpca(k_centered: &GramMatrix, count: ComponentCount) -> Result<KpcaModel> {
    fit_kpca_with(k_centered, count, ProjectionScaling::default())
}

pub fn fit_kpca_with(
    k_centered: &GramMatrix,
    count: ComponentCount,
    scaling: ProjectionScaling,
) -> Result<KpcaModel> {
    let (m, cols) = k_centered.shape();
    if m != cols {
        return Err(Error::Data("kernel PCA needs a square kernel".into()));
    }
    let (vals, vecs) = linalg::symmetric_eigen(k_centered.entries());
    let top = vals.first().copied().unwrap_or(0.0);
    if !(top > 0.0) {
        return Err(Error::DegenerateLatent);
    }
    let rank = vals.iter().take_while(|&&v| v > RANK_TOL * top).count();

    let (requested, rank_limited) = match count {
        ComponentCount::Fixed(p) => {
            if p == 0 || p > m {
                return Err(Error::Parameter(format!(
                    "component count must be in 1..={m}, got {p}"
                )));
            }
            (p.min(rank), p > rank)
        }
        ComponentCount::Variance { fraction, cap } => {
            if !(fraction > 0.0 && fraction <= 1.0) || cap == 0 {
                return Err(Error::Parameter(format!(
                    "variance fraction must be in (0, 1] and cap positive, got {fraction}, {cap}"
                )));
            }
            let total: f64 = vals.iter().take(rank).sum();
            let mut acc = 0.0;
            let mut p = rank;
            for (i, v) in vals.iter().take(rank).enumerate() {
                acc += v;
                if acc >= fraction * total {
                    p = i + 1;
                    break;
                }
            }
            let limit = cap.min(m.saturating_sub(1)).max(1);
            (p.min(limit).min(rank), false)
        }
    };

    let eigvecs = vecs.slice(ndarray::s![.., ..requested]).to_owned();
    let eigvals = vals.slice(ndarray::s![..requested]).mapv(|v| v / m as f64);
    Ok(KpcaModel {
        eigvecs,
        eigvals,
        train_gamma: None,
        num_components: requested,
        centering_stats: None,
        scaling,
        rank_limited,
    })
}

impl KpcaModel {
    /// Fits on raw training rows: RBF kernel with median-heuristic bandwidth,
    /// double centering, then eigendecomposition.
    pub fn fit_rbf(x_train: ArrayView2<'_, f64>, count: ComponentCount) -> Result<Self> {
        let gamma = median_heuristic_gamma(x_train)?;
        let k = kernel::rbf_gram(x_train, gamma)?;
        let stats = CenteringStats::of(&k);
        let kc = kernel::center_kernel(&k)?;
        let mut model = fit_kpca(&kc, count)?;
        model.train_gamma = Some(gamma);
        model.centering_stats = Some(stats);
        Ok(model)
    }

    pub fn n_train(&self) -> usize {
        self.eigvecs.nrows()
    }

    /// Projection coefficients: the eigenvectors after [`ProjectionScaling`].
    pub fn coefficients(&self) -> Array2<f64> {
        match self.scaling {
            ProjectionScaling::Raw => self.eigvecs.clone(),
            ProjectionScaling::FeatureSpace => {
                let m = self.n_train() as f64;
                let mut a = self.eigvecs.clone();
                for (mut col, &lam) in a.columns_mut().into_iter().zip(self.eigvals.iter()) {
                    col /= (m * lam).sqrt();
                }
                a
            }
        }
    }

    /// Sum of retained `lambda_j`.
    pub fn captured_variance(&self) -> f64 {
        self.eigvals.sum()
    }

    /// Centers a raw cross kernel (rows: new samples, columns: training
    /// samples) with the training statistics and projects it.
    pub fn transform(&self, k_cross_raw: &GramMatrix) -> Result<LatentCoords> {
        let stats = self
            .centering_stats
            .as_ref()
            .ok_or_else(|| Error::Parameter("model carries no centering statistics".into()))?;
        project(self, &stats.center_cross(k_cross_raw)?)
    }
}

/// Latent coordinates `l_j(x) = sum_i a_ij k~(x_i, x)` for every row of a
/// centered cross kernel.
pub fn project(model: &KpcaModel, k_cross_centered: &GramMatrix) -> Result<LatentCoords> {
    if k_cross_centered.ncols() != model.n_train() {
        return Err(Error::Data(format!(
            "cross kernel has {} columns, model was fitted on {} samples",
            k_cross_centered.ncols(),
            model.n_train()
        )));
    }
    Ok(LatentCoords {
        coords: k_cross_centered.entries().dot(&model.coefficients()),
    })
}

/// Median of pairwise squared distances over `i < j`.
pub fn median_squared_distance(x: ArrayView2<'_, f64>) -> Result<f64> {
    let m = x.nrows();
    if m < 2 {
        return Err(Error::Data("median heuristic needs at least 2 samples".into()));
    }
    let mut d: Vec<f64> = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in (i + 1)..m {
            d.push(kernel::squared_distance(x.row(i), x.row(j)));
        }
    }
    d.sort_by(f64::total_cmp);
    let k = d.len();
    Ok(if k % 2 == 1 {
        d[k / 2]
    } else {
        0.5 * (d[k / 2 - 1] + d[k / 2])
    })
}

/// `1 / median ||x_i - x_j||^2`.
pub fn median_heuristic_gamma(x: ArrayView2<'_, f64>) -> Result<f64> {
    let med = median_squared_distance(x)?;
    if !(med > 0.0) {
        return Err(Error::DegenerateLatent);
    }
    Ok(1.0 / med)
}

/// RBF kernel on latent coordinates with median-heuristic bandwidth.
/// Returns the kernel and the bandwidth used.
pub fn latent_kernel(z: &LatentCoords) -> Result<(GramMatrix, f64)> {
    let gamma = median_heuristic_gamma(z.coords.view())?;
    Ok((kernel::rbf_gram(z.coords.view(), gamma)?, gamma))
}

/// `delta * K_yy + (1 - delta) * K_z`.
pub fn mix_targets(k_yy: &GramMatrix, k_z: &GramMatrix, delta: f64) -> Result<MixedTarget> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Parameter(format!("delta must lie in [0, 1], got {delta}")));
    }
    if k_yy.shape() != k_z.shape() {
        return Err(Error::Data(format!(
            "target shapes differ: {:?} vs {:?}",
            k_yy.shape(),
            k_z.shape()
        )));
    }
    let mut entries = Array2::zeros(k_yy.shape());
    Zip::from(&mut entries)
        .and(k_yy.entries())
        .and(k_z.entries())
        .for_each(|e, &a, &b| *e = delta * a + (1.0 - delta) * b);
    Ok(MixedTarget {
        delta,
        k_delta: GramMatrix::square(entries)?,
    })
}

/// Everything the selection target is made of for one training set.
#[derive(Debug, Clone)]
pub struct HybridTarget {
    pub k_yy: GramMatrix,
    pub k_z: GramMatrix,
    pub gamma_z: f64,
    pub kpca: KpcaModel,
    pub latent: LatentCoords,
}

impl HybridTarget {
    /// Label kernel plus latent kernel for (standardized) training rows.
    pub fn fit(x_train: ArrayView2<'_, f64>, labels: ArrayView1<'_, f64>, count: ComponentCount) -> Result<Self> {
        let k_yy = kernel::target_from_labels(labels)?;
        let kpca = KpcaModel::fit_rbf(x_train, count)?;
        let gamma = kpca.train_gamma.unwrap_or(1.0);
        let k_train = kernel::rbf_gram(x_train, gamma)?;
        let latent = kpca.transform(&GramMatrix::cross(k_train.into_entries()))?;
        let (k_z, gamma_z) = latent_kernel(&latent)?;
        Ok(Self {
            k_yy,
            k_z,
            gamma_z,
            kpca,
            latent,
        })
    }

    pub fn mix(&self, delta: f64) -> Result<MixedTarget> {
        mix_targets(&self.k_yy, &self.k_z, delta)
    }
}
