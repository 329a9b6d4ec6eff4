//! Feature-wise kernel bank and the greedy two-kernel MKL solver.
//!
//! Every feature gets its own 1-D RBF kernel with a bandwidth tuned to the
//! target. Selection starts from the best single kernel and, at each step,
//! solves the two-kernel problem `max_{a,b >= 0} A(a K_mu + b K_j, T)` for
//! every unselected `j`, adopting the candidate with the largest alignment
//! gain. Frobenius products `<K_mu, K_j>` are cached and updated in place, so
//! a step costs one pass over the bank instead of rebuilding `K_mu`.

use std::borrow::Cow;

use ndarray::{Array2, ArrayView1, ArrayView2};
use ndarray::parallel::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{GramKind, GramMatrix};

/// Default gain threshold below which greedy selection stops.
pub const DEFAULT_MIN_GAIN: f64 = 1e-6;

/// Materialize the bank's kernels when they fit in this many bytes.
const CACHE_BUDGET_BYTES: usize = 1 << 30;

/// Symmetric matrix stored as `m` diagonal entries followed by the strict
/// upper triangle, row by row.
#[derive(Debug, Clone)]
struct Packed(Vec<f64>);

impl Packed {
    fn from_dense(k: ArrayView2<'_, f64>) -> Self {
        let m = k.nrows();
        let mut v = Vec::with_capacity(m * (m + 1) / 2);
        v.extend(k.diag().iter().copied());
        for i in 0..m {
            for j in (i + 1)..m {
                v.push(k[[i, j]]);
            }
        }
        Packed(v)
    }

    fn rbf_1d(x: ArrayView1<'_, f64>, gamma: f64) -> Self {
        let m = x.len();
        let mut v = Vec::with_capacity(m * (m + 1) / 2);
        v.resize(m, 1.0);
        for i in 0..m {
            let xi = x[i];
            for j in (i + 1)..m {
                let d = xi - x[j];
                v.push((-gamma * d * d).exp());
            }
        }
        Packed(v)
    }

    /// Frobenius product of the two full symmetric matrices.
    fn inner(&self, other: &Packed, m: usize) -> f64 {
        let (da, oa) = self.0.split_at(m);
        let (db, ob) = other.0.split_at(m);
        let diag: f64 = da.iter().zip(db).map(|(a, b)| a * b).sum();
        let off: f64 = oa.iter().zip(ob).map(|(a, b)| a * b).sum();
        diag + 2.0 * off
    }

    fn to_dense(&self, m: usize) -> Array2<f64> {
        let mut k = Array2::zeros((m, m));
        for i in 0..m {
            k[[i, i]] = self.0[i];
        }
        let mut idx = m;
        for i in 0..m {
            for j in (i + 1)..m {
                k[[i, j]] = self.0[idx];
                k[[j, i]] = self.0[idx];
                idx += 1;
            }
        }
        k
    }
}

#[derive(Debug, Clone)]
enum Source {
    /// Training columns; kernels are rebuilt on demand unless cached.
    Features {
        x: Array2<f64>,
        cache: Option<Vec<Packed>>,
    },
    Precomputed(Vec<Packed>),
}

/// One kernel per input feature with its tuned bandwidth and alignment.
#[derive(Debug, Clone)]
pub struct FeatureKernelBank {
    m: usize,
    source: Source,
    gammas: Vec<f64>,
    scores: Vec<f64>,
    self_inner: Vec<f64>,
    target_inner: Vec<f64>,
    target_norm2: f64,
    constant: Vec<bool>,
}

impl FeatureKernelBank {
    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn n_samples(&self) -> usize {
        self.m
    }

    /// Tuned bandwidth per feature.
    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// Standalone alignment of each feature kernel with the target.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Features whose kernel is the all-ones matrix.
    pub fn constant_features(&self) -> Vec<usize> {
        self.constant
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| c.then_some(i))
            .collect()
    }

    pub fn is_constant(&self, i: usize) -> bool {
        self.constant[i]
    }

    fn packed(&self, i: usize) -> Cow<'_, Packed> {
        match &self.source {
            Source::Features { cache: Some(c), .. } => Cow::Borrowed(&c[i]),
            Source::Features { x, cache: None } => Cow::Owned(Packed::rbf_1d(x.column(i), self.gammas[i])),
            Source::Precomputed(k) => Cow::Borrowed(&k[i]),
        }
    }

    /// Dense Gram matrix of feature `i`.
    pub fn gram(&self, i: usize) -> Result<GramMatrix> {
        if i >= self.len() {
            return Err(Error::Data(format!("feature {i} not in bank of {}", self.len())));
        }
        GramMatrix::square(self.packed(i).to_dense(self.m))
    }

    /// Bank over externally supplied symmetric kernels.
    ///
    /// `gammas` is carried through to the solution unchanged and may hold any
    /// label the caller wants attached to each kernel.
    pub fn from_kernels(kernels: &[GramMatrix], target: &GramMatrix, gammas: Vec<f64>) -> Result<Self> {
        if kernels.is_empty() {
            return Err(Error::Parameter("empty kernel bank".into()));
        }
        if gammas.len() != kernels.len() {
            return Err(Error::Parameter("one gamma per kernel required".into()));
        }
        let m = check_target(target)?;
        let t = Packed::from_dense(target.entries());
        let target_norm2 = t.inner(&t, m);
        let mut packed = Vec::with_capacity(kernels.len());
        for k in kernels {
            if k.shape() != (m, m) || !k.is_symmetric() {
                return Err(Error::Data("bank kernels must be symmetric and match the target".into()));
            }
            packed.push(Packed::from_dense(k.entries()));
        }
        let self_inner: Vec<f64> = packed.iter().map(|p| p.inner(p, m)).collect();
        let target_inner: Vec<f64> = packed.iter().map(|p| p.inner(&t, m)).collect();
        let scores = self_inner
            .iter()
            .zip(&target_inner)
            .map(|(&kk, &kt)| cosine(kt, kk, target_norm2))
            .collect::<Result<Vec<_>>>()?;
        let constant = packed
            .iter()
            .map(|p| p.0.iter().all(|&v| v == p.0[0]))
            .collect();
        Ok(Self {
            m,
            source: Source::Precomputed(packed),
            gammas,
            scores,
            self_inner,
            target_inner,
            target_norm2,
            constant,
        })
    }
}

fn check_target(target: &GramMatrix) -> Result<usize> {
    let (m, n) = target.shape();
    if target.kind() != GramKind::Square || m != n {
        return Err(Error::Data("target must be a square kernel".into()));
    }
    if !target.is_symmetric() {
        return Err(Error::Data("target must be symmetric".into()));
    }
    Ok(m)
}

fn cosine(kt: f64, kk: f64, tt: f64) -> Result<f64> {
    if kk <= 0.0 || tt <= 0.0 {
        return Err(Error::DegenerateKernel);
    }
    Ok(kt / (kk * tt).sqrt())
}

/// Builds the feature-wise bank over training rows `x` (samples × features).
///
/// For each feature the bandwidth is the grid value maximizing alignment with
/// `target`; ties go to the smallest bandwidth. Constant columns yield the
/// all-ones kernel, which is scored like any other and flagged.
pub fn build_bank(x: ArrayView2<'_, f64>, target: &GramMatrix, gamma_grid: &[f64]) -> Result<FeatureKernelBank> {
    if gamma_grid.is_empty() {
        return Err(Error::Parameter("empty gamma grid".into()));
    }
    if let Some(g) = gamma_grid.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return Err(Error::Parameter(format!("gamma must be positive, got {g}")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("bank input contains non-finite values".into()));
    }
    let m = check_target(target)?;
    if x.nrows() != m {
        return Err(Error::Data(format!(
            "{} training rows but target is {m}x{m}",
            x.nrows()
        )));
    }
    if x.ncols() == 0 {
        return Err(Error::Parameter("empty kernel bank".into()));
    }
    let mut grid = gamma_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let t = Packed::from_dense(target.entries());
    let tt = t.inner(&t, m);
    if tt <= 0.0 {
        return Err(Error::DegenerateKernel);
    }

    struct Entry {
        gamma: f64,
        score: f64,
        kk: f64,
        kt: f64,
        constant: bool,
    }

    let entries: Vec<Entry> = (0..x.ncols())
        .into_par_iter()
        .map(|i| {
            let col = x.column(i);
            let constant = col.iter().all(|&v| v == col[0]);
            let mut best: Option<Entry> = None;
            for &gamma in &grid {
                let k = Packed::rbf_1d(col, gamma);
                let kk = k.inner(&k, m);
                let kt = k.inner(&t, m);
                let score = kt / (kk * tt).sqrt();
                if best.as_ref().is_none_or(|b| score > b.score) {
                    best = Some(Entry {
                        gamma,
                        score,
                        kk,
                        kt,
                        constant,
                    });
                }
            }
            best.expect("grid is non-empty")
        })
        .collect();

    let gammas: Vec<f64> = entries.iter().map(|e| e.gamma).collect();
    let bytes = x.ncols() * m * (m + 1) / 2 * std::mem::size_of::<f64>();
    let cache = (bytes <= CACHE_BUDGET_BYTES).then(|| {
        (0..x.ncols())
            .into_par_iter()
            .map(|i| Packed::rbf_1d(x.column(i), gammas[i]))
            .collect()
    });

    Ok(FeatureKernelBank {
        m,
        source: Source::Features {
            x: x.to_owned(),
            cache,
        },
        scores: entries.iter().map(|e| e.score).collect(),
        self_inner: entries.iter().map(|e| e.kk).collect(),
        target_inner: entries.iter().map(|e| e.kt).collect(),
        constant: entries.iter().map(|e| e.constant).collect(),
        target_norm2: tt,
        gammas,
    })
}

/// Optimal non-negative weights for combining two kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairWeights {
    pub mu_a: f64,
    pub mu_b: f64,
    /// Alignment of `mu_a K_a + mu_b K_b` with the target.
    pub kta: f64,
    /// The Gram system was singular (`K_b` proportional to `K_a`).
    pub proportional: bool,
}

/// Solves the two-kernel problem from Frobenius products alone.
///
/// `aa = <Ka,Ka>`, `ab = <Ka,Kb>`, `bb = <Kb,Kb>`, `ta = <Ka,T>`,
/// `tb = <Kb,T>`, `tt = <T,T>`. Weights are normalized to sum to one.
pub fn solve_pair(aa: f64, ab: f64, bb: f64, ta: f64, tb: f64, tt: f64) -> Result<PairWeights> {
    if !(aa > 0.0) || !(tt > 0.0) {
        return Err(Error::DegenerateKernel);
    }
    let eval = |a: f64, b: f64| (a * ta + b * tb) / ((a * a * aa + 2.0 * a * b * ab + b * b * bb) * tt).sqrt();
    let alone = PairWeights {
        mu_a: 1.0,
        mu_b: 0.0,
        kta: ta / (aa * tt).sqrt(),
        proportional: false,
    };
    let det = aa * bb - ab * ab;
    if !(bb > 0.0) || det <= 1e-12 * aa * bb {
        return Ok(PairWeights {
            proportional: true,
            ..alone
        });
    }

    let mut best = alone;
    // stationary point of the cosine: mu proportional to M^{-1} t
    let va = (bb * ta - ab * tb) / det;
    let vb = (aa * tb - ab * ta) / det;
    if va >= 0.0 && vb >= 0.0 && va + vb > 0.0 {
        let (a, b) = (va / (va + vb), vb / (va + vb));
        let k = eval(a, b);
        if k > best.kta {
            best = PairWeights {
                mu_a: a,
                mu_b: b,
                kta: k,
                proportional: false,
            };
        }
    }
    let only_b = tb / (bb * tt).sqrt();
    if only_b > best.kta {
        best = PairWeights {
            mu_a: 0.0,
            mu_b: 1.0,
            kta: only_b,
            proportional: false,
        };
    }
    Ok(best)
}

/// Non-negative weights maximizing `A(mu_a K_a + mu_b K_b, T)`.
pub fn two_kernel_weights(k_a: &GramMatrix, k_b: &GramMatrix, target: &GramMatrix) -> Result<PairWeights> {
    use crate::kernel::frobenius_inner as fi;
    solve_pair(
        fi(k_a, k_a)?,
        fi(k_a, k_b)?,
        fi(k_b, k_b)?,
        fi(k_a, target)?,
        fi(k_b, target)?,
        fi(target, target)?,
    )
}

/// Result of greedy selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MklSolution {
    /// Feature indices in selection order.
    pub selected: Vec<usize>,
    /// Kernel weights, strictly positive, summing to one.
    pub weights: Vec<f64>,
    /// Bandwidth of each selected feature kernel.
    pub gammas: Vec<f64>,
    /// Alignment after each greedy step; entry 0 is the first kernel alone.
    pub kta_trace: Vec<f64>,
    pub target_delta: Option<f64>,
    /// `(mu_alpha, mu_beta)` adopted at steps `1..`.
    pub steps: Vec<(f64, f64)>,
}

fn replay_weights(steps: &[(f64, f64)]) -> Vec<f64> {
    let mut w = vec![1.0];
    for &(a, b) in steps {
        for v in w.iter_mut() {
            *v *= a;
        }
        w.push(b);
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|v| v / total).collect()
}

impl MklSolution {
    /// The solution greedy selection would have returned with `p_max = k`.
    pub fn truncate(&self, k: usize) -> MklSolution {
        let k = k.clamp(1, self.selected.len());
        let steps = self.steps[..k - 1].to_vec();
        MklSolution {
            selected: self.selected[..k].to_vec(),
            weights: replay_weights(&steps),
            gammas: self.gammas[..k].to_vec(),
            kta_trace: self.kta_trace[..k].to_vec(),
            target_delta: self.target_delta,
            steps,
        }
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    /// Whether weights strictly decrease in selection order. Commonly true,
    /// not guaranteed by the greedy construction.
    pub fn weights_decreasing(&self) -> bool {
        self.weights.windows(2).all(|w| w[0] > w[1])
    }

    pub fn final_kta(&self) -> f64 {
        self.kta_trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// Greedy KTA-maximizing selection over the bank.
///
/// Stops after `p_max` kernels or when the best alignment gain is at most
/// `min_gain`. Candidates are scanned in parallel; the argmax is taken in
/// index order so ties resolve to the lowest feature index.
pub fn greedy_select(
    bank: &FeatureKernelBank,
    target: &GramMatrix,
    p_max: usize,
    min_gain: f64,
) -> Result<MklSolution> {
    if bank.is_empty() {
        return Err(Error::Parameter("empty kernel bank".into()));
    }
    if p_max == 0 {
        return Err(Error::Parameter("p_max must be at least 1".into()));
    }
    if min_gain.is_nan() || min_gain < 0.0 {
        return Err(Error::Parameter(format!("min_gain must be non-negative, got {min_gain}")));
    }
    if target.shape() != (bank.m, bank.m) {
        return Err(Error::Data("target does not match the bank's sample set".into()));
    }
    let m = bank.m;
    let n = bank.len();
    let tt = bank.target_norm2;

    let mut first = 0;
    for i in 1..n {
        if bank.scores[i] > bank.scores[first] {
            first = i;
        }
    }
    let mut in_solution = vec![false; n];
    in_solution[first] = true;
    let mut selected = vec![first];
    let mut steps: Vec<(f64, f64)> = Vec::new();
    let mut trace = vec![bank.scores[first]];

    let mut mu_norm2 = bank.self_inner[first];
    let mut mu_t = bank.target_inner[first];
    let mut cross = cross_products(bank, first);

    while selected.len() < p_max.min(n) {
        let current = *trace.last().expect("trace is non-empty");
        let candidates: Vec<Option<PairWeights>> = (0..n)
            .into_par_iter()
            .map(|j| {
                if in_solution[j] {
                    return None;
                }
                solve_pair(mu_norm2, cross[j], bank.self_inner[j], mu_t, bank.target_inner[j], tt)
                    .ok()
                    .filter(|w| w.mu_a > 0.0 && w.mu_b > 0.0)
            })
            .collect();
        let mut best: Option<(usize, PairWeights)> = None;
        for (j, c) in candidates.into_iter().enumerate() {
            if let Some(w) = c {
                if best.is_none_or(|(_, b)| w.kta > b.kta) {
                    best = Some((j, w));
                }
            }
        }
        let Some((j, w)) = best else { break };
        if !(w.kta - current > min_gain) {
            break;
        }
        let (a, b) = (w.mu_a, w.mu_b);
        mu_norm2 = a * a * mu_norm2 + 2.0 * a * b * cross[j] + b * b * bank.self_inner[j];
        mu_t = a * mu_t + b * bank.target_inner[j];
        let new_cross = cross_products(bank, j);
        for (c, nc) in cross.iter_mut().zip(new_cross) {
            *c = a * *c + b * nc;
        }
        in_solution[j] = true;
        selected.push(j);
        steps.push((a, b));
        trace.push(w.kta);
    }
    debug_assert!(m > 0);

    Ok(MklSolution {
        gammas: selected.iter().map(|&i| bank.gammas[i]).collect(),
        weights: replay_weights(&steps),
        selected,
        kta_trace: trace,
        target_delta: None,
        steps,
    })
}

/// `<K_i, K_j>` for every `j` in the bank.
fn cross_products(bank: &FeatureKernelBank, i: usize) -> Vec<f64> {
    let ki = bank.packed(i);
    (0..bank.len())
        .into_par_iter()
        .map(|j| ki.inner(&bank.packed(j), bank.m))
        .collect()
}

/// `K_mu(a, b) = sum_i mu_i exp(-gamma_i (a_f - b_f)^2)` over the selected
/// features `f`, between every row of `rows_a` and every row of `rows_b`.
///
/// Rows must carry the full original feature set; the solution's indices
/// address its columns.
pub fn compose_kernel(
    solution: &MklSolution,
    rows_a: ArrayView2<'_, f64>,
    rows_b: ArrayView2<'_, f64>,
) -> Result<GramMatrix> {
    check_columns(solution, rows_a)?;
    check_columns(solution, rows_b)?;
    let (sa, sb) = (rows_a.nrows(), rows_b.nrows());
    let mut k = Array2::<f64>::zeros((sa, sb));
    k.axis_iter_mut(ndarray::Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(r, mut row)| {
            for (c, e) in row.iter_mut().enumerate() {
                let mut s = 0.0;
                for ((&f, &mu), &g) in solution.selected.iter().zip(&solution.weights).zip(&solution.gammas) {
                    let d = rows_a[[r, f]] - rows_b[[c, f]];
                    s += mu * (-g * d * d).exp();
                }
                *e = s;
            }
        });
    Ok(GramMatrix::cross(k))
}

/// Square combined kernel over one row set.
pub fn compose_gram(solution: &MklSolution, rows: ArrayView2<'_, f64>) -> Result<GramMatrix> {
    let k = compose_kernel(solution, rows, rows)?;
    GramMatrix::square(k.into_entries())
}

fn check_columns(solution: &MklSolution, rows: ArrayView2<'_, f64>) -> Result<()> {
    if let Some(&f) = solution.selected.iter().find(|&&f| f >= rows.ncols()) {
        return Err(Error::Data(format!(
            "selected feature column {f} missing: rows have {} columns",
            rows.ncols()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{self, kta, rbf_gram, target_from_labels};
    use ndarray::{array, Array1, Axis};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// 40 samples, balanced classes; column 2 equals the label, column 4 is a
    /// label-permuted copy of it, the rest are noise.
    fn constructed() -> (Array2<f64>, Array1<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let y = Array1::from_iter((0..40).map(|i| if i < 20 { 1.0 } else { -1.0 }));
        let mut x = Array2::from_shape_fn((40, 5), |_| rng.random_range(-1.5..1.5));
        x.column_mut(2).assign(&y);
        let mut perm: Vec<f64> = y.to_vec();
        perm.shuffle(&mut rng);
        x.column_mut(4).assign(&Array1::from(perm));
        (x, y)
    }

    #[test]
    fn bank_prefers_label_feature() {
        let (x, y) = constructed();
        let t = target_from_labels(y.view()).unwrap();
        let bank = build_bank(x.view(), &t, &[0.01, 0.1, 1.0, 10.0]).unwrap();
        let best = (0..5).max_by(|&a, &b| bank.scores()[a].total_cmp(&bank.scores()[b])).unwrap();
        assert_eq!(best, 2);
        assert!(bank.scores()[4] < bank.scores()[2]);
        for i in 0..5 {
            let recomputed = kta(&bank.gram(i).unwrap(), &t).unwrap();
            assert!((recomputed - bank.scores()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn single_value_grid() {
        let (x, y) = constructed();
        let t = target_from_labels(y.view()).unwrap();
        let bank = build_bank(x.view(), &t, &[0.5]).unwrap();
        assert!(bank.gammas().iter().all(|&g| g == 0.5));
        assert!(build_bank(x.view(), &t, &[]).is_err());
        assert!(build_bank(x.view(), &t, &[0.0]).is_err());
    }

    #[test]
    fn constant_feature_flagged_not_excluded() {
        let (mut x, y) = constructed();
        x.column_mut(0).fill(3.0);
        let t = target_from_labels(y.view()).unwrap();
        let bank = build_bank(x.view(), &t, &[1.0]).unwrap();
        assert_eq!(bank.constant_features(), vec![0]);
        let ones = GramMatrix::square(Array2::ones((40, 40))).unwrap();
        assert!((bank.scores()[0] - kta(&ones, &t).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn pair_weights_proportional_and_orthogonal() {
        let x = array![[0.0], [0.4], [1.3], [2.0]];
        let ka = rbf_gram(x.view(), 1.0).unwrap();
        let t = target_from_labels(array![1.0, 1.0, -1.0, -1.0].view()).unwrap();
        let w = two_kernel_weights(&ka, &ka, &t).unwrap();
        assert_eq!((w.mu_a, w.mu_b), (1.0, 0.0));
        assert!(w.proportional);
        assert!((w.kta - kta(&ka, &t).unwrap()).abs() < 1e-15);

        // K_a = T, K_b PSD with <K_b, T> = 0
        let t2 = GramMatrix::square(array![[1.0, 0.0], [0.0, 0.0]]).unwrap();
        let kb = GramMatrix::square(array![[0.0, 0.0], [0.0, 1.0]]).unwrap();
        let w = two_kernel_weights(&t2, &kb, &t2).unwrap();
        assert_eq!((w.mu_a, w.mu_b), (1.0, 0.0));
        assert!((w.kta - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pair_weights_match_grid_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let xa = Array2::from_shape_fn((12, 2), |_| rng.random_range(-1.0..1.0));
            let xb = Array2::from_shape_fn((12, 3), |_| rng.random_range(-1.0..1.0));
            let ka = rbf_gram(xa.view(), rng.random_range(0.1..3.0)).unwrap();
            let kb = rbf_gram(xb.view(), rng.random_range(0.1..3.0)).unwrap();
            let y = Array1::from_iter((0..12).map(|i| if i % 3 == 0 { 1.0 } else { -1.0 }));
            let t = target_from_labels(y.view()).unwrap();
            let w = two_kernel_weights(&ka, &kb, &t).unwrap();
            let mut grid_best = f64::NEG_INFINITY;
            for s in 0..=1000 {
                let a = s as f64 / 1000.0;
                let k = ka.linear_combination(a, &kb, 1.0 - a).unwrap();
                grid_best = grid_best.max(kta(&k, &t).unwrap());
            }
            assert!(w.kta >= grid_best - 1e-6, "{} vs {}", w.kta, grid_best);
            assert!((w.mu_a + w.mu_b - 1.0).abs() < 1e-12);
            let k = ka.linear_combination(w.mu_a, &kb, w.mu_b).unwrap();
            assert!((kta(&k, &t).unwrap() - w.kta).abs() < 1e-10);
        }
    }

    #[test]
    fn greedy_picks_label_feature_first() {
        let (x, y) = constructed();
        let t = target_from_labels(y.view()).unwrap();
        let bank = build_bank(x.view(), &t, &[0.01, 0.1, 1.0, 10.0]).unwrap();
        let sol = greedy_select(&bank, &t, 3, DEFAULT_MIN_GAIN).unwrap();
        assert_eq!(sol.selected[0], 2);
        let one = greedy_select(&bank, &t, 5, f64::INFINITY).unwrap();
        assert_eq!(one.selected, vec![2]);
        assert_eq!(one.weights, vec![1.0]);
    }

    #[test]
    fn greedy_invariants_on_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let x = Array2::from_shape_fn((30, 12), |_| rng.random_range(-2.0..2.0));
        let y = Array1::from_iter((0..30).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }));
        let t = target_from_labels(y.view()).unwrap();
        let bank = build_bank(x.view(), &t, &[0.1, 1.0]).unwrap();
        let sol = greedy_select(&bank, &t, 6, 0.0).unwrap();
        assert!(sol.len() <= 6);
        assert!(sol.kta_trace.windows(2).all(|w| w[1] >= w[0]));
        assert!(sol.weights.iter().all(|&w| w > 0.0));
        assert!((sol.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // the trace matches an explicit recomputation
        let k = compose_gram(&sol, x.view()).unwrap();
        assert!((kta(&k, &t).unwrap() - sol.final_kta()).abs() < 1e-10);
        // truncation equals a shorter run
        for p in 1..=sol.len() {
            let short = greedy_select(&bank, &t, p, 0.0).unwrap();
            assert_eq!(short, sol.truncate(p));
        }
    }

    #[test]
    fn lazy_and_cached_banks_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = Array2::from_shape_fn((16, 6), |_| rng.random_range(-2.0..2.0));
        let y = Array1::from_iter((0..16).map(|i| if i < 8 { 1.0 } else { -1.0 }));
        let t = target_from_labels(y.view()).unwrap();
        let cached = build_bank(x.view(), &t, &[0.3, 1.0]).unwrap();
        let mut lazy = cached.clone();
        if let Source::Features { cache, .. } = &mut lazy.source {
            *cache = None;
        }
        assert_eq!(
            greedy_select(&cached, &t, 4, 0.0).unwrap(),
            greedy_select(&lazy, &t, 4, 0.0).unwrap()
        );
    }

    #[test]
    fn compose_matches_naive_and_feature_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = Array2::from_shape_fn((5, 6), |_| rng.random_range(-1.0..1.0));
        let b = Array2::from_shape_fn((4, 6), |_| rng.random_range(-1.0..1.0));
        let sol = MklSolution {
            selected: vec![4, 1, 3],
            weights: vec![0.5, 0.3, 0.2],
            gammas: vec![0.7, 2.0, 0.1],
            kta_trace: vec![0.1, 0.2, 0.3],
            target_delta: None,
            steps: vec![],
        };
        let k = compose_kernel(&sol, a.view(), b.view()).unwrap();
        for i in 0..5 {
            for j in 0..4 {
                let mut s = 0.0;
                for t in 0..3 {
                    let f = sol.selected[t];
                    s += sol.weights[t] * (-sol.gammas[t] * (a[[i, f]] - b[[j, f]]).powi(2)).exp();
                }
                assert!((k.entries()[[i, j]] - s).abs() < 1e-12);
            }
        }
        let single = MklSolution {
            selected: vec![2],
            weights: vec![1.0],
            gammas: vec![0.4],
            ..sol.clone()
        };
        let k1 = compose_gram(&single, a.view()).unwrap();
        let direct = rbf_gram(a.select(Axis(1), &[2]).view(), 0.4).unwrap();
        for (p, q) in k1.entries().iter().zip(direct.entries().iter()) {
            assert!((p - q).abs() < 1e-15);
        }
        let mut dup = a.clone();
        let c = dup.column(0).to_owned();
        dup.column_mut(5).assign(&c);
        let two = MklSolution {
            selected: vec![0, 5],
            weights: vec![0.5, 0.5],
            gammas: vec![0.4, 0.4],
            ..sol.clone()
        };
        let k2 = compose_gram(&two, dup.view()).unwrap();
        let k0 = rbf_gram(dup.select(Axis(1), &[0]).view(), 0.4).unwrap();
        for (p, q) in k2.entries().iter().zip(k0.entries().iter()) {
            assert!((p - q).abs() < 1e-15);
        }
        assert!(k2.is_psd());
        let narrow = Array2::zeros((3, 2));
        assert!(matches!(compose_kernel(&sol, narrow.view(), b.view()), Err(Error::Data(_))));
    }

    #[test]
    fn precomputed_bank_scale_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let y = Array1::from_iter((0..14).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }));
        let t = target_from_labels(y.view()).unwrap();
        let kernels: Vec<GramMatrix> = (0..7)
            .map(|_| {
                let x = Array2::from_shape_fn((14, 2), |_| rng.random_range(-1.0..1.0));
                rbf_gram(x.view(), 1.0).unwrap()
            })
            .collect();
        let scaled: Vec<GramMatrix> = kernels.iter().map(|k| k.scaled(3.5)).collect();
        let b1 = FeatureKernelBank::from_kernels(&kernels, &t, vec![1.0; 7]).unwrap();
        let b2 = FeatureKernelBank::from_kernels(&scaled, &t, vec![1.0; 7]).unwrap();
        let s1 = greedy_select(&b1, &t, 4, 0.0).unwrap();
        let s2 = greedy_select(&b2, &t, 4, 0.0).unwrap();
        assert_eq!(s1.selected, s2.selected);
        for (a, b) in s1.kta_trace.iter().zip(&s2.kta_trace) {
            assert!((a - b).abs() < 1e-12);
        }
        let _ = kernel::alignment;
    }

    #[test]
    fn greedy_rejects_bad_arguments() {
        let (x, y) = constructed();
        let t = target_from_labels(y.view()).unwrap();
        let bank = build_bank(x.view(), &t, &[1.0]).unwrap();
        assert!(greedy_select(&bank, &t, 0, 0.0).is_err());
        assert!(greedy_select(&bank, &t, 2, -1.0).is_err());
    }
}
