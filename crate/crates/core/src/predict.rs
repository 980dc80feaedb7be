//! Context models for DCT coefficients: least-squares linear prediction of
//! centers μ and widths σ, in-block zigzag width models, between-block
//! boundary models from 1-D DCT features, CCA-reduced width predictors,
//! and the evaluation metrics behind them.
//!
//! σ models regress absolute residues on absolute-value features with
//! nonnegative feature weights (projected least squares), so a predicted
//! width can never be driven negative; evaluation additionally clamps at
//! [`SIGMA_MIN`].

use crate::epd::{epd_mle, KappaPolicy, MuPolicy};
use crate::transform::{pos_index, zigzag, Block, BLOCK_LEN};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Width floor applied whenever a σ model is evaluated.
pub const SIGMA_MIN: f64 = 1e-4;

/// Ridge scale for normal equations: λ_r = RIDGE_SCALE × trace(XᵀX)/dim.
const RIDGE_SCALE: f64 = 1e-6;

/// Ridge scale for the CCA covariances; kept much smaller so canonical
/// correlations stay affine-invariant well below 1e-8.
const CCA_RIDGE_SCALE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum PredictError {
    #[error("need at least {need} rows, got {got}")]
    TooFewRows { need: usize, got: usize },
    #[error("normal equations are rank-deficient even after ridge regularization")]
    RankDeficient,
    #[error("feature vector length {got} does not match the model schema {expected}")]
    SchemaMismatch { expected: usize, got: usize },
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("scan window must be at least 100 pairs, got {0}")]
    WindowTooSmall(usize),
    #[error("sample sets must have equal length, got {0} and {1}")]
    SampleMismatch(usize, usize),
}

/// Which distribution parameter a linear model predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Mu,
    Sigma,
}

/// Affine predictor over a fixed-length feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub target: Target,
}

impl LinearModel {
    pub fn constant(value: f64, target: Target, dim: usize) -> Self {
        Self { weights: vec![0.0; dim], intercept: value, target }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Raw affine evaluation (no clamping).
    pub fn eval(&self, features: &[f64]) -> Result<f64, PredictError> {
        if features.len() != self.weights.len() {
            return Err(PredictError::SchemaMismatch { expected: self.weights.len(), got: features.len() });
        }
        Ok(self.intercept + self.weights.iter().zip(features).map(|(w, f)| w * f).sum::<f64>())
    }
}

/// Evaluate a (μ, σ) model pair on its contexts; σ is floored at
/// [`SIGMA_MIN`].
pub fn predict_parameters(
    mu_model: &LinearModel,
    sigma_model: &LinearModel,
    mu_context: &[f64],
    sigma_context: &[f64],
) -> Result<(f64, f64), PredictError> {
    let mu = mu_model.eval(mu_context)?;
    let sigma = sigma_model.eval(sigma_context)?.max(SIGMA_MIN);
    Ok((mu, sigma))
}

// ---------------------------------------------------------------------------
// Least squares
// ---------------------------------------------------------------------------

/// Accumulated normal equations for one feature schema and many targets.
/// The intercept occupies slot 0 of the augmented feature vector.
#[derive(Debug, Clone)]
pub struct GramSystem {
    dim: usize, // featues + 1
    n_targets: usize,
    rows: usize,
    xtx: DMatrix<f64>,
    xty: DMatrix<f64>,
}

impl GramSystem {
    pub fn new(n_features: usize, n_targets: usize) -> Self {
        let dim = n_features + 1;
        Self { dim, n_targets, rows: 0, xtx: DMatrix::zeros(dim, dim), xty: DMatrix::zeros(dim, n_targets) }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn add(&mut self, features: &[f64], targets: &[f64]) {
        debug_assert_eq!(features.len() + 1, self.dim);
        debug_assert_eq!(targets.len(), self.n_targets);
        let mut v = Vec::with_capacity(self.dim);
        v.push(1.0);
        v.extend_from_slice(features);
        for i in 0..self.dim {
            for j in i..self.dim {
                let add = v[i] * v[j];
                self.xtx[(i, j)] += add;
                if i != j {
                    self.xtx[(j, i)] += add;
                }
            }
            for (t, &y) in targets.iter().enumerate() {
                self.xty[(i, t)] += v[i] * y;
            }
        }
        self.rows += 1;
    }

    /// Solve for one target on a subset of feature columns (0-based feature
    /// indices; the intercept is always included). Returns (weights over
    /// the subset, intercept).
    pub fn solve_subset(&self, target: usize, features: &[usize]) -> Result<(Vec<f64>, f64), PredictError> {
        let k = features.len() + 1;
        if self.rows < k {
            return Err(PredictError::TooFewRows { need: k, got: self.rows });
        }
        let idx: Vec<usize> = std::iter::once(0).chain(features.iter().map(|&f| f + 1)).collect();
        let mut a = DMatrix::zeros(k, k);
        let mut b = DVector::zeros(k);
        for (r, &ir) in idx.iter().enumerate() {
            for (c, &ic) in idx.iter().enumerate() {
                a[(r, c)] = self.xtx[(ir, ic)];
            }
            b[r] = self.xty[(ir, target)];
        }
        let trace: f64 = (0..k).map(|i| a[(i, i)]).sum();
        if trace <= 0.0 {
            return Err(PredictError::RankDeficient);
        }
        let ridge = RIDGE_SCALE * trace / k as f64;
        for i in 0..k {
            a[(i, i)] += ridge;
        }
        let chol = a.cholesky().ok_or(PredictError::RankDeficient)?;
        let sol = chol.solve(&b);
        Ok((sol.as_slice()[1..].to_vec(), sol[0]))
    }

    /// Nonnegative feature weights by projected least squares: solve, clip
    /// negative weights out of the active set, refit the rest.
    pub fn solve_subset_nonneg(&self, target: usize, features: &[usize]) -> Result<(Vec<f64>, f64), PredictError> {
        let mut active: Vec<usize> = features.to_vec();
        loop {
            let (w, b) = self.solve_subset(target, &active)?;
            let keep: Vec<usize> = active
                .iter()
                .zip(w.iter())
                .filter(|(_, &wi)| wi >= 0.0)
                .map(|(&f, _)| f)
                .collect();
            if keep.len() == active.len() {
                // scatter back into the full feature slots
                let mut full = vec![0.0; features.len()];
                for (f, wi) in active.iter().zip(w.iter()) {
                    let slot = features.iter().position(|x| x == f).unwrap();
                    full[slot] = *wi;
                }
                return Ok((full, b));
            }
            active = keep;
            if active.is_empty() {
                let (_, b) = self.solve_subset(target, &[])?;
                return Ok((vec![0.0; features.len()], b));
            }
        }
    }
}

/// Plain ridge least squares over explicit rows.
pub fn fit_least_squares(rows: &[Vec<f64>], targets: &[f64], target_kind: Target) -> Result<LinearModel, PredictError> {
    let n_features = rows.first().map_or(0, |r| r.len());
    if rows.len() < n_features + 1 || rows.len() != targets.len() {
        return Err(PredictError::TooFewRows { need: n_features + 1, got: rows.len().min(targets.len()) });
    }
    let mut g = GramSystem::new(n_features, 1);
    for (r, &t) in rows.iter().zip(targets) {
        g.add(r, &[t]);
    }
    let all: Vec<usize> = (0..n_features).collect();
    let (weights, intercept) = g.solve_subset(0, &all)?;
    Ok(LinearModel { weights, intercept, target: target_kind })
}

/// Laplace log-loss in bits/value for residues coded at predicted widths.
pub fn laplace_log_loss(residues: &[f64], sigmas: &[f64]) -> f64 {
    debug_assert_eq!(residues.len(), sigmas.len());
    let mut acc = 0.0;
    for (r, s) in residues.iter().zip(sigmas) {
        let s = s.max(SIGMA_MIN);
        acc += (2.0 * s).log2() + r.abs() / s * LOG2_E;
    }
    acc / residues.len() as f64
}

/// Bits saved by an MSE reduction: lg √(mse₀/mse₁).
pub fn savings_bits(mse_baseline: f64, mse_model: f64) -> Result<f64, PredictError> {
    if mse_baseline <= 0.0 {
        return Err(PredictError::NonPositive("mse_baseline"));
    }
    if mse_model <= 0.0 {
        return Err(PredictError::NonPositive("mse_model"));
    }
    Ok(0.5 * (mse_baseline / mse_model).log2())
}

// ---------------------------------------------------------------------------
// In-block zigzag width models
// ---------------------------------------------------------------------------

/// Per-AC-position width models: |DCT_jk| regressed on the absolute values
/// of all earlier coefficients in zigzag order (position 0 has no
/// predecessors and becomes an intercept-only model).
///
/// Feature schema of model i: the absolute values of zigzag positions
/// 0..i, in order.
pub fn fit_sigma_zigzag(blocks: &[Block]) -> Result<Vec<LinearModel>, PredictError> {
    if blocks.len() < 1000 {
        return Err(PredictError::TooFewRows { need: 1000, got: blocks.len() });
    }
    let order = zigzag();
    let mut gram = GramSystem::new(63, 63);
    let mut feat = vec![0.0; 63];
    let mut targ = vec![0.0; 63];
    for block in blocks {
        for (i, &(j, k)) in order.iter().enumerate() {
            let a = block[pos_index(j, k)].abs();
            feat[i] = a;
            targ[i] = a;
        }
        gram.add(&feat, &targ);
    }
    let mut models = Vec::with_capacity(63);
    for i in 0..63 {
        let variance_proxy = gram.xtx[(i + 1, i + 1)];
        if variance_proxy <= 0.0 {
            // a coefficient that is zero on the whole corpus
            models.push(LinearModel::constant(0.0, Target::Sigma, i));
            continue;
        }
        let earlier: Vec<usize> = (0..i).collect();
        let (weights, intercept) = gram.solve_subset_nonneg(i, &earlier)?;
        models.push(LinearModel { weights, intercept, target: Target::Sigma });
    }
    Ok(models)
}

/// Evaluate zigzag width models on a corpus: mean Laplace log-loss with
/// predicted σ versus per-position constant σ, averaged over the 63 AC
/// positions.
pub fn zigzag_log_loss(blocks: &[Block], models: &[LinearModel]) -> (f64, f64) {
    let order = zigzag();
    let mut bits_pred = 0.0;
    let mut bits_const = 0.0;
    for (i, &(j, k)) in order.iter().enumerate() {
        let idx = pos_index(j, k);
        let values: Vec<f64> = blocks.iter().map(|b| b[idx]).collect();
        let const_sigma = values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64;
        let mut feat = vec![0.0; i];
        let sigmas: Vec<f64> = blocks
            .iter()
            .map(|b| {
                for (t, &(ja, ka)) in order.iter().take(i).enumerate() {
                    feat[t] = b[pos_index(ja, ka)].abs();
                }
                models[i].eval(&feat).unwrap().max(SIGMA_MIN)
            })
            .collect();
        bits_pred += laplace_log_loss(&values, &sigmas);
        bits_const += laplace_log_loss(&values, &vec![const_sigma.max(SIGMA_MIN); values.len()]);
    }
    (bits_const / 63.0, bits_pred / 63.0)
}

// ---------------------------------------------------------------------------
// Between-block boundary models
// ---------------------------------------------------------------------------

/// One training block with its decoded-neighbor context: 16 signed 1-D DCT
/// boundary features (left column, top row; zero-filled when a neighbor is
/// missing).
#[derive(Debug, Clone)]
pub struct BoundarySample {
    pub features: [f64; 16],
    pub has_context: bool,
    pub coeffs: Block,
}

/// Per-position μ and σ models over the boundary features, with a
/// constant-σ fallback for blocks without context.
#[derive(Debug, Clone)]
pub struct BoundaryModels {
    pub mu: Vec<LinearModel>,        // 64 entries, signed features
    pub sigma: Vec<LinearModel>,     // 64 entries, absolute features
    pub fallback_sigma: Vec<f64>,    // 64 entries
}

pub fn fit_boundary_models(samples: &[BoundarySample]) -> Result<BoundaryModels, PredictError> {
    let ctx: Vec<&BoundarySample> = samples.iter().filter(|s| s.has_context).collect();
    if ctx.len() < 64 {
        return Err(PredictError::TooFewRows { need: 64, got: ctx.len() });
    }

    // μ from signed features
    let mut gram_mu = GramSystem::new(16, BLOCK_LEN);
    for s in &ctx {
        gram_mu.add(&s.features, &s.coeffs);
    }
    let all: Vec<usize> = (0..16).collect();
    let mut mu = Vec::with_capacity(BLOCK_LEN);
    for pos in 0..BLOCK_LEN {
        let (weights, intercept) = gram_mu.solve_subset(pos, &all)?;
        mu.push(LinearModel { weights, intercept, target: Target::Mu });
    }

    // σ from absolute features against absolute residues
    let mut gram_sigma = GramSystem::new(16, BLOCK_LEN);
    let mut abs_feat = [0.0; 16];
    let mut abs_res = [0.0; BLOCK_LEN];
    for s in &ctx {
        for (a, f) in abs_feat.iter_mut().zip(s.features.iter()) {
            *a = f.abs();
        }
        for pos in 0..BLOCK_LEN {
            abs_res[pos] = (s.coeffs[pos] - mu[pos].eval(&s.features).unwrap()).abs();
        }
        gram_sigma.add(&abs_feat, &abs_res);
    }
    let mut sigma = Vec::with_capacity(BLOCK_LEN);
    for pos in 0..BLOCK_LEN {
        let (weights, intercept) = gram_sigma.solve_subset_nonneg(pos, &all)?;
        sigma.push(LinearModel { weights, intercept, target: Target::Sigma });
    }

    // constant fallback widths around the intercept-only center
    let mut fallback_sigma = vec![0.0; BLOCK_LEN];
    for pos in 0..BLOCK_LEN {
        let mean: f64 = samples.iter().map(|s| s.coeffs[pos]).sum::<f64>() / samples.len() as f64;
        let dev: f64 = samples.iter().map(|s| (s.coeffs[pos] - mean).abs()).sum::<f64>() / samples.len() as f64;
        fallback_sigma[pos] = dev.max(SIGMA_MIN);
    }

    Ok(BoundaryModels { mu, sigma, fallback_sigma })
}

// ---------------------------------------------------------------------------
// Canonical correlation analysis
// ---------------------------------------------------------------------------

/// Ordered canonical direction pairs with their correlations; directions
/// are unit-norm under the respective (ridge-adjusted) covariance metric.
#[derive(Debug, Clone)]
pub struct CcaResult {
    pub pairs: Vec<(Vec<f64>, Vec<f64>, f64)>,
}

/// Top-k canonical correlation pairs between two sample sets (rows are
/// observations).
pub fn cca(x: &[Vec<f64>], y: &[Vec<f64>], k: usize) -> Result<CcaResult, PredictError> {
    if x.len() != y.len() {
        return Err(PredictError::SampleMismatch(x.len(), y.len()));
    }
    let n = x.len();
    let dx = x.first().map_or(0, |r| r.len());
    let dy = y.first().map_or(0, |r| r.len());
    if n <= dx.max(dy) {
        return Err(PredictError::TooFewRows { need: dx.max(dy) + 1, got: n });
    }

    let mean = |rows: &[Vec<f64>], d: usize| -> DVector<f64> {
        let mut m = DVector::zeros(d);
        for r in rows {
            for i in 0..d {
                m[i] += r[i];
            }
        }
        m / n as f64
    };
    let mx = mean(x, dx);
    let my = mean(y, dy);

    let mut cxx = DMatrix::zeros(dx, dx);
    let mut cyy = DMatrix::zeros(dy, dy);
    let mut cxy = DMatrix::zeros(dx, dy);
    for (rx, ry) in x.iter().zip(y.iter()) {
        let vx = DVector::from_iterator(dx, rx.iter().enumerate().map(|(i, v)| v - mx[i]));
        let vy = DVector::from_iterator(dy, ry.iter().enumerate().map(|(i, v)| v - my[i]));
        cxx += &vx * vx.transpose();
        cyy += &vy * vy.transpose();
        cxy += &vx * vy.transpose();
    }
    cxx /= n as f64;
    cyy /= n as f64;
    cxy /= n as f64;
    for (c, d) in [(&mut cxx, dx), (&mut cyy, dy)] {
        let ridge = CCA_RIDGE_SCALE * c.trace() / d as f64;
        for i in 0..d {
            c[(i, i)] += ridge;
        }
    }

    // inverse square roots by symmetric eigendecomposition
    let inv_sqrt = |c: &DMatrix<f64>| -> Result<DMatrix<f64>, PredictError> {
        let eig = c.clone().symmetric_eigen();
        let mut scaled = eig.eigenvectors.clone();
        for (i, &l) in eig.eigenvalues.iter().enumerate() {
            if l <= 0.0 {
                return Err(PredictError::RankDeficient);
            }
            let s = 1.0 / l.sqrt();
            for r in 0..scaled.nrows() {
                scaled[(r, i)] *= s;
            }
        }
        Ok(&scaled * eig.eigenvectors.transpose())
    };
    let wx = inv_sqrt(&cxx)?;
    let wy = inv_sqrt(&cyy)?;

    let m = &wx * &cxy * &wy;
    let svd = m.svd(true, true);
    let u = svd.u.as_ref().ok_or(PredictError::RankDeficient)?;
    let vt = svd.v_t.as_ref().ok_or(PredictError::RankDeficient)?;

    let k = k.min(svd.singular_values.len());
    let mut pairs = Vec::with_capacity(k);
    for i in 0..k {
        let a = &wx * u.column(i);
        let b = &wy * vt.row(i).transpose();
        let corr = svd.singular_values[i].clamp(0.0, 1.0);
        pairs.push((a.as_slice().to_vec(), b.as_slice().to_vec(), corr));
    }
    Ok(CcaResult { pairs })
}

// ---------------------------------------------------------------------------
// Reduced σ predictors
// ---------------------------------------------------------------------------

/// Feature reduction mode for the cheap width predictors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaFeatureMode {
    /// One pooled noise-level feature over all 16 |1-D DCT| values.
    Vh,
    /// Separate vertical (left-column) and horizontal (top-row) features.
    VPlusH,
    /// Horizontal features only (previous row); pipeline-friendly.
    HOnly,
}

/// A reduced width predictor: nonnegative pooling direction(s) over the
/// absolute boundary features plus per-position affine maps.
#[derive(Debug, Clone)]
pub struct ReducedSigmaModel {
    pub mode: SigmaFeatureMode,
    /// 16 nonnegative pooling weights (split halves for V+H; horizontal
    /// half only for H-only, with the vertical half zeroed).
    pub direction: [f64; 16],
    /// Per-position models over the pooled features (1 or 2 of them).
    pub per_position: Vec<LinearModel>,
}

impl ReducedSigmaModel {
    /// Pooled feature(s) for one context.
    pub fn pooled(&self, abs_features: &[f64; 16]) -> Vec<f64> {
        match self.mode {
            SigmaFeatureMode::Vh => {
                vec![self.direction.iter().zip(abs_features).map(|(w, f)| w * f).sum()]
            }
            SigmaFeatureMode::VPlusH => {
                let v = (0..8).map(|i| self.direction[i] * abs_features[i]).sum();
                let h = (8..16).map(|i| self.direction[i] * abs_features[i]).sum();
                vec![v, h]
            }
            SigmaFeatureMode::HOnly => {
                vec![(8..16).map(|i| self.direction[i] * abs_features[i]).sum()]
            }
        }
    }

    /// Predicted width for one position.
    pub fn sigma_at(&self, pos: usize, abs_features: &[f64; 16]) -> f64 {
        self.per_position[pos].eval(&self.pooled(abs_features)).unwrap().max(SIGMA_MIN)
    }
}

/// Fit a reduced σ predictor. The pooling direction is the first canonical
/// direction between the absolute features and the absolute residues,
/// clipped to nonnegative weights; per-position scales are then refit by
/// projected least squares.
pub fn sigma_feature_model(
    samples: &[BoundarySample],
    boundary: &BoundaryModels,
    mode: SigmaFeatureMode,
) -> Result<ReducedSigmaModel, PredictError> {
    let ctx: Vec<&BoundarySample> = samples.iter().filter(|s| s.has_context).collect();
    if ctx.len() < 64 {
        return Err(PredictError::TooFewRows { need: 64, got: ctx.len() });
    }
    let abs_feats: Vec<Vec<f64>> = ctx.iter().map(|s| s.features.iter().map(|f| f.abs()).collect()).collect();
    let abs_res: Vec<Vec<f64>> = ctx
        .iter()
        .map(|s| {
            (0..BLOCK_LEN)
                .map(|pos| (s.coeffs[pos] - boundary.mu[pos].eval(&s.features).unwrap()).abs())
                .collect()
        })
        .collect();
    let first = cca(&abs_feats, &abs_res, 1)?;
    let raw = &first.pairs[0].0;
    // the noise-level direction must have nonnegative weights; flip the
    // sign toward the positive mean first
    let sign = if raw.iter().sum::<f64>() >= 0.0 { 1.0 } else { -1.0 };
    let mut direction = [0.0; 16];
    for (d, r) in direction.iter_mut().zip(raw.iter()) {
        *d = (sign * r).max(0.0);
    }
    let norm: f64 = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
    if norm <= 0.0 {
        return Err(PredictError::RankDeficient);
    }
    for d in direction.iter_mut() {
        *d /= norm;
    }
    if mode == SigmaFeatureMode::HOnly {
        for d in direction.iter_mut().take(8) {
            *d = 0.0;
        }
    }

    let n_pooled = if mode == SigmaFeatureMode::VPlusH { 2 } else { 1 };
    let mut gram = GramSystem::new(n_pooled, BLOCK_LEN);
    let template = ReducedSigmaModel { mode, direction, per_position: Vec::new() };
    let mut abs16 = [0.0; 16];
    for (s, res) in ctx.iter().zip(abs_res.iter()) {
        for (a, f) in abs16.iter_mut().zip(s.features.iter()) {
            *a = f.abs();
        }
        gram.add(&template.pooled(&abs16), res);
    }
    let feats: Vec<usize> = (0..n_pooled).collect();
    let mut per_position = Vec::with_capacity(BLOCK_LEN);
    for pos in 0..BLOCK_LEN {
        let (weights, intercept) = gram.solve_subset_nonneg(pos, &feats)?;
        per_position.push(LinearModel { weights, intercept, target: Target::Sigma });
    }
    Ok(ReducedSigmaModel { mode, direction, per_position })
}

// ---------------------------------------------------------------------------
// Conditional width scan
// ---------------------------------------------------------------------------

/// One window of the sliding conditional-width diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct ScanPoint {
    pub c1_mean: f64,
    pub sigma: f64,
    pub kappa: Option<f64>,
}

/// Sort (c₁, c₂) pairs by c₁ and fit the width of c₂ on overlapping
/// windows (half-window stride); optionally fit the shape too.
pub fn conditional_width_scan(
    pairs: &[(f64, f64)],
    window: usize,
    fit_kappa: bool,
) -> Result<Vec<ScanPoint>, PredictError> {
    if window < 100 {
        return Err(PredictError::WindowTooSmall(window));
    }
    if pairs.len() < window {
        return Err(PredictError::TooFewRows { need: window, got: pairs.len() });
    }
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let stride = (window / 2).max(1);
    let mut out = Vec::new();
    let mut start = 0;
    loop {
        let end = (start + window).min(sorted.len());
        let begin = end - window;
        let slice = &sorted[begin..end];
        let c1_mean = slice.iter().map(|p| p.0).sum::<f64>() / window as f64;
        let c2: Vec<f64> = slice.iter().map(|p| p.1).collect();
        let policy = if fit_kappa { KappaPolicy::Grid } else { KappaPolicy::Fixed(1.0) };
        let fit = epd_mle(&c2, MuPolicy::Fixed(0.0), policy)
            .map_err(|_| PredictError::TooFewRows { need: window, got: 0 })?;
        out.push(ScanPoint {
            c1_mean,
            sigma: fit.params.sigma(),
            kappa: fit_kappa.then(|| fit.params.kappa()),
        });
        if end == sorted.len() {
            break;
        }
        start += stride;
    }
    Ok(out)
}
