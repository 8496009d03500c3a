//! Two-phase sparse VAR estimation: LASSO selects each equation's support,
//! then ordinary least squares on that support gives coefficients and
//! standard errors.
//!
//! The LASSO objective is `(1/2n)·‖y - Xβ‖² + λ‖β‖₁` on internally
//! standardized columns (zero mean, unit population variance). Penalties are
//! therefore expressed in standardized units, and `λ ≥ max_k |x_kᵀy|/n`
//! always gives the empty model.

use log::warn;
use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, Array3, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Result, ScauError};
use crate::mapping::MappedTensor;
use crate::varfit::{LaggedDesign, CONDITION_LIMIT};

/// Supports larger than this fraction of the sample count are not fitted.
pub const MAX_SUPPORT_FRACTION: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Minimum `n·ln(RSS/n) + |S|·ln n`, with RSS from the OLS refit on `S`.
    Bic,
    /// BIC plus `2γ·ln C(k, |S|)`, which charges for the number of candidate
    /// supports of each size among `k` covariates.
    #[default]
    Ebic,
    /// Minimum mean held-out squared error over `cv_folds` folds.
    Cv,
}

fn default_n_lambda() -> usize {
    50
}
fn default_min_ratio() -> f64 {
    1e-3
}
fn default_folds() -> usize {
    5
}
fn default_gamma() -> f64 {
    1.0
}
fn default_max_iter() -> usize {
    10_000
}
fn default_tol() -> f64 {
    1e-5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoConfig {
    /// Explicit descending grid. When absent, `n_lambda` log-spaced values
    /// run from the null threshold down to `lambda_min_ratio` times it.
    #[serde(default)]
    pub lambda_grid: Option<Vec<f64>>,
    #[serde(default = "default_n_lambda")]
    pub n_lambda: usize,
    #[serde(default = "default_min_ratio")]
    pub lambda_min_ratio: f64,
    #[serde(default)]
    pub selection: Selection,
    #[serde(default = "default_folds")]
    pub cv_folds: usize,
    /// γ of the extended BIC; 0 reduces it to plain BIC.
    #[serde(default = "default_gamma")]
    pub ebic_gamma: f64,
    /// Maximum coordinate-descent sweeps per λ.
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Convergence threshold on the largest standardized coefficient
    /// change in a sweep, in units of the response standard deviation.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self {
            lambda_grid: None,
            n_lambda: default_n_lambda(),
            lambda_min_ratio: default_min_ratio(),
            selection: Selection::Ebic,
            cv_folds: default_folds(),
            ebic_gamma: default_gamma(),
            max_iter: default_max_iter(),
            tol: default_tol(),
            seed: 0,
        }
    }
}

impl LassoConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(grid) = &self.lambda_grid {
            if grid.is_empty() {
                return Err(ScauError::config("lambda grid is empty"));
            }
            if grid.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
                return Err(ScauError::config("lambda grid values must be positive"));
            }
            if grid.windows(2).any(|w| w[1] > w[0]) {
                return Err(ScauError::config("lambda grid must be descending"));
            }
        } else if self.n_lambda == 0 || !(self.lambda_min_ratio > 0.0 && self.lambda_min_ratio < 1.0) {
            return Err(ScauError::config("automatic lambda grid needs n_lambda ≥ 1 and 0 < ratio < 1"));
        }
        if !(self.tol > 0.0) {
            return Err(ScauError::config("tolerance must be positive"));
        }
        if self.max_iter == 0 {
            return Err(ScauError::config("max_iter must be positive"));
        }
        if !(self.ebic_gamma >= 0.0 && self.ebic_gamma.is_finite()) {
            return Err(ScauError::config("ebic_gamma must be a non-negative number"));
        }
        if self.selection == Selection::Cv && self.cv_folds < 2 {
            return Err(ScauError::config("cross-validation needs at least 2 folds"));
        }
        Ok(())
    }

    fn grid(&self, lambda_max: f64) -> Vec<f64> {
        if let Some(g) = &self.lambda_grid {
            return g.clone();
        }
        if lambda_max <= 0.0 {
            return vec![0.0];
        }
        let n = self.n_lambda;
        if n == 1 {
            return vec![lambda_max];
        }
        let lo = (lambda_max * self.lambda_min_ratio).ln();
        let hi = lambda_max.ln();
        (0..n)
            .map(|i| (hi + (lo - hi) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }
}

pub fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

/// A design matrix prepared for repeated LASSO solves: column statistics and
/// the standardized Gram matrix `XₛᵀXₛ/n`.
#[derive(Debug, Clone)]
pub struct LassoProblem {
    x: DMatrix<f64>,
    means: Vec<f64>,
    scales: Vec<f64>,
    gram: DMatrix<f64>,
    /// Columns with zero variance, excluded from every model.
    pub dropped: Vec<usize>,
}

/// Coefficients along a λ path, in original units.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoPath {
    pub lambdas: Vec<f64>,
    pub coefs: Vec<DVector<f64>>,
    /// Coordinate-descent sweeps used at each λ.
    pub sweeps: Vec<usize>,
    /// True when the path was cut short because the support outgrew the limit.
    pub truncated: bool,
}

impl LassoProblem {
    pub fn new(x: DMatrix<f64>) -> Result<Self> {
        let (n, k) = x.shape();
        if n == 0 {
            return Err(ScauError::data("empty design"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ScauError::data("design contains non-finite values"));
        }
        let mut means = Vec::with_capacity(k);
        let mut scales = Vec::with_capacity(k);
        let mut dropped = Vec::new();
        for j in 0..k {
            let col = x.column(j);
            let mean = col.mean();
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            let sd = var.sqrt();
            if sd <= 1e-12 * (1.0 + mean.abs()) {
                dropped.push(j);
                scales.push(0.0);
            } else {
                scales.push(sd);
            }
            means.push(mean);
        }
        if !dropped.is_empty() {
            warn!("{} zero-variance design columns dropped: {:?}", dropped.len(), dropped);
        }
        let xs = Array2::from_shape_fn((n, k), |(i, j)| {
            if scales[j] > 0.0 {
                (x[(i, j)] - means[j]) / scales[j]
            } else {
                0.0
            }
        });
        let g = xs.t().dot(&xs);
        let gram = DMatrix::from_fn(k, k, |a, b| g[[a, b]] / n as f64);
        Ok(Self {
            x,
            means,
            scales,
            gram,
            dropped,
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// `Xₛᵀ(y - ȳ)/n`.
    pub fn correlations(&self, y: &DVector<f64>) -> DVector<f64> {
        let n = self.n() as f64;
        let ym = y.mean();
        DVector::from_fn(self.k(), |j, _| {
            if self.scales[j] == 0.0 {
                return 0.0;
            }
            let col = self.x.column(j);
            col.iter()
                .zip(y.iter())
                .map(|(x, yv)| (x - self.means[j]) * (yv - ym))
                .sum::<f64>()
                / (n * self.scales[j])
        })
    }

    /// Smallest λ giving the empty model.
    pub fn lambda_max(&self, c: &DVector<f64>) -> f64 {
        c.amax()
    }

    /// Penalized objective in standardized coordinates, up to the constant `‖y‖²/2n`.
    pub fn objective(&self, c: &DVector<f64>, beta_std: &DVector<f64>, lambda: f64) -> f64 {
        0.5 * beta_std.dot(&(&self.gram * beta_std)) - c.dot(beta_std) + lambda * beta_std.lp_norm(1)
    }

    /// Cyclic coordinate descent from `beta` (standardized) at one λ.
    /// Converges when no standardized coefficient moved by more than
    /// `tol·y_sd` in a full sweep. Returns the number of sweeps; `trace`
    /// receives the objective after each sweep.
    pub fn solve(
        &self,
        c: &DVector<f64>,
        lambda: f64,
        beta: &mut DVector<f64>,
        cfg: &LassoConfig,
        y_sd: f64,
        mut trace: Option<&mut Vec<f64>>,
    ) -> usize {
        let k = self.k();
        let threshold = cfg.tol * y_sd.max(f64::MIN_POSITIVE);
        let mut q = c - &self.gram * &*beta;
        let mut sweeps = 0;
        let mut full = true;
        loop {
            let mut max_delta: f64 = 0.0;
            for j in 0..k {
                if self.scales[j] == 0.0 || (!full && beta[j] == 0.0) {
                    continue;
                }
                let gjj = self.gram[(j, j)];
                let new = soft_threshold(q[j] + gjj * beta[j], lambda) / gjj;
                let delta = new - beta[j];
                if delta != 0.0 {
                    q.axpy(-delta, &self.gram.column(j), 1.0);
                    beta[j] = new;
                    max_delta = max_delta.max(delta.abs());
                }
            }
            sweeps += 1;
            if let Some(t) = trace.as_deref_mut() {
                t.push(self.objective(c, beta, lambda));
            }
            if sweeps >= cfg.max_iter {
                break;
            }
            if max_delta < threshold {
                if full {
                    break;
                }
                full = true;
            } else {
                full = false;
            }
        }
        sweeps
    }

    fn to_original(&self, beta_std: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.k(), |j, _| {
            if self.scales[j] > 0.0 {
                beta_std[j] / self.scales[j]
            } else {
                0.0
            }
        })
    }

    /// Full warm-started path for response `y`.
    pub fn path(&self, y: &DVector<f64>, cfg: &LassoConfig) -> Result<LassoPath> {
        cfg.validate()?;
        if y.len() != self.n() {
            return Err(ScauError::data("response length does not match design rows"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(ScauError::data("response contains non-finite values"));
        }
        let c = self.correlations(y);
        let ym = y.mean();
        let y_sd = (y.iter().map(|v| (v - ym).powi(2)).sum::<f64>() / self.n() as f64).sqrt();
        let lambdas = cfg.grid(self.lambda_max(&c));
        let limit = (self.n() as f64 * MAX_SUPPORT_FRACTION).floor() as usize;
        let mut beta = DVector::zeros(self.k());
        let mut path = LassoPath {
            lambdas: Vec::new(),
            coefs: Vec::new(),
            sweeps: Vec::new(),
            truncated: false,
        };
        for &lambda in &lambdas {
            let sweeps = self.solve(&c, lambda, &mut beta, cfg, y_sd, None);
            let support = beta.iter().filter(|v| **v != 0.0).count();
            if support > limit && !path.lambdas.is_empty() {
                path.truncated = true;
                break;
            }
            path.lambdas.push(lambda);
            path.coefs.push(self.to_original(&beta));
            path.sweeps.push(sweeps);
            if support > limit {
                path.truncated = true;
                break;
            }
        }
        Ok(path)
    }

    /// Residual sum of squares of the centered OLS refit on `support`.
    fn refit_rss(&self, c: &DVector<f64>, yss: f64, support: &[usize]) -> f64 {
        if support.is_empty() {
            return yss;
        }
        let g = DMatrix::from_fn(support.len(), support.len(), |a, b| self.gram[(support[a], support[b])]);
        let cs = DVector::from_fn(support.len(), |a, _| c[support[a]]);
        match g.cholesky() {
            Some(ch) => {
                let b = ch.solve(&cs);
                (yss - self.n() as f64 * cs.dot(&b)).max(0.0)
            }
            None => f64::INFINITY,
        }
    }
}

pub fn support_of(beta: &DVector<f64>) -> Vec<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(j, _)| j)
        .collect()
}

/// Convenience wrapper: prepare `x` and compute the path for `y`.
pub fn lasso_path(x: &DMatrix<f64>, y: &DVector<f64>, cfg: &LassoConfig) -> Result<LassoPath> {
    LassoProblem::new(x.clone())?.path(y, cfg)
}

/// Outcome of support selection for one equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Selected {
    pub lambda: f64,
    pub support: Vec<usize>,
    pub score: f64,
}

/// Picks a λ on the path for response `y` by the configured criterion.
pub fn select(problem: &LassoProblem, y: &DVector<f64>, cfg: &LassoConfig) -> Result<Selected> {
    let path = problem.path(y, cfg)?;
    let limit = (problem.n() as f64 * MAX_SUPPORT_FRACTION).floor() as usize;
    let chosen = match cfg.selection {
        Selection::Bic => select_bic(problem, y, &path, 0.0),
        Selection::Ebic => select_bic(problem, y, &path, cfg.ebic_gamma),
        Selection::Cv => select_cv(problem, y, &path, cfg)?,
    };
    if chosen.support.len() > limit {
        return Err(ScauError::numeric(format!(
            "selected support of {} covariates exceeds n/3 = {limit}; use a larger lambda or more data",
            chosen.support.len()
        )));
    }
    Ok(chosen)
}

fn select_bic(problem: &LassoProblem, y: &DVector<f64>, path: &LassoPath, gamma: f64) -> Selected {
    let n = problem.n() as f64;
    let k = problem.k() as u64;
    let c = problem.correlations(y);
    let ym = y.mean();
    let yss: f64 = y.iter().map(|v| (v - ym).powi(2)).sum();
    // Rounding at λ_max can leave one coefficient barely nonzero, so the
    // empty model is scored explicitly.
    let lambda_max = path.lambdas.first().copied().unwrap_or(f64::INFINITY);
    let mut best = Selected {
        lambda: lambda_max,
        support: Vec::new(),
        score: n * (yss.max(f64::MIN_POSITIVE) / n).ln(),
    };
    let mut last_support: Option<Vec<usize>> = None;
    let mut last_rss = 0.0;
    for (lambda, beta) in path.lambdas.iter().zip(&path.coefs) {
        let support = support_of(beta);
        if last_support.as_ref() != Some(&support) {
            last_rss = problem.refit_rss(&c, yss, &support);
            last_support = Some(support.clone());
        }
        let s = support.len();
        let mut score = n * (last_rss.max(f64::MIN_POSITIVE) / n).ln() + s as f64 * n.ln();
        if gamma > 0.0 {
            score += 2.0 * gamma * ln_binomial(k, s as u64);
        }
        if score < best.score {
            best = Selected {
                lambda: *lambda,
                support,
                score,
            };
        }
    }
    best
}

fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).map(|i| i % folds).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

fn select_cv(problem: &LassoProblem, y: &DVector<f64>, path: &LassoPath, cfg: &LassoConfig) -> Result<Selected> {
    let n = problem.n();
    let folds = fold_assignment(n, cfg.cv_folds, cfg.seed);
    let fixed = LassoConfig {
        lambda_grid: Some(path.lambdas.clone()),
        ..cfg.clone()
    };
    let mut err = vec![0.0; path.lambdas.len()];
    for f in 0..cfg.cv_folds {
        let train: Vec<usize> = (0..n).filter(|&i| folds[i] != f).collect();
        let test: Vec<usize> = (0..n).filter(|&i| folds[i] == f).collect();
        let xt = problem.x.select_rows(&train);
        let yt = DVector::from_iterator(train.len(), train.iter().map(|&i| y[i]));
        let sub = LassoProblem::new(xt)?;
        let sub_path = sub.path(&yt, &fixed)?;
        let ym = yt.mean();
        for (l, beta) in sub_path.coefs.iter().enumerate() {
            let offset = ym - (0..sub.k()).map(|j| sub.means[j] * beta[j]).sum::<f64>();
            for &i in &test {
                let pred = offset + problem.x.row(i).transpose().dot(beta);
                err[l] += (y[i] - pred).powi(2);
            }
        }
        for e in err.iter_mut().skip(sub_path.coefs.len()) {
            *e = f64::INFINITY;
        }
    }
    let (best, score) = err
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, e)| (i, *e / n as f64))
        .unwrap_or((0, f64::INFINITY));
    Ok(Selected {
        lambda: path.lambdas[best],
        support: support_of(&path.coefs[best]),
        score,
    })
}

/// OLS on the selected columns of a centered design.
#[derive(Debug, Clone)]
pub struct Refit {
    pub coef: Vec<f64>,
    pub std_err: Vec<f64>,
    pub residuals: DVector<f64>,
    pub rss: f64,
}

pub fn refit(x: &DMatrix<f64>, y: &DVector<f64>, support: &[usize]) -> Result<Refit> {
    let n = x.nrows();
    if support.is_empty() {
        let rss = y.norm_squared();
        return Ok(Refit {
            coef: Vec::new(),
            std_err: Vec::new(),
            residuals: y.clone(),
            rss,
        });
    }
    let xs = x.select_columns(support);
    let xtx = xs.tr_mul(&xs);
    let cond = crate::varfit::condition_number(&xtx);
    if !(cond < CONDITION_LIMIT) {
        return Err(ScauError::Singular {
            condition: cond,
            threshold: CONDITION_LIMIT,
        });
    }
    let ch = xtx.cholesky().ok_or(ScauError::Singular {
        condition: cond,
        threshold: CONDITION_LIMIT,
    })?;
    let coef = ch.solve(&xs.tr_mul(y));
    let residuals = y - &xs * &coef;
    let rss = residuals.norm_squared();
    let dof = n.saturating_sub(support.len()).max(1) as f64;
    let inv = ch.inverse();
    let s2 = rss / dof;
    Ok(Refit {
        coef: coef.iter().copied().collect(),
        std_err: (0..support.len()).map(|a| (s2 * inv[(a, a)]).max(0.0).sqrt()).collect(),
        residuals,
        rss,
    })
}

/// Sparse VAR over (channel, band) nodes. Node `i·|bands| + ψ` is band `ψ` of
/// channel `i`; tensors are indexed `[lag - 1, target node, source node]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ScauFitJson", try_from = "ScauFitJson")]
pub struct ScauFit {
    pub p: usize,
    pub channel_labels: Vec<String>,
    pub band_labels: Vec<String>,
    pub phi: Array3<f64>,
    pub support: Array3<bool>,
    pub std_err: Array3<f64>,
    pub sigma: Array2<f64>,
    /// Selected λ per target node (standardized units).
    pub lambda_used: Vec<f64>,
    pub n_used: usize,
}

impl ScauFit {
    pub fn m(&self) -> usize {
        self.channel_labels.len()
    }

    pub fn n_bands(&self) -> usize {
        self.band_labels.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.m() * self.n_bands()
    }

    pub fn node(&self, channel: usize, band: usize) -> usize {
        channel * self.n_bands() + band
    }

    pub fn node_labels(&self) -> Vec<String> {
        self.channel_labels
            .iter()
            .flat_map(|c| self.band_labels.iter().map(move |b| format!("{c}:{b}")))
            .collect()
    }

    /// Coefficient count of the dense model, `|Ψ|²·p·m²`.
    pub fn dimensionality(&self) -> usize {
        self.n_nodes() * self.n_nodes() * self.p
    }

    pub fn support_size(&self) -> usize {
        self.support.iter().filter(|s| **s).count()
    }

    pub fn support_density(&self) -> f64 {
        let d = self.dimensionality();
        if d == 0 {
            0.0
        } else {
            self.support_size() as f64 / d as f64
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| ScauError::numeric(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| ScauError::data(format!("invalid SCAU fit JSON: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScauEntry {
    i: usize,
    psi_a: usize,
    j: usize,
    psi_b: usize,
    lag: usize,
    value: f64,
    se: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScauFitJson {
    p: usize,
    channels: Vec<String>,
    bands: Vec<String>,
    n_used: usize,
    support_density: f64,
    lambda_used: Vec<f64>,
    sigma: Array2<f64>,
    entries: Vec<ScauEntry>,
}

impl From<ScauFit> for ScauFitJson {
    fn from(f: ScauFit) -> Self {
        let nb = f.n_bands();
        let entries = f
            .support
            .indexed_iter()
            .filter(|(_, s)| **s)
            .map(|((l, t, s), _)| ScauEntry {
                i: t / nb,
                psi_a: t % nb,
                j: s / nb,
                psi_b: s % nb,
                lag: l + 1,
                value: f.phi[[l, t, s]],
                se: f.std_err[[l, t, s]],
            })
            .collect();
        Self {
            p: f.p,
            support_density: f.support_density(),
            channels: f.channel_labels,
            bands: f.band_labels,
            n_used: f.n_used,
            lambda_used: f.lambda_used,
            sigma: f.sigma,
            entries,
        }
    }
}

impl TryFrom<ScauFitJson> for ScauFit {
    type Error = String;

    fn try_from(j: ScauFitJson) -> std::result::Result<Self, String> {
        let nb = j.bands.len();
        let k = j.channels.len() * nb;
        if j.sigma.dim() != (k, k) {
            return Err(format!("sigma must be {k}×{k}"));
        }
        let mut phi = Array3::zeros((j.p, k, k));
        let mut se = Array3::zeros((j.p, k, k));
        let mut support = Array3::from_elem((j.p, k, k), false);
        for e in &j.entries {
            if e.lag == 0 || e.lag > j.p || e.i * nb + e.psi_a >= k || e.j * nb + e.psi_b >= k || e.psi_a >= nb || e.psi_b >= nb {
                return Err(format!("entry out of range: {e:?}"));
            }
            let idx = [e.lag - 1, e.i * nb + e.psi_a, e.j * nb + e.psi_b];
            phi[idx] = e.value;
            se[idx] = e.se;
            support[idx] = true;
        }
        Ok(Self {
            p: j.p,
            channel_labels: j.channels,
            band_labels: j.bands,
            phi,
            support,
            std_err: se,
            sigma: j.sigma,
            lambda_used: j.lambda_used,
            n_used: j.n_used,
        })
    }
}

/// Fits the sparse model to a mapped tensor.
pub fn fit_scau(z: &MappedTensor, p: usize, cfg: &LassoConfig) -> Result<ScauFit> {
    let flat = z.to_frame()?;
    fit_scau_array(
        flat.data().view(),
        z.channel_labels.clone(),
        z.band_labels.clone(),
        p,
        cfg,
    )
}

/// Fits the sparse model to a `(channels·bands) × n` array of node series.
pub fn fit_scau_array(
    data: ArrayView2<'_, f64>,
    channel_labels: Vec<String>,
    band_labels: Vec<String>,
    p: usize,
    cfg: &LassoConfig,
) -> Result<ScauFit> {
    cfg.validate()?;
    let k = channel_labels.len() * band_labels.len();
    let (rows, n) = data.dim();
    if rows != k {
        return Err(ScauError::data(format!(
            "{rows} node series for {} channels × {} bands",
            channel_labels.len(),
            band_labels.len()
        )));
    }
    if let Some(((i, t), _)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(ScauError::NonFinite {
            channel: format!("node {i}"),
            index: t,
        });
    }
    if n <= p + 10 {
        return Err(ScauError::data(format!("{n} samples too few for order {p}")));
    }
    let means: Vec<f64> = data.rows().into_iter().map(|r| r.mean().unwrap_or(0.0)).collect();
    let centered = Array2::from_shape_fn((k, n), |(i, t)| data[[i, t]] - means[i]);
    let design = LaggedDesign::new(centered.view(), p)?;
    let problem = LassoProblem::new(design.x.clone())?;
    let equations: Vec<(Selected, Refit)> = (0..k)
        .into_par_iter()
        .map(|t| {
            let y = design.y.column(t).into_owned();
            let sel = select(&problem, &y, cfg)?;
            let fit = refit(&design.x, &y, &sel.support)?;
            Ok((sel, fit))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut phi = Array3::zeros((p, k, k));
    let mut se = Array3::zeros((p, k, k));
    let mut support = Array3::from_elem((p, k, k), false);
    let mut max_support = 0;
    for (t, (sel, fit)) in equations.iter().enumerate() {
        max_support = max_support.max(sel.support.len());
        for (a, &col) in sel.support.iter().enumerate() {
            let (l, s) = (col / k, col % k);
            phi[[l, t, s]] = fit.coef[a];
            se[[l, t, s]] = fit.std_err[a];
            support[[l, t, s]] = true;
        }
    }
    let n_used = design.rows();
    let dof = n_used.saturating_sub(max_support).max(1) as f64;
    let sigma = Array2::from_shape_fn((k, k), |(a, b)| {
        equations[a].1.residuals.dot(&equations[b].1.residuals) / dof
    });
    Ok(ScauFit {
        p,
        channel_labels,
        band_labels,
        phi,
        support,
        std_err: se,
        sigma,
        lambda_used: equations.iter().map(|(s, _)| s.lambda).collect(),
        n_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    fn random_design(n: usize, k: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, k, |_, _| StandardNormal.sample(&mut rng))
    }

    /// Columns of a scaled Hadamard-like ±1 matrix: centered, orthogonal, unit variance.
    fn orthonormal_design(n: usize, k: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, k, |i, j| {
            let block = n >> (j + 1);
            if (i / block) % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
    }

    #[test]
    fn zero_response_gives_zero_path() {
        let x = random_design(100, 5, 1);
        let path = lasso_path(&x, &DVector::zeros(100), &LassoConfig::default()).unwrap();
        assert!(path.coefs.iter().all(|b| b.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn orthonormal_design_matches_soft_threshold() {
        let (n, k) = (64, 4);
        let x = orthonormal_design(n, k);
        let xty_true = [0.9, -0.5, 0.2, 0.05];
        let y = &x * DVector::from_column_slice(&xty_true);
        let grid = vec![0.6, 0.3, 0.1, 0.01];
        let cfg = LassoConfig {
            lambda_grid: Some(grid.clone()),
            ..LassoConfig::default()
        };
        let path = lasso_path(&x, &y, &cfg).unwrap();
        for (l, beta) in grid.iter().zip(&path.coefs) {
            for j in 0..k {
                let xty: f64 = x.column(j).dot(&y) / n as f64;
                assert!((beta[j] - soft_threshold(xty, *l)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn null_threshold_gives_empty_model() {
        let x = random_design(200, 6, 2);
        let y = DVector::from_fn(200, |i, _| x[(i, 0)] * 2.0 + x[(i, 3)]);
        let problem = LassoProblem::new(x).unwrap();
        let c = problem.correlations(&y);
        let mut beta = DVector::zeros(6);
        problem.solve(&c, problem.lambda_max(&c) * 1.0001, &mut beta, &LassoConfig::default(), 1.0, None);
        assert!(beta.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn zero_variance_column_is_dropped() {
        let mut x = random_design(100, 3, 3);
        x.column_mut(1).fill(2.5);
        let y = x.column(0).into_owned();
        let problem = LassoProblem::new(x.clone()).unwrap();
        assert_eq!(problem.dropped, vec![1]);
        let path = problem.path(&y, &LassoConfig::default()).unwrap();
        assert!(path.coefs.iter().all(|b| b[1] == 0.0));
    }

    #[test]
    fn refit_matches_plain_least_squares() {
        let x = random_design(150, 5, 4);
        let y = DVector::from_fn(150, |i, _| 0.7 * x[(i, 1)] - 0.4 * x[(i, 4)] + 0.1 * x[(i, 2)]);
        let r = refit(&x, &y, &[1, 4]).unwrap();
        let xs = x.select_columns(&[1, 4]);
        let direct = (xs.transpose() * &xs).try_inverse().unwrap() * xs.transpose() * &y;
        assert!((r.coef[0] - direct[0]).abs() < 1e-10);
        assert!((r.coef[1] - direct[1]).abs() < 1e-10);
    }

    #[test]
    fn invalid_configs() {
        let bad = |c: LassoConfig| assert!(c.validate().is_err());
        bad(LassoConfig { lambda_grid: Some(vec![]), ..Default::default() });
        bad(LassoConfig { lambda_grid: Some(vec![0.1, 0.2]), ..Default::default() });
        bad(LassoConfig { tol: 0.0, ..Default::default() });
    }

    #[test]
    fn sparse_fit_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 400;
        let mut data = Array2::<f64>::zeros((4, n));
        for t in 0..n {
            for i in 0..4 {
                data[[i, t]] = StandardNormal.sample(&mut rng);
            }
            if t > 0 {
                data[[1, t]] += 0.6 * data[[0, t - 1]];
            }
        }
        let fit = fit_scau_array(
            data.view(),
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into()],
            2,
            &LassoConfig::default(),
        )
        .unwrap();
        assert!(fit.support[[0, 1, 0]]);
        assert_eq!(fit.dimensionality(), 4 * 4 * 2);
        let back = ScauFit::from_json(&fit.to_json().unwrap()).unwrap();
        assert_eq!(back, fit);
        for ((l, t, s), on) in fit.support.indexed_iter() {
            if !on {
                assert_eq!(fit.phi[[l, t, s]], 0.0);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn kkt_and_monotone_objective(seed in 0u64..1000, frac in 0.05f64..0.9) {
            let x = random_design(120, 8, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 7);
            let y = DVector::from_fn(120, |i, _| {
                let e: f64 = StandardNormal.sample(&mut rng);
                x[(i, 0)] - 0.5 * x[(i, 5)] + e
            });
            let problem = LassoProblem::new(x.clone()).unwrap();
            let c = problem.correlations(&y);
            let lambda = frac * problem.lambda_max(&c);
            let cfg = LassoConfig { tol: 1e-11, ..Default::default() };
            let mut beta = DVector::zeros(8);
            let mut trace = Vec::new();
            problem.solve(&c, lambda, &mut beta, &cfg, 1.0, Some(&mut trace));
            for w in trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12);
            }
            let grad = &c - problem.gram() * &beta;
            let tol = 1e-8;
            for j in 0..8 {
                if beta[j] == 0.0 {
                    prop_assert!(grad[j].abs() <= lambda + tol);
                } else {
                    prop_assert!((grad[j] - lambda * beta[j].signum()).abs() <= tol);
                }
            }
            let support = support_of(&beta);
            let centered = DMatrix::from_fn(120, 8, |i, j| x[(i, j)] - x.column(j).mean());
            let yc = y.add_scalar(-y.mean());
            let lasso_fit = problem.to_original(&beta);
            let lasso_rss = (&yc - &centered * &lasso_fit).norm_squared();
            let ols = refit(&centered, &yc, &support).unwrap();
            prop_assert!(ols.rss <= lasso_rss + 1e-9);
        }
    }
}
