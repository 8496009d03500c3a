//! Least-squares VAR(p) estimation, simulation and Granger tests.
//!
//! Coefficients are stored as `phi[[l - 1, target, source]]`, so that
//! `y_t(n) = Σ_l Σ_s phi[[l - 1, t, s]] · y_s(n - l) + e_t(n)`.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, Array3, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Result, ScauError};
use crate::frame::TimeSeriesFrame;

/// Model order used for both VAR and SCAU fits unless configured otherwise.
pub const DEFAULT_ORDER: usize = 20;
/// Largest design condition number accepted before a fit is declared singular.
pub const CONDITION_LIMIT: f64 = 1e10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarFit {
    pub p: usize,
    pub m: usize,
    pub labels: Vec<String>,
    /// Shape `(p, m, m)`, indexed `[lag - 1, target, source]`.
    pub phi: Array3<f64>,
    pub sigma: Array2<f64>,
    pub std_err: Array3<f64>,
    pub n_used: usize,
    pub means: Vec<f64>,
    pub condition_number: f64,
}

impl VarFit {
    pub fn coefficient(&self, lag: usize, target: usize, source: usize) -> f64 {
        self.phi[[lag - 1, target, source]]
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        spectral_radius(&self.phi)
    }

    /// Draws a fresh series from the fitted model.
    pub fn simulate(&self, n: usize, seed: u64) -> Result<Array2<f64>> {
        simulate_var(&self.phi, &self.sigma, n, seed)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| ScauError::numeric(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| ScauError::data(format!("invalid VAR fit JSON: {e}")))
    }
}

/// Lagged regression problem built from a `k × n` block of series.
#[derive(Debug, Clone)]
pub struct LaggedDesign {
    /// `(n - p) × (k·p)`; column `(l - 1)·k + s` holds series `s` at lag `l`.
    pub x: DMatrix<f64>,
    /// `(n - p) × k` responses.
    pub y: DMatrix<f64>,
    pub k: usize,
    pub p: usize,
}

impl LaggedDesign {
    pub fn new(data: ArrayView2<'_, f64>, p: usize) -> Result<Self> {
        let (k, n) = data.dim();
        if p == 0 {
            return Err(ScauError::config("model order must be at least 1"));
        }
        if n <= p {
            return Err(ScauError::data(format!(
                "series of length {n} too short for order {p}"
            )));
        }
        let rows = n - p;
        let x = DMatrix::from_fn(rows, k * p, |r, c| {
            let (lag, s) = (c / k + 1, c % k);
            data[[s, r + p - lag]]
        });
        let y = DMatrix::from_fn(rows, k, |r, s| data[[s, r + p]]);
        Ok(Self { x, y, k, p })
    }

    pub fn rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn column(lag: usize, source: usize, k: usize) -> usize {
        (lag - 1) * k + source
    }
}

/// Ordinary least squares for several responses sharing one design.
#[derive(Debug, Clone)]
pub struct Ols {
    /// `cols × responses`.
    pub coef: DMatrix<f64>,
    pub residuals: DMatrix<f64>,
    pub xtx_inv: DMatrix<f64>,
    pub condition_number: f64,
}

/// Condition number of `x` from the eigenvalues of `xᵀx`.
pub fn condition_number(xtx: &DMatrix<f64>) -> f64 {
    let eig = xtx.clone().symmetric_eigenvalues();
    let max = eig.max();
    let min = eig.min();
    if min <= 0.0 || max <= 0.0 {
        f64::INFINITY
    } else {
        (max / min).sqrt()
    }
}

pub fn ols(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<Ols> {
    let xtx = x.tr_mul(x);
    let cond = condition_number(&xtx);
    if !(cond < CONDITION_LIMIT) {
        return Err(ScauError::Singular {
            condition: cond,
            threshold: CONDITION_LIMIT,
        });
    }
    let chol = xtx.cholesky().ok_or(ScauError::Singular {
        condition: cond,
        threshold: CONDITION_LIMIT,
    })?;
    let coef = chol.solve(&x.tr_mul(y));
    let residuals = y - x * &coef;
    Ok(Ols {
        coef,
        residuals,
        xtx_inv: chol.inverse(),
        condition_number: cond,
    })
}

/// Fits a VAR(p) to every channel of `y` after centering.
pub fn fit_var(y: &TimeSeriesFrame, p: usize) -> Result<VarFit> {
    y.check_finite()?;
    fit_var_array(y.data().view(), p, y.labels().to_vec())
}

/// Same as [`fit_var`] on a raw `m × n` array.
pub fn fit_var_array(data: ArrayView2<'_, f64>, p: usize, labels: Vec<String>) -> Result<VarFit> {
    let (m, n) = data.dim();
    if labels.len() != m {
        return Err(ScauError::data("label count does not match channel count"));
    }
    if n <= m * p + m + p {
        return Err(ScauError::data(format!(
            "{n} samples are too few for a {m}-channel VAR({p}) (need more than {})",
            m * p + m + p
        )));
    }
    let means: Vec<f64> = data.rows().into_iter().map(|r| r.mean().unwrap_or(0.0)).collect();
    let centered = Array2::from_shape_fn((m, n), |(i, t)| data[[i, t]] - means[i]);
    let design = LaggedDesign::new(centered.view(), p)?;
    let fit = ols(&design.x, &design.y)?;
    let n_used = design.rows();
    let dof = (n_used - m * p) as f64;
    let sigma_n = fit.residuals.tr_mul(&fit.residuals) / dof;
    let sigma = Array2::from_shape_fn((m, m), |(a, b)| sigma_n[(a, b)]);
    let phi = Array3::from_shape_fn((p, m, m), |(l, t, s)| {
        fit.coef[(LaggedDesign::column(l + 1, s, m), t)]
    });
    let std_err = Array3::from_shape_fn((p, m, m), |(l, t, s)| {
        let c = LaggedDesign::column(l + 1, s, m);
        (sigma[[t, t]] * fit.xtx_inv[(c, c)]).max(0.0).sqrt()
    });
    Ok(VarFit {
        p,
        m,
        labels,
        phi,
        sigma,
        std_err,
        n_used,
        means,
        condition_number: fit.condition_number,
    })
}

/// Block companion matrix of a coefficient tensor.
pub fn companion(phi: &Array3<f64>) -> DMatrix<f64> {
    let (p, m, _) = phi.dim();
    let mut c = DMatrix::zeros(m * p, m * p);
    for l in 0..p {
        for t in 0..m {
            for s in 0..m {
                c[(t, l * m + s)] = phi[[l, t, s]];
            }
        }
    }
    for i in m..m * p {
        c[(i, i - m)] = 1.0;
    }
    c
}

/// `lim ‖Cᵏ‖^(1/k)` by repeated squaring, for matrices the QR iteration
/// cannot reduce (defective ones such as the companion of `Φ = 0`).
fn gelfand_radius(mut a: DMatrix<f64>) -> f64 {
    let mut log_scale = 0.0;
    let mut power = 1.0;
    for _ in 0..12 {
        let n = a.norm();
        if n == 0.0 {
            return 0.0;
        }
        a /= n;
        log_scale += n.ln() / power;
        a = &a * &a;
        power *= 2.0;
    }
    let n = a.norm();
    if n == 0.0 {
        return 0.0;
    }
    (log_scale + n.ln() / power).exp()
}

pub fn spectral_radius(phi: &Array3<f64>) -> Result<f64> {
    let c = companion(phi);
    if c.nrows() == 0 {
        return Ok(0.0);
    }
    let r = match c.clone().try_schur(f64::EPSILON, 100 * c.nrows()) {
        Some(schur) => schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max),
        None => gelfand_radius(c),
    };
    if r.is_finite() {
        Ok(r)
    } else {
        Err(ScauError::numeric("companion eigenvalues did not converge"))
    }
}

/// Lower-triangular factor `L` with `L Lᵀ = sigma`; tolerates semidefinite input.
pub fn noise_factor(sigma: &Array2<f64>) -> Result<DMatrix<f64>> {
    let m = sigma.nrows();
    if sigma.ncols() != m {
        return Err(ScauError::config("noise covariance must be square"));
    }
    let s = DMatrix::from_fn(m, m, |i, j| 0.5 * (sigma[[i, j]] + sigma[[j, i]]));
    if let Some(ch) = s.clone().cholesky() {
        return Ok(ch.l());
    }
    let eig = s.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&v| v < -1e-10 * eig.eigenvalues.amax().max(1.0)) {
        return Err(ScauError::config("noise covariance is not positive semidefinite"));
    }
    let root = DVector::from_iterator(m, eig.eigenvalues.iter().map(|v| v.max(0.0).sqrt()));
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&root))
}

/// Simulates `n` samples of a zero-mean VAR driven by Gaussian noise with
/// covariance `sigma`, discarding a burn-in of `10·p` samples.
pub fn simulate_var(phi: &Array3<f64>, sigma: &Array2<f64>, n: usize, seed: u64) -> Result<Array2<f64>> {
    let (p, m, m2) = phi.dim();
    if m != m2 || sigma.dim() != (m, m) {
        return Err(ScauError::config(format!(
            "coefficient shape {:?} and noise covariance shape {:?} disagree",
            phi.dim(),
            sigma.dim()
        )));
    }
    let radius = spectral_radius(phi)?;
    if radius >= 1.0 {
        return Err(ScauError::Unstable { radius });
    }
    let l = noise_factor(sigma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let burn = 10 * p;
    let total = n + burn;
    let mut y = Array2::<f64>::zeros((m, total));
    let mut z = DVector::<f64>::zeros(m);
    for t in 0..total {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        let e = &l * &z;
        for tgt in 0..m {
            let mut acc = e[tgt];
            for lag in 1..=p.min(t) {
                for src in 0..m {
                    acc += phi[[lag - 1, tgt, src]] * y[[src, t - lag]];
                }
            }
            y[[tgt, t]] = acc;
        }
    }
    Ok(y.slice(ndarray::s![.., burn..]).to_owned())
}

/// Entry `[target, source]` is true when some lag's coefficient is
/// significant at level `alpha`, Bonferroni-corrected over the `p` lags.
pub fn granger_matrix(fit: &VarFit, alpha: f64) -> Result<Array2<bool>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ScauError::config(format!("significance level {alpha} outside (0, 1)")));
    }
    let z = granger_threshold(alpha, fit.p);
    Ok(Array2::from_shape_fn((fit.m, fit.m), |(t, s)| {
        (0..fit.p).any(|l| {
            let se = fit.std_err[[l, t, s]];
            se > 0.0 && (fit.phi[[l, t, s]] / se).abs() > z
        })
    }))
}

/// Two-sided normal critical value at `alpha / lags`.
pub fn granger_threshold(alpha: f64, lags: usize) -> f64 {
    let normal = Normal::standard();
    normal.inverse_cdf(1.0 - alpha / (2.0 * lags.max(1) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn frame(data: Array2<f64>) -> TimeSeriesFrame {
        let labels = (0..data.nrows()).map(|i| format!("y{i}")).collect();
        TimeSeriesFrame::new(labels, 1.0, data).unwrap()
    }

    #[test]
    fn ar1_recovery() {
        let phi = Array3::from_elem((1, 1, 1), 0.5);
        let y = simulate_var(&phi, &Array2::eye(1), 10_000, 3).unwrap();
        let fit = fit_var(&frame(y), 1).unwrap();
        assert!((fit.phi[[0, 0, 0]] - 0.5).abs() < 0.03);
        let asymptotic = ((1.0 - 0.25) / 10_000f64).sqrt();
        assert_relative_eq!(fit.std_err[[0, 0, 0]], asymptotic, max_relative = 0.1);
    }

    #[test]
    fn white_noise_null() {
        let y = simulate_var(&Array3::zeros((2, 2, 2)), &Array2::eye(2), 10_000, 5).unwrap();
        let fit = fit_var(&frame(y), 2).unwrap();
        assert!(fit.phi.iter().all(|v| v.abs() < 0.05));
        assert_relative_eq!(fit.sigma[[0, 0]], 1.0, max_relative = 0.05);
    }

    #[test]
    fn residuals_orthogonal_to_regressors() {
        let mut phi = Array3::zeros((2, 3, 3));
        phi[[0, 0, 0]] = 0.4;
        phi[[0, 1, 0]] = 0.3;
        phi[[1, 2, 1]] = -0.2;
        let y = simulate_var(&phi, &Array2::eye(3), 2000, 9).unwrap();
        let means: Vec<f64> = y.rows().into_iter().map(|r| r.mean().unwrap()).collect();
        let c = Array2::from_shape_fn(y.dim(), |(i, t)| y[[i, t]] - means[i]);
        let d = LaggedDesign::new(c.view(), 2).unwrap();
        let fit = ols(&d.x, &d.y).unwrap();
        let g = d.x.tr_mul(&fit.residuals);
        let scale = d.x.norm() * fit.residuals.norm();
        assert!(g.amax() / scale < 1e-6);
    }

    #[test]
    fn exact_collinearity_is_singular() {
        let base: Vec<f64> = (0..500).map(|i| ((i * 37) % 11) as f64).collect();
        let data = Array2::from_shape_fn((2, 500), |(_, t)| base[t]);
        match fit_var(&frame(data), 2) {
            Err(ScauError::Singular { threshold, .. }) => assert_eq!(threshold, CONDITION_LIMIT),
            other => panic!("expected singular design, got {other:?}"),
        }
    }

    #[test]
    fn unstable_spec_reports_radius() {
        let phi = Array3::from_elem((1, 1, 1), 1.2);
        match simulate_var(&phi, &Array2::eye(1), 10, 0) {
            Err(ScauError::Unstable { radius }) => assert_relative_eq!(radius, 1.2, epsilon = 1e-9),
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let mut phi = Array3::zeros((2, 2, 2));
        phi[[0, 0, 0]] = 0.5;
        phi[[1, 1, 0]] = 0.3;
        let s = Array2::from_shape_vec((2, 2), vec![1.0, 0.3, 0.3, 2.0]).unwrap();
        let a = simulate_var(&phi, &s, 500, 42).unwrap();
        let b = simulate_var(&phi, &s, 500, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate_var(&phi, &s, 500, 43).unwrap());
    }

    #[test]
    fn identity_noise_covariance() {
        let y = simulate_var(&Array3::zeros((1, 3, 3)), &Array2::eye(3), 100_000, 1).unwrap();
        let n = y.ncols() as f64;
        let cov = y.dot(&y.t()) / n;
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((cov[[i, j]] - expected).abs() < 0.05);
            }
        }
    }

    #[test]
    fn granger_flags_one_way_coupling() {
        let mut phi = Array3::zeros((1, 2, 2));
        phi[[0, 1, 0]] = 0.8;
        let y = simulate_var(&phi, &Array2::eye(2), 2000, 4).unwrap();
        let g = granger_matrix(&fit_var(&frame(y), 2).unwrap(), 0.05).unwrap();
        assert!(g[[1, 0]]);
        assert!(!g[[0, 1]]);
        assert!((granger_threshold(0.05, 1) - 1.959964).abs() < 1e-5);
    }

    #[test]
    fn radius_of_defective_companions() {
        for m in [2, 6, 12] {
            assert!(spectral_radius(&Array3::zeros((2, m, m))).unwrap() < 1e-12);
        }
        // A Jordan block: eigenvalue 0.5 with multiplicity 3.
        let j = DMatrix::from_row_slice(3, 3, &[0.5, 1.0, 0.0, 0.0, 0.5, 1.0, 0.0, 0.0, 0.5]);
        assert!((gelfand_radius(j) - 0.5).abs() < 0.01);
    }

    #[test]
    fn json_round_trip() {
        let y = simulate_var(&Array3::zeros((1, 2, 2)), &Array2::eye(2), 300, 2).unwrap();
        let fit = fit_var(&frame(y), 2).unwrap();
        assert_eq!(VarFit::from_json(&fit.to_json().unwrap()).unwrap(), fit);
    }
}
