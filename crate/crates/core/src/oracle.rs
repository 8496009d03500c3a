//! Ground-truth generators and closed forms for the motivating lemmas:
//! the modulated pair that defeats a linear VAR, the lag-1 cross-correlation
//! of two AR(2) oscillators, the covariance integrals behind the modulated
//! pair, and a synthetic cross-frequency network with known links.

use std::f64::consts::PI;

use ndarray::{Array2, Array3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::{band_filter, BandScheme};
use crate::connectivity::EdgeKey;
use crate::error::{Result, ScauError};
use crate::filters::{FilterDesign, FilterOptions};
use crate::frame::TimeSeriesFrame;
use crate::spectrum::cross_correlation;
use crate::varfit::{fit_var_array, simulate_var};

/// Panels of the composite Simpson rule used for the covariance integrals.
pub const QUADRATURE_PANELS: usize = 1 << 14;
/// Lower bound on ρ_AB(1) claimed for slow, sharp oscillators.
pub const MULTICOLLINEARITY_BOUND: f64 = 0.991;
/// Claimed ceiling on lag-1 correlation at the default intermediate frequency.
pub const INTERMEDIATE_BOUND: f64 = 0.810;

// ---------------------------------------------------------------------------
// Modulated pair

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulatedPairParams {
    pub omega0: f64,
    pub kappa: f64,
    pub noise_var_x: f64,
    pub noise_var_y: f64,
    pub n: usize,
    pub seed: u64,
}

impl ModulatedPairParams {
    pub fn new(omega0: f64, kappa: f64) -> Self {
        Self {
            omega0,
            kappa,
            noise_var_x: 0.25,
            noise_var_y: 0.25,
            n: 10_000,
            seed: 0,
        }
    }

    pub fn with_noise(mut self, var: f64) -> Self {
        self.noise_var_x = var;
        self.noise_var_y = var;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0 && self.omega0 < 0.5) {
            return Err(ScauError::config(format!("ω0 = {} outside (0, 1/2)", self.omega0)));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(ScauError::config(format!("κ = {} must be positive", self.kappa)));
        }
        if !(self.noise_var_x >= 0.0 && self.noise_var_y >= 0.0) {
            return Err(ScauError::config("noise variances must be nonnegative"));
        }
        Ok(())
    }
}

/// `x(n) = cos(2πω0(n−1)) + εx(n)`, `y(n) = cos(2πκω0 n)·cos(2πω0 n) + εy(n)`.
/// Rows of the result are `x` and `y`.
pub fn gen_modulated_pair(params: &ModulatedPairParams) -> Result<Array2<f64>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let sx = params.noise_var_x.sqrt();
    let sy = params.noise_var_y.sqrt();
    let w = 2.0 * PI * params.omega0;
    let mut out = Array2::zeros((2, params.n));
    for t in 0..params.n {
        let n = t as f64;
        let ex: f64 = StandardNormal.sample(&mut rng);
        let ey: f64 = StandardNormal.sample(&mut rng);
        out[[0, t]] = (w * (n - 1.0)).cos() + sx * ex;
        out[[1, t]] = (params.kappa * w * n).cos() * (w * n).cos() + sy * ey;
    }
    Ok(out)
}

/// Absolute off-diagonal VAR(2) coefficients fitted to [`gen_modulated_pair`] output,
/// ordered `x→y` lag 1, `x→y` lag 2, `y→x` lag 1, `y→x` lag 2.
pub fn modulated_pair_cross_coefficients(params: &ModulatedPairParams) -> Result<[f64; 4]> {
    let data = gen_modulated_pair(params)?;
    let fit = fit_var_array(data.view(), 2, vec!["x".into(), "y".into()])?;
    Ok([
        fit.phi[[0, 1, 0]].abs(),
        fit.phi[[1, 1, 0]].abs(),
        fit.phi[[0, 0, 1]].abs(),
        fit.phi[[1, 0, 1]].abs(),
    ])
}

// ---------------------------------------------------------------------------
// Covariance integrals

/// The three lagged covariances of the modulated pair computed three ways.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationCovariances {
    pub omega0: f64,
    pub kappa: f64,
    /// cov(x(n−1), y(n−1)), cov(x(n−1), y(n−2)), cov(x(n−2), y(n)) by Simpson quadrature.
    pub quadrature: [f64; 3],
    /// Product-to-sum evaluation of the same integrals; finite for every κ.
    pub derived: [f64; 3],
    /// The printed closed forms; `None` where they are singular.
    pub printed: Option<[f64; 3]>,
}

impl ModulationCovariances {
    pub fn singular(&self) -> bool {
        self.printed.is_none()
    }
}

fn integrand(which: usize, omega0: f64, kappa: f64, v: f64) -> f64 {
    let a = 2.0 * PI * omega0;
    let k = kappa;
    match which {
        0 => (k * a * v).cos() * (a * v).cos().powi(2),
        1 => (k * a * v).cos() * (a * v).cos() * (a * (v - 1.0)).cos(),
        _ => (k * a * (v - 2.0)).cos() * (a * (v - 2.0)).cos() * (a * (v - 1.0)).cos(),
    }
}

/// Composite Simpson rule on `[lo, hi]` with an even number of panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}

/// Mean of `cos(c·ν + φ)` over `ν ∈ [0, 2π]`.
fn mean_cos(c: f64, phase: f64) -> f64 {
    if c.abs() < 1e-12 {
        phase.cos()
    } else {
        ((2.0 * PI * c + phase).sin() - phase.sin()) / (2.0 * PI * c)
    }
}

fn derived_covariances(omega0: f64, kappa: f64) -> [f64; 3] {
    let a = 2.0 * PI * omega0;
    let k = kappa;
    let c1 = 0.5 * mean_cos(k * a, 0.0)
        + 0.25 * mean_cos((k + 2.0) * a, 0.0)
        + 0.25 * mean_cos((k - 2.0) * a, 0.0);
    let c2 = 0.5 * a.cos() * mean_cos(k * a, 0.0)
        + 0.25 * mean_cos((k + 2.0) * a, -a)
        + 0.25 * mean_cos((k - 2.0) * a, a);
    let c3 = 0.5 * a.cos() * mean_cos(k * a, -2.0 * k * a)
        + 0.25 * mean_cos((k + 2.0) * a, -3.0 * a - 2.0 * k * a)
        + 0.25 * mean_cos((k - 2.0) * a, 3.0 * a - 2.0 * k * a);
    [c1, c2, c3]
}

fn printed_covariances(w: f64, k: f64) -> [f64; 3] {
    let p2 = PI * PI;
    let c1 = (2.0 * p2 * w * (k - 2.0)).sin() / (16.0 * p2 * w * (k - 2.0))
        + (2.0 * p2 * w * (k + 2.0)).sin() / (16.0 * p2 * w * (k + 2.0))
        + (2.0 * p2 * k * w).sin() / (8.0 * p2 * w * (k + 2.0));
    let c2 = (4.0 * p2 * w * (k - 2.0) + 2.0 * PI * w).sin() / (16.0 * p2 * w * (k - 2.0))
        + (4.0 * p2 * w * (k + 2.0) - 2.0 * PI * w).sin() / (16.0 * p2 * w * (k + 2.0))
        + (4.0 * PI * w * (PI * k + 0.5)).sin() / (16.0 * p2 * w * k)
        + (4.0 * PI * w * (PI * k - 0.5)).sin() / (16.0 * p2 * w * k)
        + (PI * w).sin() * (PI * w).cos() / (2.0 * p2 * w * (k * k - 4.0));
    let c3 = (4.0 * PI * w * (PI * (k - 2.0) - (k - 1.0))).sin() / (16.0 * p2 * w * (k - 2.0))
        + (4.0 * PI * w * (PI * (k + 2.0) - (k + 1.0))).sin() / (16.0 * p2 * w * (k + 2.0))
        + (4.0 * PI * w * (PI * k + (k - 1.0))).sin() / (16.0 * p2 * w)
        + (4.0 * PI * w * (PI * k - (k - 1.0))).sin() / (16.0 * p2 * w)
        + (4.0 * PI * w * (k - 1.0)).sin() * (k - 1.0) / (8.0 * p2 * w * k * (k - 2.0))
        + (4.0 * PI * w * (k + 1.0)).sin() * (k + 1.0) / (8.0 * p2 * w * k * (k + 2.0));
    [c1, c2, c3]
}

/// Averages of the three covariance integrands over `ν ∈ [0, 2π]`.
pub fn modulation_covariances(omega0: f64, kappa: f64) -> Result<ModulationCovariances> {
    if !(omega0 > 0.0 && omega0 <= 0.5) {
        return Err(ScauError::config(format!("ω0 = {omega0} outside (0, 1/2]")));
    }
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(ScauError::config(format!("κ = {kappa} must be nonnegative")));
    }
    let quadrature = [0, 1, 2].map(|i| {
        simpson(|v| integrand(i, omega0, kappa, v), 0.0, 2.0 * PI, QUADRATURE_PANELS) / (2.0 * PI)
    });
    let singular = (kappa - 2.0).abs() < 1e-9 || kappa < 1e-9;
    Ok(ModulationCovariances {
        omega0,
        kappa,
        quadrature,
        derived: derived_covariances(omega0, kappa),
        printed: (!singular).then(|| printed_covariances(omega0, kappa)),
    })
}

/// Frequency grid `[0.05, 0.5]` with step 0.0005 used for the covariance table.
pub fn covtable_grid() -> Vec<f64> {
    (0..=900).map(|i| 0.05 + 0.0005 * i as f64).collect()
}

/// Largest absolute quadrature covariance over `grid`, per covariance.
pub fn max_covariances(kappa: f64, grid: &[f64]) -> Result<[f64; 3]> {
    let rows = grid
        .par_iter()
        .map(|&w| modulation_covariances(w, kappa).map(|c| c.quadrature))
        .collect::<Result<Vec<_>>>()?;
    let mut out = [0.0; 3];
    for r in rows {
        for i in 0..3 {
            out[i] = f64::max(out[i], r[i].abs());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovTable {
    pub kappa_ref: f64,
    pub kappa: f64,
    pub max_ref: [f64; 3],
    pub max: [f64; 3],
    /// `max_ref / max` per covariance.
    pub ratios: [f64; 3],
}

/// How many times smaller the peak covariances are at `kappa` than at `kappa_ref`.
pub fn covtable(kappa_ref: f64, kappa: f64) -> Result<CovTable> {
    let grid = covtable_grid();
    let max_ref = max_covariances(kappa_ref, &grid)?;
    let max = max_covariances(kappa, &grid)?;
    let ratios = [0, 1, 2].map(|i| max_ref[i] / max[i]);
    Ok(CovTable {
        kappa_ref,
        kappa,
        max_ref,
        max,
        ratios,
    })
}

// ---------------------------------------------------------------------------
// AR(2) oscillators

/// AR(2) with a spectral peak near `omega` cycles/sample and pole modulus
/// `1 / (1 + e^{−τ})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar2Params {
    pub omega: f64,
    pub tau: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl Ar2Params {
    pub fn modulus(&self) -> f64 {
        (-self.phi2).sqrt()
    }

    /// `1 − modulus`, computed as `e^{−τ} / (1 + e^{−τ})`.
    pub fn one_minus_modulus(&self) -> f64 {
        let q = (-self.tau).exp();
        q / (1.0 + q)
    }

    pub fn peak_hz(&self, f_s: f64) -> f64 {
        self.omega * f_s
    }

    /// Lag-1 autocorrelation `φ1 / (1 − φ2)`.
    pub fn lag1_autocorrelation(&self) -> f64 {
        self.phi1 / (1.0 - self.phi2)
    }

    /// Stationary variance for unit innovation variance.
    pub fn variance(&self) -> f64 {
        let (a, b) = (self.phi1, self.phi2);
        (1.0 - b) / ((1.0 + b) * ((1.0 - b).powi(2) - a * a))
    }

    /// Coefficients as a one-channel tensor for [`simulate_var`].
    pub fn phi(&self) -> Array3<f64> {
        Array3::from_shape_vec((2, 1, 1), vec![self.phi1, self.phi2]).expect("shape")
    }

    pub fn simulate(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        let sigma = Array2::from_elem((1, 1), 1.0);
        Ok(simulate_var(&self.phi(), &sigma, n, seed)?.row(0).to_vec())
    }
}

pub fn ar2_from_peak(omega: f64, tau: f64) -> Result<Ar2Params> {
    if !(omega > 0.0 && omega < 0.5) {
        return Err(ScauError::config(format!("ω* = {omega} outside (0, 1/2)")));
    }
    if !tau.is_finite() {
        return Err(ScauError::config("τ must be finite"));
    }
    let r = 1.0 / (1.0 + (-tau).exp());
    Ok(Ar2Params {
        omega,
        tau,
        phi1: 2.0 * r * (2.0 * PI * omega).cos(),
        phi2: -r * r,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedCrossCorr {
    pub rho0: f64,
    pub rho_ab1: f64,
    pub rho_ba1: f64,
    /// Innovation correlation found by bisection.
    pub innovation_corr: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCorrResult {
    pub rho0: f64,
    /// corr(x_A(n), x_B(n−1)).
    pub rho_ab1: f64,
    /// corr(x_B(n), x_A(n−1)).
    pub rho_ba1: f64,
    pub simulated: Option<SimulatedCrossCorr>,
}

/// `ρ_AB(1)` in the factored form `2ρ0·cos(2πω_A)·√(−φ2A)·(1 + s·cos(2πω_B)/cos(2πω_A)) / (1 − φ2Aφ2B)`
/// with `s = −√(φ2Aφ2B)`, written without the division by `cos(2πω_A)`.
pub fn rho_lag1_factored(a: &Ar2Params, b: &Ar2Params, rho0: f64) -> f64 {
    let (ra, rb) = (a.modulus(), b.modulus());
    let (ca, cb) = ((2.0 * PI * a.omega).cos(), (2.0 * PI * b.omega).cos());
    // 1 − r_A r_B from the bandwidths, which stays accurate for large τ.
    let (da, db) = (a.one_minus_modulus(), b.one_minus_modulus());
    let gap = da + db - da * db;
    2.0 * rho0 * ra * ((ca - cb) + gap * cb) / (gap * (1.0 + ra * rb))
}

/// `ρ_AB(1)` from the lagged Yule-Walker recursion:
/// `ρ0·(φ1A + φ2A·φ1B) / (1 − φ2A·φ2B)`.
pub fn rho_lag1_recursion(a: &Ar2Params, b: &Ar2Params, rho0: f64) -> f64 {
    rho0 * (a.phi1 + a.phi2 * b.phi1) / (1.0 - a.phi2 * b.phi2)
}

/// Closed-form lag-1 cross-correlations without simulation.
pub fn cross_corr_analytic(a: &Ar2Params, b: &Ar2Params, rho0: f64) -> Result<CrossCorrResult> {
    check_pair(a, b, rho0)?;
    Ok(CrossCorrResult {
        rho0,
        rho_ab1: rho_lag1_factored(a, b, rho0),
        rho_ba1: rho_lag1_factored(b, a, rho0),
        simulated: None,
    })
}

fn check_pair(a: &Ar2Params, b: &Ar2Params, rho0: f64) -> Result<()> {
    if !(rho0.abs() <= 1.0) {
        return Err(ScauError::config(format!("|ρ0| = {} exceeds 1", rho0.abs())));
    }
    for p in [a, b] {
        if !(p.modulus() < 1.0) {
            return Err(ScauError::Unstable { radius: p.modulus() });
        }
    }
    Ok(())
}

fn simulate_pair(a: &Ar2Params, b: &Ar2Params, r: f64, n: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut phi = Array3::zeros((2, 2, 2));
    phi[[0, 0, 0]] = a.phi1;
    phi[[1, 0, 0]] = a.phi2;
    phi[[0, 1, 1]] = b.phi1;
    phi[[1, 1, 1]] = b.phi2;
    let sigma = Array2::from_shape_vec((2, 2), vec![1.0, r, r, 1.0]).expect("shape");
    let y = simulate_var(&phi, &sigma, n, seed)?;
    Ok((y.row(0).to_vec(), y.row(1).to_vec()))
}

/// Closed forms plus a simulation of `n` samples whose innovations are
/// correlated so that the sample `ρ_AB(0)` matches `rho0`.
pub fn cross_corr_lag1(a: &Ar2Params, b: &Ar2Params, rho0: f64, n: usize, seed: u64) -> Result<CrossCorrResult> {
    let mut out = cross_corr_analytic(a, b, rho0)?;
    let corr0 = |r: f64| -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let (xa, xb) = simulate_pair(a, b, r, n, seed)?;
        Ok((cross_correlation(&xa, &xb, 0), xa, xb))
    };
    let (hi_val, ..) = corr0(1.0)?;
    let (lo_val, ..) = corr0(-1.0)?;
    if rho0 > hi_val + 1e-9 || rho0 < lo_val - 1e-9 {
        return Err(ScauError::data(format!(
            "ρ0 = {rho0} is unreachable for this pair (attainable range [{lo_val:.4}, {hi_val:.4}])"
        )));
    }
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut r = if (rho0 - hi_val).abs() <= 1e-9 {
        1.0
    } else if (rho0 - lo_val).abs() <= 1e-9 {
        -1.0
    } else {
        0.0
    };
    if r == 0.0 {
        for _ in 0..60 {
            r = 0.5 * (lo + hi);
            let (v, ..) = corr0(r)?;
            if (v - rho0).abs() < 1e-7 {
                break;
            }
            if v < rho0 {
                lo = r;
            } else {
                hi = r;
            }
        }
    }
    let (v, xa, xb) = corr0(r)?;
    out.simulated = Some(SimulatedCrossCorr {
        rho0: v,
        rho_ab1: cross_correlation(&xa, &xb, 1),
        rho_ba1: cross_correlation(&xb, &xa, 1),
        innovation_corr: r,
        n,
    });
    Ok(out)
}

/// Lag-1 correlation of two identical oscillators with perfectly correlated
/// innovations, the quantity bounded below by 0.991 for slow sharp peaks.
pub fn multicollinearity_rho(omega: f64, tau: f64) -> Result<f64> {
    let a = ar2_from_peak(omega, tau)?;
    Ok(rho_lag1_factored(&a, &a, 1.0))
}

// ---------------------------------------------------------------------------
// Synthetic cross-frequency network

/// Amplitude modulation of `target` by `source`: the target component gains
/// `gain · source(n − lag) · cos(2π f_c n / f_s)`, band-limited to the target band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationLink {
    /// (channel, band) of the modulator.
    pub source: (usize, usize),
    /// (channel, band) receiving the modulated carrier.
    pub target: (usize, usize),
    pub gain: f64,
    #[serde(default = "default_lag")]
    pub lag: usize,
    /// Carrier in Hz; defaults to the distance between the two bands' lower edges.
    #[serde(default)]
    pub carrier_hz: Option<f64>,
}

fn default_lag() -> usize {
    1
}

impl ModulationLink {
    pub fn new(source: (usize, usize), target: (usize, usize), gain: f64) -> Self {
        Self {
            source,
            target,
            gain,
            lag: 1,
            carrier_hz: None,
        }
    }

    pub fn edge(&self) -> EdgeKey {
        EdgeKey::full(self.source.0, self.source.1, self.target.0, self.target.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub channels: Vec<String>,
    pub scheme: BandScheme,
    /// Bandwidth parameter of every background oscillator.
    pub tau: f64,
    /// Standard deviation of each background component.
    pub amplitude: f64,
    /// Standard deviation of white sensor noise added to each channel.
    pub noise_sd: f64,
    pub links: Vec<ModulationLink>,
    /// Filters used to band-limit the generated components.
    #[serde(default)]
    pub filter: FilterOptions,
    /// Band-limit forwards and backwards, so the links carry no filter delay.
    #[serde(default = "default_zero_phase")]
    pub zero_phase: bool,
}

fn default_zero_phase() -> bool {
    true
}

impl NetworkSpec {
    pub fn new(channels: Vec<String>, scheme: BandScheme) -> Self {
        Self {
            channels,
            scheme,
            tau: 4.0,
            amplitude: 1.0,
            noise_sd: 0.1,
            links: Vec::new(),
            filter: FilterOptions::default(),
            zero_phase: true,
        }
    }

    pub fn with_link(mut self, link: ModulationLink) -> Self {
        self.links.push(link);
        self
    }

    fn carrier(&self, link: &ModulationLink) -> f64 {
        link.carrier_hz
            .unwrap_or(self.scheme.bands[link.target.1].f_a - self.scheme.bands[link.source.1].f_a)
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        let (m, nb) = (self.channels.len(), self.scheme.len());
        if m == 0 {
            return Err(ScauError::config("network needs at least one channel"));
        }
        if !(self.amplitude >= 0.0 && self.noise_sd >= 0.0 && self.tau.is_finite()) {
            return Err(ScauError::config("amplitude, noise and τ must be finite and nonnegative"));
        }
        for l in &self.links {
            for (c, b) in [l.source, l.target] {
                if c >= m || b >= nb {
                    return Err(ScauError::config(format!(
                        "link references ({c}, {b}) outside {m} channels × {nb} bands"
                    )));
                }
            }
            if l.source == l.target {
                return Err(ScauError::config("a component cannot modulate itself"));
            }
            let src = &self.scheme.bands[l.source.1];
            let tgt = &self.scheme.bands[l.target.1];
            let f_c = self.carrier(l);
            let shifted = src.center() + f_c;
            if !(f_c >= 0.0) || !tgt.contains(shifted) {
                return Err(ScauError::config(format!(
                    "modulator at {} Hz with carrier {f_c} Hz lands at {shifted} Hz, outside band {} [{}, {})",
                    src.center(),
                    tgt.label,
                    tgt.f_a,
                    tgt.f_b
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulatedNetwork {
    pub frame: TimeSeriesFrame,
    /// Injected edges in (channel, band) coordinates.
    pub truth: Vec<EdgeKey>,
}

fn band_limit(f: &FilterDesign, x: &[f64], zero_phase: bool) -> Vec<f64> {
    let y = f.filter(x);
    if !zero_phase {
        return y;
    }
    let rev: Vec<f64> = y.into_iter().rev().collect();
    let mut back = f.filter(&rev);
    back.reverse();
    back
}

/// Every channel is a sum of band-limited AR(2) oscillators, one per band,
/// peaking at the band centre. Linked targets additionally carry the lagged
/// product of their modulator and a carrier.
pub fn gen_modulated_network(spec: &NetworkSpec, n: usize, seed: u64) -> Result<ModulatedNetwork> {
    spec.validate()?;
    let f_s = spec.scheme.f_s;
    let (m, nb) = (spec.channels.len(), spec.scheme.len());
    let opts = spec.filter;
    let filters = spec
        .scheme
        .bands
        .iter()
        .map(|b| band_filter(b, f_s, &opts))
        .collect::<Result<Vec<_>>>()?;
    let warm = 2000;
    let mut comps: Vec<Vec<f64>> = (0..m * nb)
        .into_par_iter()
        .map(|idx| {
            let band = &spec.scheme.bands[idx % nb];
            let ar = ar2_from_peak(band.center() / f_s, spec.tau)?;
            let raw = ar.simulate(n + warm, seed.wrapping_add(idx as u64))?;
            let mut y = band_limit(&filters[idx % nb], &raw, spec.zero_phase);
            y.drain(..warm);
            let sd = crate::spectrum::rms(&y);
            let scale = if sd > 0.0 { spec.amplitude / sd } else { 0.0 };
            y.iter_mut().for_each(|v| *v *= scale);
            Ok(y)
        })
        .collect::<Result<_>>()?;
    let background = comps.clone();
    for link in &spec.links {
        let src = &background[link.source.0 * nb + link.source.1];
        let f_c = spec.carrier(link);
        let product: Vec<f64> = (0..n)
            .map(|t| {
                if t < link.lag {
                    0.0
                } else {
                    src[t - link.lag] * (2.0 * PI * f_c * t as f64 / f_s).cos()
                }
            })
            .collect();
        // The product has a sideband on each side of the carrier; only the
        // one inside the target band is kept, with twice the amplitude.
        let kept = band_limit(&filters[link.target.1], &product, spec.zero_phase);
        let tgt = &mut comps[link.target.0 * nb + link.target.1];
        for (v, k) in tgt.iter_mut().zip(&kept) {
            *v += 2.0 * link.gain * k;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed_5eed_5eed);
    let noise = Normal::new(0.0, spec.noise_sd.max(f64::MIN_POSITIVE)).map_err(|e| ScauError::config(e.to_string()))?;
    let channels: Vec<Vec<f64>> = (0..m)
        .map(|c| {
            (0..n)
                .map(|t| {
                    let s: f64 = (0..nb).map(|b| comps[c * nb + b][t]).sum();
                    s + if spec.noise_sd > 0.0 { noise.sample(&mut rng) } else { 0.0 }
                })
                .collect()
        })
        .collect();
    Ok(ModulatedNetwork {
        frame: TimeSeriesFrame::from_channels(spec.channels.clone(), f_s, channels)?,
        truth: spec.links.iter().map(ModulationLink::edge).collect(),
    })
}

// ---------------------------------------------------------------------------
// Lemma suite

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub computed: f64,
    pub expected: String,
    pub pass: bool,
}

impl Check {
    fn new(suite: &str, name: impl Into<String>, computed: f64, expected: impl Into<String>, pass: bool) -> Self {
        Self {
            suite: suite.into(),
            name: name.into(),
            computed,
            expected: expected.into(),
            pass,
        }
    }
}

/// Suite names accepted by [`verify`].
pub const SUITES: [&str; 4] = ["1", "2", "3", "covtable"];

/// Runs one suite (`"1"`, `"2"`, `"3"`, `"covtable"`) or all of them (`"all"`).
pub fn verify(which: &str) -> Result<Vec<Check>> {
    match which {
        "1" => verify_modulated_pair(),
        "2" => verify_cross_correlation(),
        "3" => verify_peak_correlation(),
        "covtable" => verify_covtable(),
        "all" => {
            let mut out = Vec::new();
            for s in SUITES {
                out.extend(verify(s)?);
            }
            Ok(out)
        }
        other => Err(ScauError::config(format!(
            "unknown lemma suite '{other}' (expected one of 1, 2, 3, covtable, all)"
        ))),
    }
}

fn cross_coefficient_extremes(kappa: f64, seeds: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows = (0..seeds)
        .into_par_iter()
        .map(|s| modulated_pair_cross_coefficients(&ModulatedPairParams::new(0.005, kappa).with_seed(s)))
        .collect::<Result<Vec<_>>>()?;
    let max = rows.iter().map(|r| r.iter().cloned().fold(0.0, f64::max)).collect();
    let min = rows.iter().map(|r| r.iter().cloned().fold(f64::INFINITY, f64::min)).collect();
    Ok((max, min))
}

fn verify_modulated_pair() -> Result<Vec<Check>> {
    let seeds = 20;
    let (hi20, _) = cross_coefficient_extremes(20.0, seeds)?;
    let (hi1, _) = cross_coefficient_extremes(1.0, seeds)?;
    let pass20 = hi20.iter().filter(|&&v| v < 0.05).count() as f64 / seeds as f64;
    let pass1 = hi1.iter().filter(|&&v| v > 0.2).count() as f64 / seeds as f64;
    Ok(vec![
        Check::new("1", "kappa=20 max |cross coef| (worst seed)", hi20.iter().cloned().fold(0.0, f64::max), "< 0.05", pass20 >= 0.9),
        Check::new("1", "kappa=20 seeds passing", pass20, ">= 0.9", pass20 >= 0.9),
        Check::new("1", "kappa=1 max |cross coef| (best seed)", hi1.iter().cloned().fold(0.0, f64::max), "> 0.2", pass1 >= 0.9),
        Check::new("1", "kappa=1 seeds passing", pass1, ">= 0.9", pass1 >= 0.9),
    ])
}

fn verify_cross_correlation() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let a = ar2_from_peak(0.1, 20.0)?;
    let r = cross_corr_lag1(&a, &a, 1.0, 100_000, 1)?;
    out.push(Check::new("2", "rho_AB(1) at w*=0.1, tau=20", r.rho_ab1, "0.809 ± 0.002, <= 0.810", (r.rho_ab1 - 0.809).abs() <= 0.002 && r.rho_ab1 <= INTERMEDIATE_BOUND));
    let sim = r.simulated.as_ref().map_or(f64::NAN, |s| s.rho_ab1);
    out.push(Check::new("2", "simulated rho_AB(1) at w*=0.1, tau=20", sim, "0.809 ± 0.002", (sim - 0.809).abs() <= 0.002));
    let pairs = [((0.02, 3.0), (0.03, 4.0), 0.5), ((0.1, 2.5), (0.08, 3.0), -0.4), ((0.2, 3.0), (0.15, 2.0), 0.3)];
    for (i, ((wa, ta), (wb, tb), frac)) in pairs.into_iter().enumerate() {
        let a = ar2_from_peak(wa, ta)?;
        let b = ar2_from_peak(wb, tb)?;
        let rho0 = frac * attainable_rho0(&a, &b, 100_000, 10 + i as u64)?;
        let r = cross_corr_lag1(&a, &b, rho0, 100_000, 10 + i as u64)?;
        let sim = r.simulated.as_ref().map_or(f64::NAN, |s| s.rho_ab1);
        out.push(Check::new(
            "2",
            format!("closed form {:.4} vs simulation, pair {i}", r.rho_ab1),
            sim,
            "± 0.02",
            (sim - r.rho_ab1).abs() <= 0.02,
        ));
    }
    Ok(out)
}

/// Largest `ρ_AB(0)` a pair reaches with perfectly correlated innovations.
pub fn attainable_rho0(a: &Ar2Params, b: &Ar2Params, n: usize, seed: u64) -> Result<f64> {
    let (xa, xb) = simulate_pair(a, b, 1.0, n, seed)?;
    Ok(cross_correlation(&xa, &xb, 0))
}

fn verify_peak_correlation() -> Result<Vec<Check>> {
    let a = ar2_from_peak(0.02, 3.0)?;
    let r = cross_corr_lag1(&a, &a, 1.0, 100_000, 3)?;
    let sim = r.simulated.as_ref().map_or(f64::NAN, |s| s.rho_ab1);
    let mut out = vec![
        Check::new("3", "rho_AB(1) at w*=0.02, tau=3", r.rho_ab1, "0.9910 ± 0.0005", (r.rho_ab1 - 0.991).abs() <= 0.0005),
        Check::new("3", "rho_AB(1) exceeds bound", r.rho_ab1, "> 0.991", r.rho_ab1 > MULTICOLLINEARITY_BOUND),
        Check::new("3", "simulated rho_AB(1)", sim, "analytic ± 0.01", (sim - r.rho_ab1).abs() <= 0.01),
    ];
    let scan = peak_correlation_scan()?;
    out.push(Check::new("3", "monotone in w* and tau", scan.min_in_region, "non-increasing in w*, non-decreasing in tau", scan.monotone));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakCorrelationScan {
    pub monotone: bool,
    /// Smallest ρ_AB(1) over ω* ≤ 0.02, τ ≥ 3 on the scan grid.
    pub min_in_region: f64,
}

/// Scans ω* ∈ (0, 0.02] and τ ∈ [3, 10] for monotonicity of ρ_AB(1).
pub fn peak_correlation_scan() -> Result<PeakCorrelationScan> {
    let omegas: Vec<f64> = (1..=20).map(|i| 0.001 * i as f64).collect();
    let taus: Vec<f64> = (0..=28).map(|i| 3.0 + 0.25 * i as f64).collect();
    let mut grid = vec![vec![0.0; taus.len()]; omegas.len()];
    for (i, &w) in omegas.iter().enumerate() {
        for (j, &t) in taus.iter().enumerate() {
            grid[i][j] = multicollinearity_rho(w, t)?;
        }
    }
    let mut monotone = true;
    for i in 0..omegas.len() {
        for j in 0..taus.len() {
            if i > 0 && grid[i][j] > grid[i - 1][j] + 1e-15 {
                monotone = false;
            }
            if j > 0 && grid[i][j] + 1e-15 < grid[i][j - 1] {
                monotone = false;
            }
        }
    }
    let min_in_region = grid.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    Ok(PeakCorrelationScan { monotone, min_in_region })
}

fn verify_covtable() -> Result<Vec<Check>> {
    let t = covtable(1.0, 10.0)?;
    let (lo, hi) = (4.14 * 0.9, 5.87 * 1.1);
    let names = ["cov(x(n-1),y(n-1))", "cov(x(n-1),y(n-2))", "cov(x(n-2),y(n))"];
    let mut out: Vec<Check> = (0..3)
        .map(|i| {
            Check::new(
                "covtable",
                format!("kappa=1 / kappa=10 peak ratio, {}", names[i]),
                t.ratios[i],
                format!("[{lo:.3}, {hi:.3}]"),
                t.ratios[i] >= lo && t.ratios[i] <= hi,
            )
        })
        .collect();
    let (printed, derived) = closed_form_errors(200, 7)?;
    out.push(Check::new("covtable", "printed closed forms vs quadrature, max abs error", printed, "<= 1e-6", printed <= 1e-6));
    out.push(Check::new("covtable", "product-to-sum forms vs quadrature, max abs error", derived, "<= 1e-6", derived <= 1e-6));
    Ok(out)
}

/// Largest deviation of the printed and of the product-to-sum closed forms
/// from quadrature over `count` random non-singular `(ω0, κ)`.
pub fn closed_form_errors(count: usize, seed: u64) -> Result<(f64, f64)> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(count);
    while pts.len() < count {
        let w: f64 = rng.random_range(0.01..0.5);
        let k: f64 = rng.random_range(0.2..20.0);
        if (k - 2.0).abs() > 0.05 {
            pts.push((w, k));
        }
    }
    let errs = pts
        .par_iter()
        .map(|&(w, k)| {
            let c = modulation_covariances(w, k)?;
            let p = c.printed.expect("non-singular point");
            let ep = (0..3).map(|i| (p[i] - c.quadrature[i]).abs()).fold(0.0, f64::max);
            let ed = (0..3).map(|i| (c.derived[i] - c.quadrature[i]).abs()).fold(0.0, f64::max);
            Ok((ep, ed))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(errs.iter().fold((0.0f64, 0.0f64), |(a, b), &(p, d)| (a.max(p), b.max(d))))
}
