//! Cascaded Butterworth low-pass and band-pass filters.
//!
//! Each design is a single recursive section (denominator `a`, gain `k_o`,
//! numerator shape `b`) that is applied `stages` times in series. Poles come
//! from the analog Butterworth prototype mapped through the bilinear
//! transform after frequency prewarping; the gain is normalized so the
//! passband reference frequency (DC for low-pass, the band center for
//! band-pass) has unit magnitude per stage.
//!
//! Filtering is strictly causal: state starts at zero and each output sample
//! depends only on current and past inputs.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScauError};
use crate::frame::TimeSeriesFrame;

/// Default per-stage Butterworth order.
pub const DEFAULT_ORDER: usize = 3;
/// Default number of cascaded stages.
pub const DEFAULT_STAGES: usize = 3;
/// Conventional bilinear-transform prewarp constant.
pub const DEFAULT_PREWARP: f64 = 2.0;

/// Pass band of a filter, in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FilterBand {
    Lowpass { f_c: f64 },
    Bandpass { f_c1: f64, f_c2: f64 },
}

/// How the numerator of each stage is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignMode {
    /// Bilinear-transform zeros included (`z = -1` for low-pass, `z = ±1` for band-pass).
    #[default]
    Standard,
    /// All-pole recursion `y = k_o x - Σ a_l y(n - l)` with the same poles and no zeros.
    AllPole,
}

fn default_order() -> usize {
    DEFAULT_ORDER
}

fn default_stages() -> usize {
    DEFAULT_STAGES
}

fn default_prewarp() -> f64 {
    DEFAULT_PREWARP
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    #[serde(flatten)]
    pub band: FilterBand,
    pub f_s: f64,
    #[serde(default = "default_order", alias = "order_per_stage")]
    pub order: usize,
    #[serde(default = "default_stages")]
    pub stages: usize,
    /// Constant `K` in the analog edge frequency `K·tan(π f / f_s)`. The
    /// bilinear map itself always uses 2, so any other value shifts the
    /// realized cutoff.
    #[serde(default = "default_prewarp")]
    pub prewarp_constant: f64,
    #[serde(default)]
    pub mode: DesignMode,
}

impl FilterSpec {
    pub fn lowpass(f_c: f64, f_s: f64) -> Self {
        Self {
            band: FilterBand::Lowpass { f_c },
            f_s,
            order: DEFAULT_ORDER,
            stages: DEFAULT_STAGES,
            prewarp_constant: DEFAULT_PREWARP,
            mode: DesignMode::Standard,
        }
    }

    pub fn bandpass(f_c1: f64, f_c2: f64, f_s: f64) -> Self {
        Self {
            band: FilterBand::Bandpass { f_c1, f_c2 },
            ..Self::lowpass(f_c1, f_s)
        }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn with_stages(mut self, stages: usize) -> Self {
        self.stages = stages;
        self
    }

    pub fn with_prewarp(mut self, k: f64) -> Self {
        self.prewarp_constant = k;
        self
    }

    pub fn with_mode(mut self, mode: DesignMode) -> Self {
        self.mode = mode;
        self
    }

    fn validate(&self) -> Result<()> {
        let nyq = self.f_s / 2.0;
        if !(self.f_s > 0.0 && self.f_s.is_finite()) {
            return Err(ScauError::config(format!("invalid sampling frequency {}", self.f_s)));
        }
        if self.order == 0 {
            return Err(ScauError::config("filter order must be at least 1"));
        }
        if self.stages == 0 {
            return Err(ScauError::config("filter needs at least one stage"));
        }
        if !(self.prewarp_constant > 0.0 && self.prewarp_constant.is_finite()) {
            return Err(ScauError::config("prewarp constant must be positive"));
        }
        match self.band {
            FilterBand::Lowpass { f_c } => {
                if !(f_c > 0.0) {
                    return Err(ScauError::config(format!("cutoff {f_c} Hz must be positive")));
                }
                if f_c >= nyq {
                    return Err(ScauError::config(format!(
                        "cutoff {f_c} Hz aliases: must be below Nyquist {nyq} Hz"
                    )));
                }
            }
            FilterBand::Bandpass { f_c1, f_c2 } => {
                if !(f_c1 > 0.0) || f_c2 >= nyq {
                    return Err(ScauError::config(format!(
                        "band [{f_c1}, {f_c2}] Hz must lie inside (0, {nyq}) Hz"
                    )));
                }
                if f_c1 >= f_c2 {
                    return Err(ScauError::config(format!(
                        "lower cutoff {f_c1} Hz must be below upper cutoff {f_c2} Hz"
                    )));
                }
                if f_c2 - f_c1 < self.f_s / 1000.0 {
                    return Err(ScauError::config(format!(
                        "bandwidth {} Hz is ill-conditioned (minimum {} Hz)",
                        f_c2 - f_c1,
                        self.f_s / 1000.0
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Order, stage count and design mode shared by every filter a pipeline step builds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterOptions {
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_stages")]
    pub stages: usize,
    #[serde(default = "default_prewarp")]
    pub prewarp_constant: f64,
    #[serde(default)]
    pub mode: DesignMode,
}

impl Default for FilterOptions {
    fn default() -> Self {
        Self {
            order: DEFAULT_ORDER,
            stages: DEFAULT_STAGES,
            prewarp_constant: DEFAULT_PREWARP,
            mode: DesignMode::Standard,
        }
    }
}

impl FilterOptions {
    pub fn spec(&self, band: FilterBand, f_s: f64) -> FilterSpec {
        FilterSpec {
            band,
            f_s,
            order: self.order,
            stages: self.stages,
            prewarp_constant: self.prewarp_constant,
            mode: self.mode,
        }
    }

    pub fn lowpass(&self, f_c: f64, f_s: f64) -> Result<FilterDesign> {
        design_lowpass(&self.spec(FilterBand::Lowpass { f_c }, f_s))
    }

    pub fn bandpass(&self, f_c1: f64, f_c2: f64, f_s: f64) -> Result<FilterDesign> {
        design_bandpass(&self.spec(FilterBand::Bandpass { f_c1, f_c2 }, f_s))
    }
}

/// A designed filter: one recursive section applied `stages` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterDesign {
    #[serde(flatten)]
    pub band: FilterBand,
    pub f_s: f64,
    pub order: usize,
    pub stages: usize,
    /// Denominator coefficients `a_1..a_M` (the leading `a_0 = 1` is implicit).
    pub a: Vec<f64>,
    /// Per-stage gain.
    pub k_o: f64,
    /// Numerator shape `b_0..b_M` before the gain is applied.
    pub b: Vec<f64>,
    /// Warped (analog) reference frequency: cutoff for low-pass, geometric
    /// center for band-pass.
    pub omega_o: f64,
    /// Warped bandwidth, band-pass only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_omega: Option<f64>,
    /// Digital poles as `[re, im]` pairs.
    pub poles: Vec<[f64; 2]>,
    pub prewarp_constant: f64,
    pub mode: DesignMode,
}

/// Analog Butterworth prototype poles with unit cutoff, all in the left half plane.
pub fn prototype_poles(order: usize) -> Vec<Complex64> {
    let n = order as f64;
    (1..=order)
        .map(|k| Complex64::from_polar(1.0, PI * (2.0 * k as f64 + n - 1.0) / (2.0 * n)))
        .collect()
}

fn bilinear(s: Complex64) -> Complex64 {
    (Complex64::new(2.0, 0.0) + s) / (Complex64::new(2.0, 0.0) - s)
}

/// Expands `∏ (1 - r_k z^-1)` into real coefficients `[1, c_1, .., c_M]`.
fn expand_roots(roots: &[Complex64]) -> Vec<f64> {
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        poly = next;
    }
    poly.into_iter().map(|c| c.re).collect()
}

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for _ in 0..n {
        let mut next = vec![0.0; row.len() + 1];
        for (i, &c) in row.iter().enumerate() {
            next[i] += c;
            next[i + 1] += c;
        }
        row = next;
    }
    row
}

fn eval_poly(coeffs: &[f64], zinv: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * zinv + c)
}

/// Designs a cascaded Butterworth low-pass filter.
pub fn design_lowpass(spec: &FilterSpec) -> Result<FilterDesign> {
    spec.validate()?;
    let FilterBand::Lowpass { f_c } = spec.band else {
        return Err(ScauError::config("design_lowpass needs a low-pass spec"));
    };
    let omega_o = spec.prewarp_constant * (PI * f_c / spec.f_s).tan();
    let poles: Vec<Complex64> = prototype_poles(spec.order)
        .into_iter()
        .map(|p| bilinear(omega_o * p))
        .collect();
    let b = match spec.mode {
        DesignMode::Standard => binomial_row(spec.order),
        DesignMode::AllPole => vec![1.0],
    };
    finish(spec, poles, b, omega_o, None, 0.0)
}

/// Designs a cascaded Butterworth band-pass filter.
pub fn design_bandpass(spec: &FilterSpec) -> Result<FilterDesign> {
    spec.validate()?;
    let FilterBand::Bandpass { f_c1, f_c2 } = spec.band else {
        return Err(ScauError::config("design_bandpass needs a band-pass spec"));
    };
    let k = spec.prewarp_constant;
    let w1 = k * (PI * f_c1 / spec.f_s).tan();
    let w2 = k * (PI * f_c2 / spec.f_s).tan();
    let omega_o = (w1 * w2).sqrt();
    let b_omega = w2 - w1;
    let mut poles = Vec::with_capacity(2 * spec.order);
    for p in prototype_poles(spec.order) {
        let half = p * (b_omega / 2.0);
        let root = (half * half - omega_o * omega_o).sqrt();
        poles.push(bilinear(half + root));
        poles.push(bilinear(half - root));
    }
    let b = match spec.mode {
        // (1 - z^-2)^N: N zeros at z = 1 and N at z = -1.
        DesignMode::Standard => {
            let row = binomial_row(spec.order);
            let mut b = vec![0.0; 2 * spec.order + 1];
            for (i, c) in row.into_iter().enumerate() {
                b[2 * i] = if i % 2 == 0 { c } else { -c };
            }
            b
        }
        DesignMode::AllPole => vec![1.0],
    };
    // Digital frequency that the analog center maps to under the bilinear map.
    let f_center = spec.f_s / PI * (omega_o / 2.0).atan();
    finish(spec, poles, b, omega_o, Some(b_omega), f_center)
}

/// Designs either kind from the spec.
pub fn design(spec: &FilterSpec) -> Result<FilterDesign> {
    match spec.band {
        FilterBand::Lowpass { .. } => design_lowpass(spec),
        FilterBand::Bandpass { .. } => design_bandpass(spec),
    }
}

fn finish(
    spec: &FilterSpec,
    poles: Vec<Complex64>,
    b: Vec<f64>,
    omega_o: f64,
    b_omega: Option<f64>,
    f_ref: f64,
) -> Result<FilterDesign> {
    if let Some(p) = poles.iter().find(|p| p.norm() >= 1.0) {
        return Err(ScauError::Unstable { radius: p.norm() });
    }
    let den = expand_roots(&poles);
    let zinv = Complex64::from_polar(1.0, -2.0 * PI * f_ref / spec.f_s);
    let k_o = (eval_poly(&den, zinv) / eval_poly(&b, zinv)).norm();
    if !k_o.is_finite() || k_o == 0.0 {
        return Err(ScauError::numeric("degenerate filter gain"));
    }
    Ok(FilterDesign {
        band: spec.band,
        f_s: spec.f_s,
        order: spec.order,
        stages: spec.stages,
        a: den[1..].to_vec(),
        k_o,
        b,
        omega_o,
        b_omega,
        poles: poles.iter().map(|p| [p.re, p.im]).collect(),
        prewarp_constant: spec.prewarp_constant,
        mode: spec.mode,
    })
}

impl FilterDesign {
    /// Number of delay elements in one stage.
    pub fn state_len(&self) -> usize {
        self.a.len().max(self.b.len().saturating_sub(1))
    }

    pub fn max_pole_modulus(&self) -> f64 {
        self.poles
            .iter()
            .map(|[re, im]| re.hypot(*im))
            .fold(0.0, f64::max)
    }

    /// Response of one stage at `f_hz`.
    pub fn stage_response(&self, f_hz: f64) -> Complex64 {
        let zinv = Complex64::from_polar(1.0, -2.0 * PI * f_hz / self.f_s);
        let mut den = vec![1.0];
        den.extend_from_slice(&self.a);
        self.k_o * eval_poly(&self.b, zinv) / eval_poly(&den, zinv)
    }

    /// Response of the whole cascade at `f_hz`.
    pub fn response(&self, f_hz: f64) -> Complex64 {
        self.stage_response(f_hz).powu(self.stages as u32)
    }

    /// Filters one channel with fresh state.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut state = FilterState::new(self);
        x.iter().map(|&v| state.step(self, v)).collect()
    }

    /// Filters every channel of a frame; channels run in parallel.
    pub fn apply(&self, x: &TimeSeriesFrame) -> Result<TimeSeriesFrame> {
        apply(self, x)
    }
}

/// Delay lines for every stage of a cascade (transposed direct form II).
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    stages: Vec<Vec<f64>>,
}

impl FilterState {
    pub fn new(design: &FilterDesign) -> Self {
        Self {
            stages: vec![vec![0.0; design.state_len()]; design.stages],
        }
    }

    pub fn delay_lines(&self) -> &[Vec<f64>] {
        &self.stages
    }

    pub fn reset(&mut self) {
        for s in &mut self.stages {
            s.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    /// Pushes one input sample through all stages.
    pub fn step(&mut self, design: &FilterDesign, x: f64) -> f64 {
        let mut v = x;
        for w in &mut self.stages {
            v = df2t_step(design, w, v);
        }
        v
    }
}

#[inline]
fn df2t_step(d: &FilterDesign, w: &mut [f64], x: f64) -> f64 {
    let b = |i: usize| d.b.get(i).copied().unwrap_or(0.0) * d.k_o;
    let a = |i: usize| if i == 0 { 1.0 } else { d.a.get(i - 1).copied().unwrap_or(0.0) };
    let m = w.len();
    let y = b(0) * x + if m > 0 { w[0] } else { 0.0 };
    for i in 0..m {
        let next = if i + 1 < m { w[i + 1] } else { 0.0 };
        w[i] = b(i + 1) * x - a(i + 1) * y + next;
    }
    y
}

/// Causal filtering of every channel in `x`.
pub fn apply(design: &FilterDesign, x: &TimeSeriesFrame) -> Result<TimeSeriesFrame> {
    if x.is_empty() {
        return Err(ScauError::data("cannot filter an empty frame"));
    }
    if (x.f_s() - design.f_s).abs() > 1e-9 * design.f_s {
        return Err(ScauError::config(format!(
            "frame sampled at {} Hz but filter designed for {} Hz",
            x.f_s(),
            design.f_s
        )));
    }
    x.check_finite()?;
    let channels: Vec<Vec<f64>> = (0..x.n_channels())
        .into_par_iter()
        .map(|i| design.filter(x.channel(i)))
        .collect();
    TimeSeriesFrame::from_channels(x.labels().to_vec(), x.f_s(), channels)
}

/// Samples to discard before estimation after filtering with cutoff `f_c`.
pub fn warmup_samples(f_s: f64, f_c: f64) -> usize {
    ((3.0 * f_s / f_c).ceil() as usize).max(200)
}

/// Evaluates the closed-form cascade response on a frequency grid.
pub fn frequency_response(design: &FilterDesign, freqs: &[f64]) -> Vec<(f64, f64, f64)> {
    freqs
        .iter()
        .map(|&f| {
            let h = design.response(f);
            (f, h.norm(), h.arg())
        })
        .collect()
}
