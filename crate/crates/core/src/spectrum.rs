//! Periodogram and tone measurements used to inspect filtered and mapped signals.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// One-sided power spectrum on the FFT grid `k·f_s/n`, `k = 0..=n/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
}

impl Periodogram {
    pub fn resolution(&self) -> f64 {
        if self.freqs.len() > 1 {
            self.freqs[1] - self.freqs[0]
        } else {
            0.0
        }
    }

    /// Frequency of the largest non-DC bin.
    pub fn peak(&self) -> f64 {
        let k = self
            .power
            .iter()
            .enumerate()
            .skip(1)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(k, _)| k);
        self.freqs[k]
    }

    pub fn total(&self) -> f64 {
        self.power.iter().sum()
    }

    /// Power in the closed interval `[lo, hi]` Hz.
    pub fn band_power(&self, lo: f64, hi: f64) -> f64 {
        self.freqs
            .iter()
            .zip(&self.power)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn fraction_in(&self, lo: f64, hi: f64) -> f64 {
        let total = self.total();
        if total == 0.0 {
            0.0
        } else {
            self.band_power(lo, hi) / total
        }
    }
}

/// Periodogram of `x` after mean removal, optionally Hann-windowed.
pub fn periodogram(x: &[f64], f_s: f64, hann: bool) -> Periodogram {
    let n = x.len();
    if n == 0 {
        return Periodogram {
            freqs: vec![0.0],
            power: vec![0.0],
        };
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = x
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = if hann {
                0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()
            } else {
                1.0
            };
            Complex64::new((v - mean) * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let scale = 1.0 / (n as f64 * n as f64);
    let power = (0..=half)
        .map(|k| {
            let p = buf[k].norm_sqr() * scale;
            if k == 0 || (n % 2 == 0 && k == half) {
                p
            } else {
                2.0 * p
            }
        })
        .collect();
    let freqs = (0..=half).map(|k| k as f64 * f_s / n as f64).collect();
    Periodogram { freqs, power }
}

pub fn peak_frequency(x: &[f64], f_s: f64) -> f64 {
    periodogram(x, f_s, true).peak()
}

/// Amplitude of the least-squares sinusoid at `f` Hz.
pub fn tone_amplitude(x: &[f64], f_s: f64, f: f64) -> f64 {
    let (mut scc, mut sss, mut scs, mut sxc, mut sxs) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, v) in x.iter().enumerate() {
        let w = 2.0 * PI * f * i as f64 / f_s;
        let (s, c) = w.sin_cos();
        scc += c * c;
        sss += s * s;
        scs += c * s;
        sxc += v * c;
        sxs += v * s;
    }
    let det = scc * sss - scs * scs;
    if det.abs() < 1e-12 {
        return 0.0;
    }
    let a = (sxc * sss - sxs * scs) / det;
    let b = (sxs * scc - sxc * scs) / det;
    a.hypot(b)
}

pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }
}

/// Sample autocorrelation of `x` at lag `k`.
pub fn autocorrelation(x: &[f64], k: usize) -> f64 {
    cross_correlation(x, x, k)
}

/// Sample correlation between `a(n)` and `b(n - k)`.
pub fn cross_correlation(a: &[f64], b: &[f64], k: usize) -> f64 {
    let n = a.len().min(b.len());
    if n <= k {
        return 0.0;
    }
    let ma = a[..n].iter().sum::<f64>() / n as f64;
    let mb = b[..n].iter().sum::<f64>() / n as f64;
    let va: f64 = a[..n].iter().map(|v| (v - ma).powi(2)).sum();
    let vb: f64 = b[..n].iter().map(|v| (v - mb).powi(2)).sum();
    let c: f64 = (k..n).map(|i| (a[i] - ma) * (b[i - k] - mb)).sum();
    c / (va * vb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_peak_and_amplitude() {
        let f_s = 200.0;
        let x: Vec<f64> = (0..4000)
            .map(|i| 1.5 * (2.0 * PI * 12.5 * i as f64 / f_s + 0.3).sin())
            .collect();
        let p = periodogram(&x, f_s, false);
        assert!((p.peak() - 12.5).abs() < 1e-9);
        assert!((p.total() - 1.5 * 1.5 / 2.0).abs() < 1e-9);
        assert!((tone_amplitude(&x, f_s, 12.5) - 1.5).abs() < 1e-9);
        assert!(p.fraction_in(12.0, 13.0) > 0.999);
    }

    #[test]
    fn correlation_of_shifted_copy() {
        let x: Vec<f64> = (0..500).map(|i| ((i * 7919) % 101) as f64).collect();
        let y: Vec<f64> = std::iter::once(0.0).chain(x.iter().copied()).take(500).collect();
        assert!(cross_correlation(&y, &x, 1) > 0.99);
        assert!((autocorrelation(&x, 0) - 1.0).abs() < 1e-12);
    }
}
