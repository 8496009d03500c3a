//! Subband scheme and decomposition of channels into 4 Hz-wide oscillations.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ScauError};
use crate::filters::{FilterDesign, FilterOptions};
use crate::frame::TimeSeriesFrame;

/// Width of every default subband, in Hz.
pub const BAND_WIDTH_HZ: f64 = 4.0;

const DEFAULT_LABELS: [&str; 12] = [
    "delta", "theta", "alpha", "beta1", "beta2", "beta3", "beta4", "beta5", "gamma1", "gamma2",
    "gamma3", "gamma4",
];

/// One half-open frequency interval `[f_a, f_b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubbandDef {
    pub label: String,
    pub f_a: f64,
    pub f_b: f64,
}

impl SubbandDef {
    pub fn new(label: impl Into<String>, f_a: f64, f_b: f64) -> Self {
        Self {
            label: label.into(),
            f_a,
            f_b,
        }
    }

    pub fn width(&self) -> f64 {
        self.f_b - self.f_a
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.f_a + self.f_b)
    }

    /// Bands anchored at DC are decomposed with a low-pass filter.
    pub fn is_dc_anchored(&self) -> bool {
        self.f_a == 0.0
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.f_a && f < self.f_b
    }

    /// Greek-letter rendering of the default labels, for display.
    pub fn symbol(&self) -> String {
        let (head, tail) = self
            .label
            .find(|c: char| c.is_ascii_digit())
            .map_or((self.label.as_str(), ""), |i| self.label.split_at(i));
        let greek = match head {
            "delta" => "δ",
            "theta" => "θ",
            "alpha" => "α",
            "beta" => "β",
            "gamma" => "γ",
            other => other,
        };
        format!("{greek}{tail}")
    }
}

/// Ordered, contiguous set of subbands at a given sampling rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandScheme {
    pub bands: Vec<SubbandDef>,
    pub f_s: f64,
}

impl BandScheme {
    pub fn new(bands: Vec<SubbandDef>, f_s: f64) -> Result<Self> {
        let scheme = Self { bands, f_s };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bands.is_empty() {
            return Err(ScauError::config("band scheme is empty"));
        }
        for (i, b) in self.bands.iter().enumerate() {
            if !(b.f_a >= 0.0 && b.f_a < b.f_b) {
                return Err(ScauError::config(format!(
                    "band '{}' has invalid edges [{}, {})",
                    b.label, b.f_a, b.f_b
                )));
            }
            if !b.is_dc_anchored() && b.f_b > 3.0 * b.f_a {
                return Err(ScauError::config(format!(
                    "band '{}' [{}, {}) is too wide for frequency mapping (needs f_b <= 3 f_a)",
                    b.label, b.f_a, b.f_b
                )));
            }
            if i > 0 && (b.f_a - self.bands[i - 1].f_b).abs() > 1e-9 {
                return Err(ScauError::config(format!(
                    "bands '{}' and '{}' are not contiguous",
                    self.bands[i - 1].label,
                    b.label
                )));
            }
        }
        let top = self.bands.last().map_or(0.0, |b| b.f_b);
        if top >= self.f_s / 2.0 {
            return Err(ScauError::config(format!(
                "top band edge {top} Hz is not below Nyquist {} Hz",
                self.f_s / 2.0
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.bands.iter().map(|b| b.label.clone()).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.bands.iter().position(|b| b.label == label)
    }

    /// Band containing `f`, if any.
    pub fn band_of(&self, f: f64) -> Option<usize> {
        self.bands.iter().position(|b| b.contains(f))
    }

    pub fn max_width(&self) -> f64 {
        self.bands.iter().map(SubbandDef::width).fold(0.0, f64::max)
    }

    /// Keeps only the named bands. The result need not be contiguous, so it
    /// is not re-validated for contiguity.
    pub fn subset(&self, labels: &[&str]) -> Result<Self> {
        let bands = labels
            .iter()
            .map(|l| {
                self.index_of(l)
                    .map(|i| self.bands[i].clone())
                    .ok_or_else(|| ScauError::config(format!("unknown band '{l}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            bands,
            f_s: self.f_s,
        })
    }
}

/// The twelve contiguous 4 Hz divisions δ, θ, α, β1..β5, γ1..γ4 covering [0, 48) Hz.
pub fn default_scheme(f_s: f64) -> Result<BandScheme> {
    let top = BAND_WIDTH_HZ * DEFAULT_LABELS.len() as f64;
    if !(f_s > 2.0 * top) {
        return Err(ScauError::config(format!(
            "sampling frequency {f_s} Hz is too low for the default bands (needs > {} Hz)",
            2.0 * top
        )));
    }
    let bands = DEFAULT_LABELS
        .iter()
        .enumerate()
        .map(|(i, l)| {
            SubbandDef::new(*l, BAND_WIDTH_HZ * i as f64, BAND_WIDTH_HZ * (i + 1) as f64)
        })
        .collect();
    BandScheme::new(bands, f_s)
}

/// Filter isolating one band: low-pass for DC-anchored bands, band-pass otherwise.
pub fn band_filter(band: &SubbandDef, f_s: f64, opts: &FilterOptions) -> Result<FilterDesign> {
    if band.is_dc_anchored() {
        opts.lowpass(band.f_b, f_s)
    } else {
        opts.bandpass(band.f_a, band.f_b, f_s)
    }
}

/// Output of [`decompose`]: one frame per band, each holding every channel.
#[derive(Debug, Clone, PartialEq)]
pub struct BandComponents {
    pub scheme: BandScheme,
    pub bands: Vec<TimeSeriesFrame>,
}

impl BandComponents {
    pub fn n_channels(&self) -> usize {
        self.bands.first().map_or(0, TimeSeriesFrame::n_channels)
    }

    pub fn len(&self) -> usize {
        self.bands.first().map_or(0, TimeSeriesFrame::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel_labels(&self) -> &[String] {
        self.bands.first().map_or(&[], |f| f.labels())
    }

    pub fn component(&self, channel: usize, band: usize) -> &[f64] {
        self.bands[band].channel(channel)
    }
}

/// Splits every channel of `x` into the subbands of `scheme`.
pub fn decompose(x: &TimeSeriesFrame, scheme: &BandScheme) -> Result<BandComponents> {
    decompose_with(x, scheme, &FilterOptions::default())
}

pub fn decompose_with(
    x: &TimeSeriesFrame,
    scheme: &BandScheme,
    opts: &FilterOptions,
) -> Result<BandComponents> {
    if (x.f_s() - scheme.f_s).abs() > 1e-9 * scheme.f_s {
        return Err(ScauError::config(format!(
            "frame sampled at {} Hz but scheme defined for {} Hz",
            x.f_s(),
            scheme.f_s
        )));
    }
    let bands = scheme
        .bands
        .iter()
        .map(|b| band_filter(b, scheme.f_s, opts)?.apply(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(BandComponents {
        scheme: scheme.clone(),
        bands,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn default_scheme_layout() {
        let s = default_scheme(200.0).unwrap();
        assert_eq!(s.len(), 12);
        assert_eq!(s.bands[0], SubbandDef::new("delta", 0.0, 4.0));
        assert_eq!(s.bands[11], SubbandDef::new("gamma4", 44.0, 48.0));
        assert_eq!(s.bands[0].f_a, 0.0);
        assert_eq!(s.bands.last().unwrap().f_b, 48.0);
        for w in s.bands.windows(2) {
            assert_eq!(w[0].f_b, w[1].f_a);
        }
        assert_eq!(s.band_of(10.0), Some(2));
        assert_eq!(s.band_of(12.0), Some(3));
        assert_eq!(s.bands[4].symbol(), "β2");
        assert!(default_scheme(80.0).is_err());
        assert!(default_scheme(96.0).is_err());
    }

    #[test]
    fn wide_band_is_rejected() {
        let bad = BandScheme::new(vec![SubbandDef::new("x", 4.0, 16.0)], 200.0);
        assert!(bad.is_err());
        let gap = BandScheme::new(
            vec![SubbandDef::new("a", 0.0, 4.0), SubbandDef::new("b", 5.0, 8.0)],
            200.0,
        );
        assert!(gap.is_err());
    }

    #[test]
    fn ten_hz_lands_in_alpha() {
        let f_s = 200.0;
        let n = 4000;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * 10.0 * i as f64 / f_s).sin()).collect();
        let frame = TimeSeriesFrame::from_channels(vec!["c".into()], f_s, vec![x]).unwrap();
        let s = default_scheme(f_s).unwrap();
        let out = decompose(&frame, &s).unwrap();
        let warm = 1000;
        let r: Vec<f64> = (0..12).map(|b| rms(&out.component(0, b)[warm..])).collect();
        let alpha = r[2];
        for (b, &v) in r.iter().enumerate() {
            if b != 2 {
                assert!(alpha >= 20.0 * v, "band {b}: {v} vs alpha {alpha}");
            }
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let frame =
            TimeSeriesFrame::from_channels(vec!["c".into()], 200.0, vec![vec![0.0; 500]]).unwrap();
        let out = decompose(&frame, &default_scheme(200.0).unwrap()).unwrap();
        assert_eq!(out.bands.len(), 12);
        assert!(out.bands.iter().all(|f| f.channel(0).iter().all(|&v| v == 0.0)));
    }
}
