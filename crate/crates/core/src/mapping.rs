//! Translation of every subband to a common intermediate frequency.
//!
//! A band `[f_a, f_b)` is first demodulated by `cos(2π f_a n)` and low-passed,
//! which moves it to `[0, f_b - f_a]`. It is then remodulated by
//! `cos(2π f_i n)` and band-passed on `[f_i - (f_b - f_a), f_i]`, keeping the
//! lower sideband. A tone at `f_0` therefore ends up at `f_i - (f_0 - f_a)`.
//! DC-anchored bands skip the demodulation.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{s, Array2, Array3, ArrayView1, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::{BandComponents, BandScheme, SubbandDef};
use crate::error::{Result, ScauError};
use crate::filters::{warmup_samples, FilterDesign, FilterOptions};
use crate::frame::TimeSeriesFrame;

/// Default intermediate frequency as a fraction of the sampling rate.
pub const DEFAULT_FI_FRACTION: f64 = 0.1;

const MAGIC: &[u8; 8] = b"SCAUMT01";

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingConfig {
    pub f_i: f64,
    pub f_s: f64,
    #[serde(default = "default_true")]
    pub gain_normalization: bool,
    #[serde(default)]
    pub filter: FilterOptions,
    /// Samples dropped from the front by [`map_all`]. `None` picks a prefix
    /// long enough for the chained filters to settle.
    #[serde(default)]
    pub warmup: Option<usize>,
}

impl MappingConfig {
    pub fn new(f_s: f64) -> Self {
        Self {
            f_i: DEFAULT_FI_FRACTION * f_s,
            f_s,
            gain_normalization: true,
            filter: FilterOptions::default(),
            warmup: None,
        }
    }

    pub fn with_fi(mut self, f_i: f64) -> Self {
        self.f_i = f_i;
        self
    }

    pub fn with_warmup(mut self, warmup: usize) -> Self {
        self.warmup = Some(warmup);
        self
    }

    pub fn with_filter(mut self, filter: FilterOptions) -> Self {
        self.filter = filter;
        self
    }

    /// Checks the intermediate frequency against the widest band to be mapped.
    pub fn validate(&self, max_band_width: f64) -> Result<()> {
        if !(self.f_s > 0.0 && self.f_s.is_finite()) {
            return Err(ScauError::config(format!(
                "invalid sampling frequency {}",
                self.f_s
            )));
        }
        if !(self.f_i >= 0.05 * self.f_s) {
            return Err(ScauError::config(format!(
                "intermediate frequency {} Hz is below 0.05·f_s = {} Hz",
                self.f_i,
                0.05 * self.f_s
            )));
        }
        if self.f_i + max_band_width > self.f_s / 2.0 {
            return Err(ScauError::config(format!(
                "intermediate frequency {} Hz too high: f_i + band width {} exceeds Nyquist {} Hz",
                self.f_i,
                max_band_width,
                self.f_s / 2.0
            )));
        }
        if self.f_i <= max_band_width {
            return Err(ScauError::config(format!(
                "intermediate frequency {} Hz must exceed the band width {} Hz",
                self.f_i, max_band_width
            )));
        }
        Ok(())
    }

    /// Prefix covering the band filter and both mapping filters.
    pub fn auto_warmup(&self, scheme: &BandScheme) -> usize {
        scheme
            .bands
            .iter()
            .map(|b| 3 * warmup_samples(self.f_s, stage_one_cutoff(b).unwrap_or(b.width()).min(b.width())))
            .max()
            .unwrap_or(0)
    }
}

/// Low-pass cutoff after demodulation: midway between the wanted image edge
/// `f_b - f_a` and `f_a`, never above `f_a`. `None` for DC-anchored bands.
pub fn stage_one_cutoff(band: &SubbandDef) -> Option<f64> {
    if band.is_dc_anchored() {
        None
    } else {
        let w = band.width();
        Some((0.5 * (w + band.f_a)).min(band.f_a))
    }
}

/// Filters and constants for mapping one band.
#[derive(Debug, Clone)]
pub struct BandMapper {
    pub band: SubbandDef,
    pub stage_one: Option<FilterDesign>,
    pub stage_two: FilterDesign,
    pub gain: f64,
    f_a: f64,
    f_i: f64,
    f_s: f64,
}

impl BandMapper {
    pub fn new(band: &SubbandDef, cfg: &MappingConfig) -> Result<Self> {
        cfg.validate(band.width())?;
        let stage_one = stage_one_cutoff(band)
            .map(|fc| cfg.filter.lowpass(fc, cfg.f_s))
            .transpose()?;
        let stage_two = cfg
            .filter
            .bandpass(cfg.f_i - band.width(), cfg.f_i, cfg.f_s)?;
        let gain = match (cfg.gain_normalization, stage_one.is_some()) {
            (false, _) => 1.0,
            (true, true) => 4.0,
            (true, false) => 2.0,
        };
        Ok(Self {
            band: band.clone(),
            stage_one,
            stage_two,
            gain,
            f_a: band.f_a,
            f_i: cfg.f_i,
            f_s: cfg.f_s,
        })
    }

    pub fn map(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = match &self.stage_one {
            Some(lp) => lp.filter(&modulate(x, self.f_a, self.f_s)),
            None => x.to_vec(),
        };
        y = modulate(&y, self.f_i, self.f_s);
        let mut out = self.stage_two.filter(&y);
        if self.gain != 1.0 {
            out.iter_mut().for_each(|v| *v *= self.gain);
        }
        out
    }

    /// Where a tone at `f_0` Hz inside the band lands after mapping.
    pub fn mapped_frequency(&self, f_0: f64) -> f64 {
        self.f_i - (f_0 - self.f_a)
    }
}

fn modulate(x: &[f64], f: f64, f_s: f64) -> Vec<f64> {
    let r = f / f_s;
    x.iter()
        .enumerate()
        .map(|(n, v)| v * (2.0 * PI * (r * n as f64).fract()).cos())
        .collect()
}

/// Maps every channel of a single-band frame.
pub fn map_band(
    x_band: &TimeSeriesFrame,
    band: &SubbandDef,
    cfg: &MappingConfig,
) -> Result<TimeSeriesFrame> {
    check_rate(x_band.f_s(), cfg.f_s)?;
    x_band.check_finite()?;
    let mapper = BandMapper::new(band, cfg)?;
    x_band.map_channels(|_, x| Ok(mapper.map(x)))
}

fn check_rate(frame_fs: f64, cfg_fs: f64) -> Result<()> {
    if (frame_fs - cfg_fs).abs() > 1e-9 * cfg_fs {
        Err(ScauError::config(format!(
            "frame sampled at {frame_fs} Hz but mapping configured for {cfg_fs} Hz"
        )))
    } else {
        Ok(())
    }
}

/// Mapped series indexed by (channel, band, time).
#[derive(Debug, Clone, PartialEq)]
pub struct MappedTensor {
    pub values: Array3<f64>,
    pub channel_labels: Vec<String>,
    pub band_labels: Vec<String>,
    pub f_s: f64,
    pub f_i: f64,
}

impl MappedTensor {
    pub fn new(
        values: Array3<f64>,
        channel_labels: Vec<String>,
        band_labels: Vec<String>,
        f_s: f64,
        f_i: f64,
    ) -> Result<Self> {
        let (m, b, _) = values.dim();
        if m != channel_labels.len() || b != band_labels.len() {
            return Err(ScauError::data(format!(
                "tensor shape {m}×{b} does not match {} channel and {} band labels",
                channel_labels.len(),
                band_labels.len()
            )));
        }
        if let Some(((i, j, n), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(ScauError::NonFinite {
                channel: format!("{}:{}", channel_labels[i], band_labels[j]),
                index: n,
            });
        }
        Ok(Self {
            values: values.as_standard_layout().to_owned(),
            channel_labels,
            band_labels,
            f_s,
            f_i,
        })
    }

    pub fn n_channels(&self) -> usize {
        self.values.dim().0
    }

    pub fn n_bands(&self) -> usize {
        self.values.dim().1
    }

    pub fn len(&self) -> usize {
        self.values.dim().2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn series(&self, channel: usize, band: usize) -> ArrayView1<'_, f64> {
        self.values.slice(s![channel, band, ..])
    }

    /// Node label `channel:band`, in the channel-major node order used by SCAU fits.
    pub fn node_labels(&self) -> Vec<String> {
        self.channel_labels
            .iter()
            .flat_map(|c| self.band_labels.iter().map(move |b| format!("{c}:{b}")))
            .collect()
    }

    /// Flattens to a frame with one row per (channel, band) node.
    pub fn to_frame(&self) -> Result<TimeSeriesFrame> {
        let (m, b, n) = self.values.dim();
        let data = self
            .values
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((m * b, n))
            .map_err(|e| ScauError::numeric(e.to_string()))?;
        TimeSeriesFrame::new(self.node_labels(), self.f_s, data)
    }

    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.len() {
            return Err(ScauError::data(format!(
                "window [{start}, {}) exceeds tensor length {}",
                start + len,
                self.len()
            )));
        }
        Ok(Self {
            values: self.values.slice(s![.., .., start..start + len]).to_owned(),
            ..self.clone_meta()
        })
    }

    fn clone_meta(&self) -> Self {
        Self {
            values: Array3::zeros((0, 0, 0)),
            channel_labels: self.channel_labels.clone(),
            band_labels: self.band_labels.clone(),
            f_s: self.f_s,
            f_i: self.f_i,
        }
    }

    /// Little-endian container: magic, three u64 dims, f_s and f_i as f64,
    /// length-prefixed UTF-8 labels (channels then bands), then the values
    /// as f64 in (channel, band, time) row-major order.
    pub fn write_bin(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| ScauError::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.encode(&mut w).map_err(|e| ScauError::io(path, e))?;
        w.flush().map_err(|e| ScauError::io(path, e))
    }

    pub fn encode<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        let (m, b, n) = self.values.dim();
        for d in [m, b, n] {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        w.write_all(&self.f_s.to_le_bytes())?;
        w.write_all(&self.f_i.to_le_bytes())?;
        for label in self.channel_labels.iter().chain(&self.band_labels) {
            w.write_all(&(label.len() as u32).to_le_bytes())?;
            w.write_all(label.as_bytes())?;
        }
        for v in self.values.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_bin(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| ScauError::io(path, e))?;
        Self::decode(&mut BufReader::new(file)).map_err(|e| match e {
            ScauError::Io { source, .. } => ScauError::parse(path, source.to_string()),
            other => other,
        })
    }

    pub fn decode<R: Read>(r: &mut R) -> Result<Self> {
        let io = |e: std::io::Error| ScauError::io("<tensor>", e);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(ScauError::data("not a mapped-tensor file (bad magic)"));
        }
        let mut u64buf = [0u8; 8];
        let mut dims = [0usize; 3];
        for d in &mut dims {
            r.read_exact(&mut u64buf).map_err(io)?;
            *d = u64::from_le_bytes(u64buf) as usize;
        }
        r.read_exact(&mut u64buf).map_err(io)?;
        let f_s = f64::from_le_bytes(u64buf);
        r.read_exact(&mut u64buf).map_err(io)?;
        let f_i = f64::from_le_bytes(u64buf);
        let mut read_label = || -> Result<String> {
            let mut lb = [0u8; 4];
            r.read_exact(&mut lb).map_err(io)?;
            let mut bytes = vec![0u8; u32::from_le_bytes(lb) as usize];
            r.read_exact(&mut bytes).map_err(io)?;
            String::from_utf8(bytes).map_err(|e| ScauError::data(e.to_string()))
        };
        let channels = (0..dims[0]).map(|_| read_label()).collect::<Result<Vec<_>>>()?;
        let bands = (0..dims[1]).map(|_| read_label()).collect::<Result<Vec<_>>>()?;
        let total = dims[0] * dims[1] * dims[2];
        let mut values = Vec::with_capacity(total);
        for _ in 0..total {
            r.read_exact(&mut u64buf).map_err(io)?;
            values.push(f64::from_le_bytes(u64buf));
        }
        let values = Array3::from_shape_vec((dims[0], dims[1], dims[2]), values)
            .map_err(|e| ScauError::data(e.to_string()))?;
        Self::new(values, channels, bands, f_s, f_i)
    }

    /// Wide CSV: a `sample` column then one column per `channel:band` node.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| ScauError::parse(path, e.to_string()))?;
        let mut header = vec!["sample".to_string()];
        header.extend(self.node_labels());
        w.write_record(&header)
            .map_err(|e| ScauError::parse(path, e.to_string()))?;
        let flat = self.to_frame()?;
        for n in 0..self.len() {
            let mut row = vec![n.to_string()];
            row.extend(flat.data().column(n).iter().map(|v| v.to_string()));
            w.write_record(&row)
                .map_err(|e| ScauError::parse(path, e.to_string()))?;
        }
        w.flush().map_err(|e| ScauError::io(path, e))
    }
}

/// Maps every (channel, band) component and drops the shared warm-up prefix.
pub fn map_all(components: &BandComponents, cfg: &MappingConfig) -> Result<MappedTensor> {
    let scheme = &components.scheme;
    if components.bands.len() != scheme.len() {
        return Err(ScauError::data(format!(
            "{} band frames for a scheme of {} bands",
            components.bands.len(),
            scheme.len()
        )));
    }
    cfg.validate(scheme.max_width())?;
    let n = components.len();
    let m = components.n_channels();
    for (b, frame) in components.bands.iter().enumerate() {
        check_rate(frame.f_s(), cfg.f_s)?;
        if frame.len() != n || frame.n_channels() != m {
            return Err(ScauError::data(format!(
                "band '{}' has shape {}×{}, expected {m}×{n}",
                scheme.bands[b].label,
                frame.n_channels(),
                frame.len()
            )));
        }
        frame.check_finite()?;
    }
    let warmup = cfg.warmup.unwrap_or_else(|| cfg.auto_warmup(scheme));
    if warmup >= n {
        return Err(ScauError::data(format!(
            "series of {n} samples is not longer than the {warmup}-sample warm-up"
        )));
    }
    let mappers = scheme
        .bands
        .iter()
        .map(|b| BandMapper::new(b, cfg))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<f64>> = (0..m * scheme.len())
        .into_par_iter()
        .map(|node| {
            let (i, b) = (node / scheme.len(), node % scheme.len());
            let y = mappers[b].map(components.component(i, b));
            y[warmup..].to_vec()
        })
        .collect();
    let len = n - warmup;
    let mut flat = Array2::zeros((m * scheme.len(), len));
    for (mut row, y) in flat.axis_iter_mut(Axis(0)).zip(rows) {
        row.assign(&ArrayView1::from(&y));
    }
    let values = flat
        .into_shape_with_order((m, scheme.len(), len))
        .map_err(|e| ScauError::numeric(e.to_string()))?;
    MappedTensor::new(
        values,
        components.channel_labels().to_vec(),
        scheme.labels(),
        cfg.f_s,
        cfg.f_i,
    )
}
