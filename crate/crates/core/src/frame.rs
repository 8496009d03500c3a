//! Multichannel, uniformly sampled signal container.

use std::path::Path;

use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScauError};

/// A set of equally long channels sampled at a common rate.
///
/// Samples are stored channel-major (`channels × samples`), so each channel
/// is a contiguous slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesFrame {
    labels: Vec<String>,
    f_s: f64,
    data: Array2<f64>,
}

impl TimeSeriesFrame {
    pub fn new(labels: Vec<String>, f_s: f64, data: Array2<f64>) -> Result<Self> {
        if !(f_s > 0.0 && f_s.is_finite()) {
            return Err(ScauError::config(format!(
                "sampling frequency must be positive, got {f_s}"
            )));
        }
        if labels.len() != data.nrows() {
            return Err(ScauError::data(format!(
                "{} labels for {} channels",
                labels.len(),
                data.nrows()
            )));
        }
        let data = if data.is_standard_layout() {
            data
        } else {
            data.as_standard_layout().to_owned()
        };
        Ok(Self { labels, f_s, data })
    }

    /// Builds a frame from per-channel sample vectors of equal length.
    pub fn from_channels(labels: Vec<String>, f_s: f64, channels: Vec<Vec<f64>>) -> Result<Self> {
        let len = channels.first().map_or(0, Vec::len);
        if channels.iter().any(|c| c.len() != len) {
            return Err(ScauError::data("channels have different lengths"));
        }
        let rows = channels.len();
        let flat: Vec<f64> = channels.into_iter().flatten().collect();
        let data = Array2::from_shape_vec((rows, len), flat)
            .map_err(|e| ScauError::data(e.to_string()))?;
        Self::new(labels, f_s, data)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn f_s(&self) -> f64 {
        self.f_s
    }

    pub fn n_channels(&self) -> usize {
        self.data.nrows()
    }

    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }

    pub fn channel(&self, i: usize) -> &[f64] {
        self.data
            .row(i)
            .to_slice()
            .expect("frame data is kept in standard layout")
    }

    pub fn channel_view(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(i)
    }

    pub fn channel_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Returns the first non-finite sample, if any.
    pub fn check_finite(&self) -> Result<()> {
        for (i, row) in self.data.axis_iter(Axis(0)).enumerate() {
            if let Some(index) = row.iter().position(|v| !v.is_finite()) {
                return Err(ScauError::NonFinite {
                    channel: self.labels[i].clone(),
                    index,
                });
            }
        }
        Ok(())
    }

    /// Keeps only the named channels, in the given order.
    pub fn select(&self, labels: &[String]) -> Result<Self> {
        let idx = labels
            .iter()
            .map(|l| {
                self.channel_index(l)
                    .ok_or_else(|| ScauError::data(format!("missing channel '{l}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        let data = self.data.select(Axis(0), &idx);
        Self::new(labels.to_vec(), self.f_s, data)
    }

    /// Samples `[start, start + len)` of every channel.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.len() {
            return Err(ScauError::data(format!(
                "window [{start}, {}) exceeds frame length {}",
                start + len,
                self.len()
            )));
        }
        let data = self
            .data
            .slice(ndarray::s![.., start..start + len])
            .to_owned();
        Self::new(self.labels.clone(), self.f_s, data)
    }

    /// Applies `f` to every channel, producing a frame of the same shape.
    pub fn map_channels<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, &[f64]) -> Result<Vec<f64>>,
    {
        let mut out = Vec::with_capacity(self.n_channels());
        for i in 0..self.n_channels() {
            let y = f(i, self.channel(i))?;
            if y.len() != self.len() {
                return Err(ScauError::numeric("channel transform changed the length"));
            }
            out.push(y);
        }
        Self::from_channels(self.labels.clone(), self.f_s, out)
    }

    /// Per-channel sample means.
    pub fn means(&self) -> Vec<f64> {
        self.data
            .mean_axis(Axis(1))
            .map(|m| m.to_vec())
            .unwrap_or_else(|| vec![0.0; self.n_channels()])
    }

    /// Copy with every channel shifted to zero mean.
    pub fn centered(&self) -> Self {
        let mut data = self.data.clone();
        for mut row in data.axis_iter_mut(Axis(0)) {
            let n = row.len().max(1) as f64;
            let m = row.sum() / n;
            row.mapv_inplace(|v| v - m);
        }
        Self {
            labels: self.labels.clone(),
            f_s: self.f_s,
            data,
        }
    }

    /// Writes one header row of labels and one row per sample, the layout
    /// [`crate::ingest::load_csv`] reads.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let err = |e: csv::Error| ScauError::parse(path, e.to_string());
        let mut w = csv::Writer::from_path(path).map_err(err)?;
        w.write_record(&self.labels).map_err(err)?;
        for col in self.data.axis_iter(Axis(1)) {
            w.write_record(col.iter().map(|v| v.to_string())).map_err(err)?;
        }
        w.flush().map_err(|e| ScauError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame() -> TimeSeriesFrame {
        TimeSeriesFrame::from_channels(
            vec!["a".into(), "b".into()],
            100.0,
            vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]],
        )
        .unwrap()
    }

    #[test]
    fn select_and_slice() {
        let f = frame();
        let s = f.select(&["b".to_string()]).unwrap();
        assert_eq!(s.channel(0), &[4.0, 5.0, 6.0]);
        let w = f.slice(1, 2).unwrap();
        assert_eq!(w.channel(1), &[5.0, 6.0]);
        assert!(f.slice(2, 2).is_err());
        assert!(f.select(&["zz".to_string()]).is_err());
    }

    #[test]
    fn non_finite_is_located() {
        let f = TimeSeriesFrame::from_channels(
            vec!["a".into(), "b".into()],
            10.0,
            vec![vec![0.0, 1.0], vec![2.0, f64::NAN]],
        )
        .unwrap();
        match f.check_finite() {
            Err(ScauError::NonFinite { channel, index }) => {
                assert_eq!(channel, "b");
                assert_eq!(index, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn centering() {
        let c = frame().centered();
        assert_eq!(c.channel(0), &[-1.0, 0.0, 1.0]);
    }
}
