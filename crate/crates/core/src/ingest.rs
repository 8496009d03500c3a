//! Recording ingestion: CSV loading, EOG lag regression, common-average
//! referencing and trial segmentation.

use std::path::Path;

use log::warn;
use nalgebra::DMatrix;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScauError};
use crate::frame::TimeSeriesFrame;
use crate::varfit::ols;

/// Timing of one trial, in seconds from its onset marker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialLayout {
    pub instruction_s: f64,
    pub task_s: f64,
    pub stop_s: f64,
    /// Rest length varies between trials; the shortest value bounds the window.
    pub rest_min_s: f64,
    pub rest_max_s: f64,
}

impl Default for TrialLayout {
    fn default() -> Self {
        Self {
            instruction_s: 2.0,
            task_s: 10.0,
            stop_s: 1.0,
            rest_min_s: 13.0,
            rest_max_s: 15.0,
        }
    }
}

impl TrialLayout {
    /// Offset of the task window from the onset.
    pub fn task_offset(&self, f_s: f64) -> usize {
        (self.instruction_s * f_s).round() as usize
    }

    /// Offset of the rest window from the onset (after instruction, task and stop).
    pub fn rest_offset(&self, f_s: f64) -> usize {
        ((self.instruction_s + self.task_s + self.stop_s) * f_s).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecordingConfig {
    pub f_s: f64,
    /// Channels the file must contain besides the analysis and EOG channels.
    pub channels: Vec<String>,
    pub eog_channels: Vec<String>,
    pub eog_lags: usize,
    pub analysis_channels: Vec<String>,
    pub layout: TrialLayout,
    pub samples_per_step: usize,
    pub task_labels: Vec<String>,
    /// Regress out EOG before common-average referencing (otherwise after).
    pub eog_before_car: bool,
}

impl Default for RecordingConfig {
    fn default() -> Self {
        Self {
            f_s: 200.0,
            channels: Vec::new(),
            eog_channels: Vec::new(),
            eog_lags: 2,
            analysis_channels: ["F1", "F2", "P7", "P8"].map(String::from).to_vec(),
            layout: TrialLayout::default(),
            samples_per_step: 1000,
            task_labels: vec!["WG".into(), "FX".into()],
            eog_before_car: true,
        }
    }
}

impl RecordingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_s > 0.0 && self.f_s.is_finite()) {
            return Err(ScauError::config(format!("sampling frequency {} must be positive", self.f_s)));
        }
        if self.samples_per_step == 0 {
            return Err(ScauError::config("samples_per_step must be positive"));
        }
        let task_len = self.layout.task_s * self.f_s;
        if self.samples_per_step as f64 > task_len + 1e-9 {
            return Err(ScauError::config(format!(
                "samples_per_step {} exceeds the task length of {task_len} samples",
                self.samples_per_step
            )));
        }
        let rest_len = (self.layout.rest_min_s - self.layout.stop_s) * self.f_s;
        if self.samples_per_step as f64 > rest_len + 1e-9 {
            return Err(ScauError::config(format!(
                "samples_per_step {} exceeds the shortest rest of {rest_len} samples",
                self.samples_per_step
            )));
        }
        if self.analysis_channels.is_empty() {
            return Err(ScauError::config("no analysis channels configured"));
        }
        if !self.channels.is_empty() {
            for c in &self.analysis_channels {
                if !self.channels.contains(c) {
                    return Err(ScauError::config(format!("analysis channel '{c}' is not among the recording channels")));
                }
            }
        }
        if self.task_labels.len() != 2 {
            return Err(ScauError::config(format!(
                "exactly two task labels are contrasted, got {}",
                self.task_labels.len()
            )));
        }
        Ok(())
    }

    fn required_channels(&self) -> Vec<String> {
        let mut req = self.channels.clone();
        for c in self.analysis_channels.iter().chain(&self.eog_channels) {
            if !req.contains(c) {
                req.push(c.clone());
            }
        }
        req
    }
}

/// Reads a CSV with one header row of channel names and one sample per row.
pub fn load_csv(path: &Path, cfg: &RecordingConfig) -> Result<TimeSeriesFrame> {
    let file = std::fs::File::open(path).map_err(|e| ScauError::io(path, e))?;
    read_csv(file, path, cfg)
}

pub fn read_csv<R: std::io::Read>(reader: R, path: &Path, cfg: &RecordingConfig) -> Result<TimeSeriesFrame> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| ScauError::parse(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(ScauError::parse(path, "empty file: no header row"));
    }
    for c in cfg.required_channels() {
        if !header.contains(&c) {
            return Err(ScauError::parse(path, format!("missing channel '{c}' in header")));
        }
    }
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for (r, rec) in rdr.records().enumerate() {
        // Row numbers count the header as line 1.
        let line = r + 2;
        let rec = rec.map_err(|e| ScauError::parse(path, format!("line {line}: {e}")))?;
        if rec.len() != header.len() {
            return Err(ScauError::parse(
                path,
                format!("line {line}: expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        for (c, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                ScauError::parse(path, format!("line {line}, column {} ('{}'): '{cell}' is not a number", c + 1, header[c]))
            })?;
            if !v.is_finite() {
                return Err(ScauError::parse(
                    path,
                    format!("line {line}, column {} ('{}'): non-finite value '{cell}'", c + 1, header[c]),
                ));
            }
            cols[c].push(v);
        }
    }
    if cols[0].is_empty() {
        return Err(ScauError::parse(path, "empty file: no samples after the header"));
    }
    log::info!("{}: {} rows, {} channels", path.display(), cols[0].len(), header.len());
    TimeSeriesFrame::from_channels(header, cfg.f_s, cols)
}

/// Replaces each non-EOG channel by its residual after regressing it on the
/// EOG channels at lags `0..=eog_lags` (plus an intercept). EOG channels are
/// dropped from the output. Samples before the first lag are treated as zero.
pub fn remove_eog(frame: &TimeSeriesFrame, cfg: &RecordingConfig) -> Result<TimeSeriesFrame> {
    if cfg.eog_channels.is_empty() {
        warn!("no EOG channels configured; skipping ocular regression");
        return Ok(frame.clone());
    }
    let eog_idx = cfg
        .eog_channels
        .iter()
        .map(|c| frame.channel_index(c).ok_or_else(|| ScauError::data(format!("missing EOG channel '{c}'"))))
        .collect::<Result<Vec<_>>>()?;
    for (&i, name) in eog_idx.iter().zip(&cfg.eog_channels) {
        let x = frame.channel(i);
        let m = x.iter().sum::<f64>() / x.len() as f64;
        if x.iter().all(|v| (v - m).abs() <= 1e-12 * m.abs().max(1.0)) {
            return Err(ScauError::data(format!("EOG channel '{name}' is constant")));
        }
    }
    let eeg_idx: Vec<usize> = (0..frame.n_channels()).filter(|i| !eog_idx.contains(i)).collect();
    let n = frame.len();
    let lags = cfg.eog_lags;
    let k = 1 + eog_idx.len() * (lags + 1);
    if n <= k {
        return Err(ScauError::data(format!("{n} samples are too few for EOG regression with {k} regressors")));
    }
    let x = DMatrix::from_fn(n, k, |t, c| {
        if c == 0 {
            return 1.0;
        }
        let (e, l) = ((c - 1) / (lags + 1), (c - 1) % (lags + 1));
        if t >= l {
            frame.channel(eog_idx[e])[t - l]
        } else {
            0.0
        }
    });
    let y = DMatrix::from_fn(n, eeg_idx.len(), |t, c| frame.channel(eeg_idx[c])[t]);
    let fit = ols(&x, &y)?;
    let labels = eeg_idx.iter().map(|&i| frame.labels()[i].clone()).collect();
    let data = Array2::from_shape_fn((eeg_idx.len(), n), |(c, t)| fit.residuals[(t, c)]);
    TimeSeriesFrame::new(labels, frame.f_s(), data)
}

/// Subtracts the per-sample mean across channels from every channel.
pub fn common_average_reference(frame: &TimeSeriesFrame) -> Result<TimeSeriesFrame> {
    let m = frame.n_channels();
    if m < 2 {
        return Err(ScauError::data("common-average referencing needs at least two channels"));
    }
    let d = frame.data();
    let mean = d.mean_axis(ndarray::Axis(0)).expect("non-empty");
    let data = Array2::from_shape_fn(d.dim(), |(c, t)| d[[c, t]] - mean[t]);
    TimeSeriesFrame::new(frame.labels().to_vec(), frame.f_s(), data)
}

/// EOG regression and common-average referencing in the configured order.
pub fn preprocess(frame: &TimeSeriesFrame, cfg: &RecordingConfig) -> Result<TimeSeriesFrame> {
    frame.check_finite()?;
    if cfg.eog_before_car {
        common_average_reference(&remove_eog(frame, cfg)?)
    } else {
        let eog: Vec<String> = cfg.eog_channels.clone();
        let eeg: Vec<String> = frame.labels().iter().filter(|l| !eog.contains(l)).cloned().collect();
        let car = common_average_reference(&frame.select(&eeg)?)?;
        if eog.is_empty() {
            return Ok(car);
        }
        let mut labels = car.labels().to_vec();
        labels.extend(eog.iter().cloned());
        let mut rows: Vec<Vec<f64>> = (0..car.n_channels()).map(|i| car.channel(i).to_vec()).collect();
        for e in &eog {
            rows.push(frame.select(std::slice::from_ref(e))?.channel(0).to_vec());
        }
        remove_eog(&TimeSeriesFrame::from_channels(labels, frame.f_s(), rows)?, cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Marker {
    pub trial_index: usize,
    pub onset_sample: usize,
    pub label: String,
}

pub fn load_markers(path: &Path) -> Result<Vec<Marker>> {
    let file = std::fs::File::open(path).map_err(|e| ScauError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut out = Vec::new();
    for (r, rec) in rdr.deserialize::<Marker>().enumerate() {
        out.push(rec.map_err(|e| ScauError::parse(path, format!("line {}: {e}", r + 2)))?);
    }
    if out.is_empty() {
        return Err(ScauError::parse(path, "no markers"));
    }
    Ok(out)
}

pub fn write_markers(path: &Path, markers: &[Marker]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| ScauError::parse(path, e.to_string()))?;
    for m in markers {
        w.serialize(m).map_err(|e| ScauError::parse(path, e.to_string()))?;
    }
    w.flush().map_err(|e| ScauError::io(path, e))
}

/// Start samples of one trial's task and rest windows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialWindow {
    pub trial_index: usize,
    pub label: String,
    pub task_start: usize,
    pub rest_start: usize,
}

/// Windows for every marker whose rest window ends inside `len` samples;
/// returns the windows and the number of dropped trials.
pub fn trial_windows(cfg: &RecordingConfig, markers: &[Marker], len: usize) -> Result<(Vec<TrialWindow>, usize)> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(markers.len());
    let mut dropped = 0;
    for m in markers {
        if !cfg.task_labels.contains(&m.label) {
            return Err(ScauError::data(format!(
                "trial {} has label '{}', expected one of {:?}",
                m.trial_index, m.label, cfg.task_labels
            )));
        }
        let task_start = m.onset_sample + cfg.layout.task_offset(cfg.f_s);
        let rest_start = m.onset_sample + cfg.layout.rest_offset(cfg.f_s);
        if rest_start + cfg.samples_per_step > len {
            warn!("trial {} extends past the end of the recording; dropped", m.trial_index);
            dropped += 1;
            continue;
        }
        out.push(TrialWindow {
            trial_index: m.trial_index,
            label: m.label.clone(),
            task_start,
            rest_start,
        });
    }
    Ok((out, dropped))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub trial_index: usize,
    pub label: String,
    pub task: TimeSeriesFrame,
    pub rest: TimeSeriesFrame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSet {
    pub subject: String,
    pub trials: Vec<Trial>,
    pub dropped: usize,
}

impl TrialSet {
    pub fn with_label<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a Trial> + 'a {
        self.trials.iter().filter(move |t| t.label == label)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| ScauError::numeric(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| ScauError::data(format!("invalid trial set JSON: {e}")))
    }
}

/// Cuts the task window (after the instruction) and the rest window (after
/// the stop signal) of every trial, each `samples_per_step` long.
pub fn segment_trials(
    frame: &TimeSeriesFrame,
    cfg: &RecordingConfig,
    markers: &[Marker],
    subject: &str,
) -> Result<TrialSet> {
    let (windows, dropped) = trial_windows(cfg, markers, frame.len())?;
    let trials = windows
        .into_iter()
        .map(|w| {
            Ok(Trial {
                task: frame.slice(w.task_start, cfg.samples_per_step)?,
                rest: frame.slice(w.rest_start, cfg.samples_per_step)?,
                trial_index: w.trial_index,
                label: w.label,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialSet {
        subject: subject.to_string(),
        trials,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn cfg_with_eog() -> RecordingConfig {
        RecordingConfig {
            eog_channels: vec!["VEOG".into()],
            analysis_channels: vec!["A".into(), "B".into()],
            ..Default::default()
        }
    }

    #[test]
    fn loads_well_formed_csv() {
        let mut text = String::from("A,B,C\n");
        for i in 0..100 {
            text += &format!("{i},{},{}\n", i as f64 * 0.5, -(i as f64));
        }
        let cfg = RecordingConfig {
            analysis_channels: vec!["A".into(), "B".into()],
            ..Default::default()
        };
        let f = read_csv(text.as_bytes(), Path::new("x.csv"), &cfg).unwrap();
        assert_eq!((f.n_channels(), f.len()), (3, 100));
        assert_eq!(f.channel(1)[4], 2.0);
    }

    #[test]
    fn csv_errors_name_the_problem() {
        let cfg = RecordingConfig::default();
        let e = read_csv("F2,P7,P8\n1,2,3\n".as_bytes(), Path::new("x.csv"), &cfg).unwrap_err();
        assert!(e.to_string().contains("F1"), "{e}");
        let e = read_csv("F1,F2,P7,P8\n1,2,3,4\n1,NaN,3,4\n".as_bytes(), Path::new("x.csv"), &cfg).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 3") && msg.contains("column 2"), "{msg}");
        let e = read_csv("F1,F2,P7,P8\n1,2,x,4\n".as_bytes(), Path::new("x.csv"), &cfg).unwrap_err();
        assert!(e.to_string().contains("column 3"), "{e}");
        assert!(read_csv("".as_bytes(), Path::new("x.csv"), &cfg).is_err());
        assert!(read_csv("F1,F2,P7,P8\n".as_bytes(), Path::new("x.csv"), &cfg).is_err());
    }

    #[test]
    fn eog_regression_removes_lagged_leak() {
        let n = 5000;
        let eog = noise(n, 1);
        let e = noise(n, 2);
        let a: Vec<f64> = (0..n).map(|t| 0.5 * if t > 0 { eog[t - 1] } else { 0.0 } + 0.3 * e[t]).collect();
        let b = noise(n, 3);
        let f = TimeSeriesFrame::from_channels(vec!["A".into(), "B".into(), "VEOG".into()], 200.0, vec![a, b.clone(), eog]).unwrap();
        let out = remove_eog(&f, &cfg_with_eog()).unwrap();
        assert_eq!(out.labels(), &["A".to_string(), "B".to_string()]);
        let var = |x: &[f64]| {
            let m = x.iter().sum::<f64>() / x.len() as f64;
            x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64
        };
        assert!(var(out.channel(0)) <= 0.09 * var(&e) * 1.05);
        let corr = crate::spectrum::cross_correlation(out.channel(1), &b, 0);
        assert!(corr >= 0.99, "corr {corr}");
    }

    #[test]
    fn eog_edge_cases() {
        let f = TimeSeriesFrame::from_channels(vec!["A".into(), "VEOG".into()], 200.0, vec![noise(100, 1), vec![1.0; 100]]).unwrap();
        assert!(remove_eog(&f, &cfg_with_eog()).is_err());
        let plain = RecordingConfig::default();
        assert_eq!(remove_eog(&f, &plain).unwrap(), f);
    }

    #[test]
    fn car_properties() {
        let same = TimeSeriesFrame::from_channels(vec!["a".into(), "b".into()], 1.0, vec![vec![1.0, 2.0, 3.0]; 2]).unwrap();
        assert!(common_average_reference(&same).unwrap().data().iter().all(|&v| v == 0.0));
        let one = TimeSeriesFrame::from_channels(vec!["a".into()], 1.0, vec![vec![1.0]]).unwrap();
        assert!(common_average_reference(&one).is_err());
    }

    #[test]
    fn segmentation_follows_protocol() {
        let n = 200 * 60 * 5;
        let f = TimeSeriesFrame::from_channels(vec!["F1".into()], 200.0, vec![(0..n).map(|v| v as f64).collect()]).unwrap();
        let cfg = RecordingConfig::default();
        let markers = vec![
            Marker { trial_index: 0, onset_sample: 0, label: "WG".into() },
            Marker { trial_index: 1, onset_sample: n - 3600, label: "FX".into() },
            Marker { trial_index: 2, onset_sample: n - 100, label: "FX".into() },
        ];
        let set = segment_trials(&f, &cfg, &markers, "s01").unwrap();
        assert_eq!(set.trials.len(), 2);
        assert_eq!(set.dropped, 1);
        assert_eq!(set.trials[0].task.channel(0)[0], 400.0);
        assert_eq!(set.trials[0].rest.channel(0)[0], 2600.0);
        assert_eq!(set.trials[0].task.len(), 1000);
        assert_eq!(set.trials[1].label, "FX");
        let bad = vec![Marker { trial_index: 0, onset_sample: 0, label: "ZZ".into() }];
        assert!(segment_trials(&f, &cfg, &bad, "s01").is_err());
    }

    #[test]
    fn sixty_trials() {
        let cfg = RecordingConfig::default();
        let trial_len = 200 * 28;
        let markers: Vec<Marker> = (0..60)
            .map(|i| Marker {
                trial_index: i,
                onset_sample: i * trial_len,
                label: if i % 2 == 0 { "WG" } else { "FX" }.into(),
            })
            .collect();
        let (w, dropped) = trial_windows(&cfg, &markers, 60 * trial_len).unwrap();
        assert_eq!((w.len(), dropped), (60, 0));
        assert_eq!(w.iter().filter(|t| t.label == "WG").count(), 30);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn residuals_orthogonal_to_eog_lags(seed in 0u64..1000, lags in 0usize..4) {
            let n = 600;
            let eog = noise(n, seed);
            let a: Vec<f64> = noise(n, seed + 1).iter().zip(&eog).map(|(x, e)| x + 0.7 * e).collect();
            let f = TimeSeriesFrame::from_channels(vec!["A".into(), "VEOG".into()], 200.0, vec![a, eog.clone()]).unwrap();
            let cfg = RecordingConfig { eog_lags: lags, ..cfg_with_eog() };
            let out = remove_eog(&f, &cfg).unwrap();
            let r = out.channel(0);
            let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            for l in 0..=lags {
                let dot: f64 = (l..n).map(|t| r[t] * eog[t - l]).sum();
                let en = (l..n).map(|t| eog[t - l].powi(2)).sum::<f64>().sqrt();
                prop_assert!(dot.abs() <= 1e-6 * rn * en);
            }
        }

        #[test]
        fn car_rows_sum_to_zero_and_ignore_common_signal(seed in 0u64..1000, shift in -5.0f64..5.0) {
            let chans: Vec<Vec<f64>> = (0..4).map(|c| noise(50, seed * 7 + c)).collect();
            let common = noise(50, seed + 99);
            let f = TimeSeriesFrame::from_channels((0..4).map(|c| c.to_string()).collect(), 1.0, chans.clone()).unwrap();
            let g = TimeSeriesFrame::from_channels(
                (0..4).map(|c| c.to_string()).collect(),
                1.0,
                chans.iter().map(|ch| ch.iter().zip(&common).map(|(x, s)| x + shift * s).collect()).collect(),
            ).unwrap();
            let a = common_average_reference(&f).unwrap();
            let b = common_average_reference(&g).unwrap();
            for t in 0..50 {
                let s: f64 = (0..4).map(|c| a.channel(c)[t]).sum();
                prop_assert!(s.abs() <= 1e-12);
                for c in 0..4 {
                    prop_assert!((a.channel(c)[t] - b.channel(c)[t]).abs() <= 1e-9);
                }
            }
        }

        #[test]
        fn segmentation_keeps_in_bounds_trials(onsets in proptest::collection::vec(0usize..20000, 1..20)) {
            let cfg = RecordingConfig::default();
            let len = 15000;
            let markers: Vec<Marker> = onsets.iter().enumerate().map(|(i, &o)| Marker {
                trial_index: i, onset_sample: o, label: if i % 3 == 0 { "WG" } else { "FX" }.into(),
            }).collect();
            let (w, dropped) = trial_windows(&cfg, &markers, len).unwrap();
            let expected = onsets.iter().filter(|&&o| o + 2600 + 1000 <= len).count();
            prop_assert_eq!(w.len(), expected);
            prop_assert_eq!(w.len() + dropped, markers.len());
            for t in &w {
                prop_assert_eq!(&t.label, &markers[t.trial_index].label);
            }
        }
    }
}
