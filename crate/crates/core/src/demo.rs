//! A small synthetic study on disk: per-subject recordings with two extra
//! electrodes and an ocular channel, marker files and a pipeline config that
//! ties them together.
//!
//! During the task window of every `WG` trial, δ of the first channel
//! modulates θ of the third; `FX` trials and all rest periods carry no link.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bands::default_scheme;
use crate::connectivity::EdgeKey;
use crate::error::{Result, ScauError};
use crate::ingest::{write_markers, Marker, RecordingConfig, TrialLayout};
use crate::oracle::{gen_modulated_network, ModulationLink, NetworkSpec};
use crate::pipeline::{PipelineConfig, SubjectInput};

pub const EOG_CHANNEL: &str = "VEOG";

#[derive(Debug, Clone, PartialEq)]
pub struct DemoOptions {
    pub subjects: usize,
    /// Trials of each task per subject; tasks alternate.
    pub trials_per_task: usize,
    pub seed: u64,
    /// Model order written into the config.
    pub order: usize,
    pub link_gain: f64,
    /// Ocular artifact amplitude relative to the EEG components.
    pub eog_gain: f64,
    /// Length of each task and rest window in seconds.
    pub window_s: f64,
}

impl Default for DemoOptions {
    fn default() -> Self {
        Self {
            subjects: 3,
            trials_per_task: 2,
            seed: 7,
            order: 3,
            link_gain: 0.8,
            eog_gain: 2.0,
            window_s: 40.0,
        }
    }
}

/// The injected edge, δ(F1) → θ(P7), in (channel, band) coordinates.
pub fn demo_truth() -> EdgeKey {
    EdgeKey::full(0, 0, 2, 1)
}

fn trial_samples(rec: &RecordingConfig) -> usize {
    let l = &rec.layout;
    ((l.instruction_s + l.task_s + l.stop_s + l.rest_max_s) * rec.f_s).round() as usize
}

fn ocular(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = 0.0;
    (0..n)
        .map(|_| {
            let e: f64 = StandardNormal.sample(&mut rng);
            v = 0.995 * v + 0.1 * e;
            v
        })
        .collect()
}

/// Writes `s<k>.csv`, `s<k>_markers.csv` and `config.json` into `dir` and
/// returns the config path.
pub fn write_demo_bundle(dir: &Path, opts: &DemoOptions) -> Result<PathBuf> {
    if opts.subjects == 0 || opts.trials_per_task == 0 {
        return Err(ScauError::config("demo needs at least one subject and one trial per task"));
    }
    if !(opts.window_s >= 1.0) {
        return Err(ScauError::config("demo windows must last at least a second"));
    }
    fs::create_dir_all(dir).map_err(|e| ScauError::io(dir, e))?;
    let base = RecordingConfig::default();
    // Windows fill the whole task and the rest after the stop signal.
    let layout = TrialLayout {
        task_s: opts.window_s,
        rest_min_s: base.layout.stop_s + opts.window_s,
        rest_max_s: base.layout.stop_s + opts.window_s + 1.0,
        ..base.layout.clone()
    };
    let recording = RecordingConfig {
        eog_channels: vec![EOG_CHANNEL.into()],
        samples_per_step: (opts.window_s * base.f_s).round() as usize,
        layout,
        ..base
    };
    let scheme = default_scheme(recording.f_s)?;
    // Extra electrodes enter the common average; with only the analysis
    // channels the referenced set would be rank deficient.
    let mut channels = recording.analysis_channels.clone();
    channels.extend(["Cz", "Pz"].map(String::from));
    let idle = NetworkSpec::new(channels.clone(), scheme);
    let truth = demo_truth();
    let link = ModulationLink::new(
        (truth.source_channel.unwrap(), truth.source_band.unwrap()),
        (truth.target_channel.unwrap(), truth.target_band.unwrap()),
        opts.link_gain,
    );
    let linked = idle.clone().with_link(link);
    let per_trial = trial_samples(&recording);
    let n_trials = 2 * opts.trials_per_task;
    let n = per_trial * n_trials;
    let task_start = recording.layout.task_offset(recording.f_s);
    let task_len = (recording.layout.task_s * recording.f_s).round() as usize;
    let mut subjects = Vec::new();
    for s in 0..opts.subjects {
        let id = format!("s{:02}", s + 1);
        let seed = opts.seed.wrapping_mul(1000).wrapping_add(s as u64);
        // Same seed, so both share every background oscillator and differ
        // only by the modulation term.
        let quiet = gen_modulated_network(&idle, n, seed)?.frame;
        let active = gen_modulated_network(&linked, n, seed)?.frame;
        let eog = ocular(n, seed ^ 0xe0e0);
        let mut markers = Vec::new();
        let mut in_link = vec![false; n];
        for t in 0..n_trials {
            let onset = t * per_trial;
            let label = if t % 2 == 0 { "WG" } else { "FX" };
            if label == "WG" {
                in_link[onset + task_start..onset + task_start + task_len].fill(true);
            }
            markers.push(Marker {
                trial_index: t,
                onset_sample: onset,
                label: label.into(),
            });
        }
        let data_path = dir.join(format!("{id}.csv"));
        let file = fs::File::create(&data_path).map_err(|e| ScauError::io(&data_path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let io = |e| ScauError::io(&data_path, e);
        writeln!(w, "{},{EOG_CHANNEL}", channels.join(",")).map_err(io)?;
        for i in 0..n {
            let src = if in_link[i] { &active } else { &quiet };
            for c in 0..channels.len() {
                // Leakage falls off from frontal to parietal sites.
                let leak = opts.eog_gain / (1.0 + c as f64);
                write!(w, "{},", src.data()[[c, i]] + leak * eog[i]).map_err(io)?;
            }
            writeln!(w, "{}", eog[i]).map_err(io)?;
        }
        w.flush().map_err(io)?;
        let markers_path = dir.join(format!("{id}_markers.csv"));
        write_markers(&markers_path, &markers)?;
        subjects.push(SubjectInput {
            id: id.clone(),
            data: PathBuf::from(format!("{id}.csv")),
            markers: PathBuf::from(format!("{id}_markers.csv")),
        });
    }
    let mut cfg: PipelineConfig = serde_json::from_value(serde_json::json!({ "subjects": [] }))
        .map_err(|e| ScauError::config(e.to_string()))?;
    cfg.seed = opts.seed;
    cfg.recording = recording;
    cfg.subjects = subjects;
    cfg.order = opts.order;
    let path = dir.join("config.json");
    let text = serde_json::to_string_pretty(&cfg).map_err(|e| ScauError::numeric(e.to_string()))?;
    fs::write(&path, text).map_err(|e| ScauError::io(&path, e))?;
    Ok(path)
}
