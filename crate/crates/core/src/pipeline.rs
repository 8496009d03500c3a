//! End-to-end analysis: recordings, band components, mapped series, VAR and
//! SCAU fits, flows, relative connectivity, contrasts and bootstrap summaries.

use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bands::{decompose_with, default_scheme, BandScheme, SubbandDef};
use crate::connectivity::{
    aggregate, contrast_named, flow, normalized_band, relative_connectivity, summary_network, ContrastEdge,
    ContrastNetwork, EdgeMap, Level, ModelKind, PdcNormalization, DEFAULT_POINTS, DEFAULT_SUMMARY_THRESHOLD,
};
use crate::error::{Result, ScauError};
use crate::filters::FilterOptions;
use crate::frame::TimeSeriesFrame;
use crate::ingest::{load_csv, load_markers, preprocess, trial_windows, RecordingConfig, TrialWindow};
use crate::lassle::{fit_scau, LassoConfig};
use crate::mapping::{map_all, MappedTensor, MappingConfig};
use crate::resampling::{bootstrap_edges, BootstrapConfig};
use crate::varfit::{fit_var, DEFAULT_ORDER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectInput {
    pub id: String,
    pub data: PathBuf,
    pub markers: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Dot,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
            OutputFormat::Dot => "dot",
        }
    }
}

/// What one bootstrap draw resamples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BootstrapUnit {
    /// Subjects, with trial-level relative connectivity averaged within subject first.
    #[default]
    Subject,
    /// Trial pairs: the k-th trial of one task against the k-th trial of the other.
    Trial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelsConfig {
    pub var: bool,
    pub scau: bool,
}

impl Default for ModelsConfig {
    fn default() -> Self {
        Self { var: true, scau: true }
    }
}

fn default_order() -> usize {
    DEFAULT_ORDER
}
fn default_levels() -> Vec<Level> {
    vec![Level::C2c, Level::F2c, Level::C2f, Level::Fc2fc]
}
fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Json, OutputFormat::Csv, OutputFormat::Dot]
}
fn default_points() -> usize {
    DEFAULT_POINTS
}
fn default_threshold() -> f64 {
    DEFAULT_SUMMARY_THRESHOLD
}

/// Everything `run` needs. Every random choice derives from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub recording: RecordingConfig,
    pub subjects: Vec<SubjectInput>,
    /// Custom band layout; the twelve 4 Hz bands when absent.
    #[serde(default)]
    pub bands: Option<Vec<SubbandDef>>,
    /// Intermediate frequency in Hz; a tenth of the sampling rate when absent.
    #[serde(default)]
    pub f_i: Option<f64>,
    #[serde(default)]
    pub filter: FilterOptions,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub lasso: LassoConfig,
    #[serde(default)]
    pub bootstrap: BootstrapConfig,
    #[serde(default)]
    pub bootstrap_unit: BootstrapUnit,
    #[serde(default = "default_levels")]
    pub levels: Vec<Level>,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
    #[serde(default)]
    pub pdc: PdcNormalization,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_threshold")]
    pub summary_threshold: f64,
    #[serde(default)]
    pub models: ModelsConfig,
}

impl PipelineConfig {
    /// Reads a config file, or the config embedded in a run manifest.
    /// Relative input paths are resolved against the file's directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| ScauError::io(path, e))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| ScauError::parse(path, e.to_string()))?;
        let value = match value.get("config") {
            Some(inner) if value.get("config_hash").is_some() => inner.clone(),
            _ => value,
        };
        let mut cfg: Self = serde_json::from_value(value).map_err(|e| ScauError::parse(path, e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for s in &mut cfg.subjects {
            if s.data.is_relative() {
                s.data = base.join(&s.data);
            }
            if s.markers.is_relative() {
                s.markers = base.join(&s.markers);
            }
        }
        Ok(cfg)
    }

    pub fn scheme(&self) -> Result<BandScheme> {
        match &self.bands {
            Some(b) => BandScheme::new(b.clone(), self.recording.f_s),
            None => default_scheme(self.recording.f_s),
        }
    }

    /// Settings for the per-recording analysis, seeds filled in from the root seed.
    pub fn analysis(&self) -> Result<AnalysisConfig> {
        self.recording.validate()?;
        let scheme = self.scheme()?;
        let mut mapping = MappingConfig::new(self.recording.f_s).with_filter(self.filter).with_warmup(0);
        if let Some(f_i) = self.f_i {
            mapping = mapping.with_fi(f_i);
        }
        let cfg = AnalysisConfig {
            scheme,
            mapping,
            order: self.order,
            lasso: LassoConfig {
                seed: self.seed,
                ..self.lasso.clone()
            },
            points: self.points,
            pdc: self.pdc,
            models: self.models,
            tasks: [self.recording.task_labels[0].clone(), self.recording.task_labels[1].clone()],
            samples_per_step: self.recording.samples_per_step,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn bootstrap_config(&self) -> BootstrapConfig {
        BootstrapConfig {
            seed: self.seed,
            ..self.bootstrap.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.recording.validate()?;
        if self.subjects.is_empty() {
            return Err(ScauError::config("no subjects listed"));
        }
        for s in &self.subjects {
            for p in [&s.data, &s.markers] {
                if !p.is_file() {
                    return Err(ScauError::config(format!("subject '{}': file {} not found", s.id, p.display())));
                }
            }
        }
        self.analysis()?;
        self.bootstrap_config().validate()?;
        if self.levels.is_empty() {
            return Err(ScauError::config("no aggregation levels requested"));
        }
        if self.formats.is_empty() {
            return Err(ScauError::config("no output formats requested"));
        }
        if !(self.summary_threshold > 0.0 && self.summary_threshold <= 1.0) {
            return Err(ScauError::config(format!("summary threshold {} outside (0, 1]", self.summary_threshold)));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Per-recording settings shared by the file-driven run and in-memory callers.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub scheme: BandScheme,
    pub mapping: MappingConfig,
    pub order: usize,
    pub lasso: LassoConfig,
    pub points: usize,
    pub pdc: PdcNormalization,
    pub models: ModelsConfig,
    pub tasks: [String; 2],
    pub samples_per_step: usize,
}

impl AnalysisConfig {
    pub fn new(scheme: BandScheme) -> Self {
        let f_s = scheme.f_s;
        Self {
            scheme,
            mapping: MappingConfig::new(f_s).with_warmup(0),
            order: DEFAULT_ORDER,
            lasso: LassoConfig::default(),
            points: DEFAULT_POINTS,
            pdc: PdcNormalization::PerSource,
            models: ModelsConfig::default(),
            tasks: ["WG".into(), "FX".into()],
            samples_per_step: 1000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        self.mapping.validate(self.scheme.max_width())?;
        self.lasso.validate()?;
        if self.order == 0 {
            return Err(ScauError::config("model order must be at least 1"));
        }
        if self.points < 2 {
            return Err(ScauError::config("integration needs at least 2 points"));
        }
        if !self.models.var && !self.models.scau {
            return Err(ScauError::config("both models are disabled"));
        }
        Ok(())
    }
}

/// Full-range SCAU flows of one mapped segment.
pub fn scau_flows(z: &MappedTensor, cfg: &AnalysisConfig) -> Result<EdgeMap> {
    let fit = fit_scau(z, cfg.order, &cfg.lasso).map_err(|e| e.in_stage("fit-scau"))?;
    let f = flow(&fit.phi, fit.node_labels(), 0.0, 0.5, cfg.points, cfg.pdc).map_err(|e| e.in_stage("connectivity"))?;
    EdgeMap::from_scau_flow(&f, z.channel_labels.clone(), z.band_labels.clone())
}

/// Band-restricted VAR flows of one raw segment.
pub fn var_flows(x: &TimeSeriesFrame, cfg: &AnalysisConfig) -> Result<EdgeMap> {
    let fit = fit_var(x, cfg.order).map_err(|e| e.in_stage("fit-var"))?;
    let flows = cfg
        .scheme
        .bands
        .iter()
        .map(|b| {
            let (lo, hi) = normalized_band(b.f_a, b.f_b, cfg.scheme.f_s)?;
            let mut m = flow(&fit.phi, fit.labels.clone(), lo, hi, cfg.points, cfg.pdc)?;
            m.band = Some(b.label.clone());
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("connectivity"))?;
    EdgeMap::from_var_flows(&flows, x.labels().to_vec(), cfg.scheme.labels())
}

/// Task-period flow and relative connectivity for one trial and one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMaps {
    pub task_flow: EdgeMap,
    pub c: EdgeMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConnectivity {
    pub trial_index: usize,
    pub label: String,
    pub scau: Option<TrialMaps>,
    pub var: Option<TrialMaps>,
}

impl TrialConnectivity {
    pub fn model(&self, model: ModelKind) -> Option<&TrialMaps> {
        match model {
            ModelKind::Scau => self.scau.as_ref(),
            ModelKind::Var => self.var.as_ref(),
        }
    }
}

/// Maps the whole preprocessed recording once, then fits every trial's task
/// and rest windows.
pub fn analyze_recording(frame: &TimeSeriesFrame, windows: &[TrialWindow], cfg: &AnalysisConfig) -> Result<Vec<TrialConnectivity>> {
    cfg.validate()?;
    let mapped = if cfg.models.scau {
        let comps = decompose_with(frame, &cfg.scheme, &cfg.mapping.filter).map_err(|e| e.in_stage("decompose"))?;
        Some(map_all(&comps, &cfg.mapping).map_err(|e| e.in_stage("map"))?)
    } else {
        None
    };
    let len = cfg.samples_per_step;
    windows
        .par_iter()
        .map(|w| {
            let scau = match &mapped {
                Some(z) => {
                    let task = scau_flows(&z.slice(w.task_start, len)?, cfg)?;
                    let rest = scau_flows(&z.slice(w.rest_start, len)?, cfg)?;
                    let c = relative_connectivity(&task, &rest)?;
                    Some(TrialMaps { task_flow: task, c })
                }
                None => None,
            };
            let var = if cfg.models.var {
                let task = var_flows(&frame.slice(w.task_start, len)?, cfg)?;
                let rest = var_flows(&frame.slice(w.rest_start, len)?, cfg)?;
                let c = relative_connectivity(&task, &rest)?;
                Some(TrialMaps { task_flow: task, c })
            } else {
                None
            };
            Ok(TrialConnectivity {
                trial_index: w.trial_index,
                label: w.label.clone(),
                scau,
                var,
            })
        })
        .collect()
}

fn mean_maps<'a>(maps: impl Iterator<Item = &'a EdgeMap>) -> Result<EdgeMap> {
    let v: Vec<EdgeMap> = maps.cloned().collect();
    EdgeMap::mean(&v)
}

fn unit_network(a: &[&TrialMaps], b: &[&TrialMaps], tasks: &[String; 2]) -> Result<ContrastNetwork> {
    if a.is_empty() || b.is_empty() {
        return Err(ScauError::data(format!(
            "need trials of both '{}' and '{}' for a contrast",
            tasks[0], tasks[1]
        )));
    }
    let c_a = mean_maps(a.iter().map(|t| &t.c))?;
    let c_b = mean_maps(b.iter().map(|t| &t.c))?;
    let f_a = mean_maps(a.iter().map(|t| &t.task_flow))?;
    let f_b = mean_maps(b.iter().map(|t| &t.task_flow))?;
    let mut net = contrast_named(&c_a, &c_b, tasks.clone())?;
    for (i, e) in net.edges.iter_mut().enumerate() {
        e.flow_a = Some(f_a.values[i]);
        e.flow_b = Some(f_b.values[i]);
    }
    Ok(net)
}

fn split<'a>(trials: &'a [TrialConnectivity], model: ModelKind, tasks: &[String; 2]) -> Result<(Vec<&'a TrialMaps>, Vec<&'a TrialMaps>)> {
    let pick = |label: &str| -> Result<Vec<&TrialMaps>> {
        trials
            .iter()
            .filter(|t| t.label == label)
            .map(|t| t.model(model).ok_or_else(|| ScauError::config("model was not fitted")))
            .collect()
    };
    Ok((pick(&tasks[0])?, pick(&tasks[1])?))
}

/// One contrast network per subject: trial-level `c` averaged per task, then `d`.
pub fn subject_network(trials: &[TrialConnectivity], model: ModelKind, tasks: &[String; 2]) -> Result<ContrastNetwork> {
    let (a, b) = split(trials, model, tasks)?;
    unit_network(&a, &b, tasks)
}

/// One contrast network per trial pair (k-th trial of each task).
pub fn trial_pair_networks(trials: &[TrialConnectivity], model: ModelKind, tasks: &[String; 2]) -> Result<Vec<ContrastNetwork>> {
    let (a, b) = split(trials, model, tasks)?;
    a.iter().zip(&b).map(|(x, y)| unit_network(&[*x], &[*y], tasks)).collect()
}

/// Averages unit networks at `level`. With a bootstrap config and two or
/// more units, each edge carries a percentile interval for the mean `d`.
pub fn group_network(units: &[ContrastNetwork], level: Level, boot: Option<&BootstrapConfig>) -> Result<ContrastNetwork> {
    let agg = units.iter().map(|u| aggregate(u, level)).collect::<Result<Vec<_>>>()?;
    let first = agg.first().ok_or_else(|| ScauError::data("no units to combine"))?;
    let n = agg.len() as f64;
    for u in &agg {
        if u.edges.len() != first.edges.len() || u.edges.iter().zip(&first.edges).any(|(a, b)| a.key != b.key) {
            return Err(ScauError::data("unit networks have different edges"));
        }
    }
    let mean = |f: &dyn Fn(&ContrastEdge) -> f64, i: usize| agg.iter().map(|u| f(&u.edges[i])).sum::<f64>() / n;
    let mean_opt = |f: &dyn Fn(&ContrastEdge) -> Option<f64>, i: usize| -> Option<f64> {
        agg.iter().map(|u| f(&u.edges[i])).sum::<Option<f64>>().map(|s| s / n)
    };
    let summaries = match boot {
        Some(cfg) if agg.len() >= 2 => {
            let samples: Vec<Vec<f64>> = (0..first.edges.len())
                .map(|i| agg.iter().map(|u| u.edges[i].d).collect())
                .collect();
            Some(bootstrap_edges(&samples, cfg).map_err(|e| e.in_stage("bootstrap"))?)
        }
        Some(_) => {
            warn!("only one unit; bootstrap intervals skipped");
            None
        }
        None => None,
    };
    let edges = first
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| ContrastEdge {
            key: e.key,
            source: e.source.clone(),
            target: e.target.clone(),
            c_a: mean(&|x| x.c_a, i),
            c_b: mean(&|x| x.c_b, i),
            d: mean(&|x| x.d, i),
            flow_a: mean_opt(&|x| x.flow_a, i),
            flow_b: mean_opt(&|x| x.flow_b, i),
            bootstrap: summaries.as_ref().map(|s| s[i].clone()),
        })
        .collect();
    Ok(ContrastNetwork {
        n_units: agg.len(),
        edges,
        ..first.clone()
    })
}

/// Whether a model's native resolution can be collapsed to `level`.
pub fn level_supported(model: ModelKind, level: Level) -> bool {
    match model {
        ModelKind::Scau => true,
        ModelKind::Var => matches!(level, Level::Fc2c | Level::C2c | Level::F2c),
    }
}

pub fn model_name(model: ModelKind) -> &'static str {
    match model {
        ModelKind::Var => "var",
        ModelKind::Scau => "scau",
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| ScauError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| ScauError::io(path, e))
}

/// Writes `net` as `<stem>.<ext>` for every requested format.
pub fn write_network(net: &ContrastNetwork, dir: &Path, stem: &str, formats: &[OutputFormat]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for f in formats {
        let path = dir.join(format!("{stem}.{}", f.extension()));
        let text = match f {
            OutputFormat::Json => net.to_json()?,
            OutputFormat::Csv => net.to_csv()?,
            OutputFormat::Dot => net.to_dot(),
        };
        write_file(&path, &text)?;
        out.push(path);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub id: String,
    pub samples: usize,
    pub trials: usize,
    pub dropped: usize,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub config: PipelineConfig,
    pub seed: u64,
    pub inputs: Vec<FileRecord>,
    pub subjects: Vec<SubjectRecord>,
    pub outputs: Vec<FileRecord>,
}

/// Group networks produced by a run, keyed by model and level.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub networks: Vec<ContrastNetwork>,
    pub manifest: Manifest,
}

/// Runs every stage for every subject and writes networks, summaries and a
/// manifest into `out_dir`.
pub fn run_pipeline(cfg: &PipelineConfig, out_dir: &Path) -> Result<RunReport> {
    cfg.validate()?;
    let analysis = cfg.analysis()?;
    fs::create_dir_all(out_dir).map_err(|e| ScauError::io(out_dir, e))?;
    let per_subject = cfg
        .subjects
        .par_iter()
        .map(|s| -> Result<(SubjectRecord, Vec<TrialConnectivity>)> {
            let raw = load_csv(&s.data, &cfg.recording).map_err(|e| e.in_stage("ingest"))?;
            let clean = preprocess(&raw, &cfg.recording)
                .and_then(|f| f.select(&cfg.recording.analysis_channels))
                .map_err(|e| e.in_stage("ingest"))?;
            let markers = load_markers(&s.markers).map_err(|e| e.in_stage("ingest"))?;
            let (windows, dropped) = trial_windows(&cfg.recording, &markers, clean.len()).map_err(|e| e.in_stage("ingest"))?;
            info!("subject {}: {} trials kept, {} dropped", s.id, windows.len(), dropped);
            let trials = analyze_recording(&clean, &windows, &analysis)?;
            Ok((
                SubjectRecord {
                    id: s.id.clone(),
                    samples: clean.len(),
                    trials: windows.len(),
                    dropped,
                },
                trials,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let boot = cfg.bootstrap_config();
    let mut networks = Vec::new();
    let mut written = Vec::new();
    let models: Vec<ModelKind> = [(cfg.models.scau, ModelKind::Scau), (cfg.models.var, ModelKind::Var)]
        .into_iter()
        .filter_map(|(on, m)| on.then_some(m))
        .collect();
    for model in models {
        let units = match cfg.bootstrap_unit {
            BootstrapUnit::Subject => per_subject
                .iter()
                .map(|(_, t)| subject_network(t, model, &analysis.tasks))
                .collect::<Result<Vec<_>>>()?,
            BootstrapUnit::Trial => {
                let mut all = Vec::new();
                for (_, t) in &per_subject {
                    all.extend(trial_pair_networks(t, model, &analysis.tasks)?);
                }
                all
            }
        };
        for &level in &cfg.levels {
            if !level_supported(model, level) {
                info!("{} networks have no {} view; skipped", model_name(model), level.name());
                continue;
            }
            let net = group_network(&units, level, Some(&boot)).map_err(|e| e.in_stage("contrast"))?;
            let stem = format!("{}_{}", model_name(model), level.name());
            written.extend(write_network(&net, out_dir, &stem, &cfg.formats)?);
            let summary = summary_network(&net, cfg.summary_threshold).map_err(|e| e.in_stage("summary"))?;
            let path = out_dir.join(format!("summary_{stem}.json"));
            write_file(&path, &serde_json::to_string_pretty(&summary).map_err(|e| ScauError::numeric(e.to_string()))?)?;
            written.push(path);
            networks.push(net);
        }
    }
    let inputs = cfg
        .subjects
        .iter()
        .flat_map(|s| [&s.data, &s.markers])
        .map(|p| {
            Ok(FileRecord {
                path: p.display().to_string(),
                sha256: sha256_file(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let outputs = written
        .iter()
        .map(|p| {
            Ok(FileRecord {
                path: p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                sha256: sha256_file(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: cfg.hash(),
        config: cfg.clone(),
        seed: cfg.seed,
        inputs,
        subjects: per_subject.into_iter().map(|(r, _)| r).collect(),
        outputs,
    };
    write_file(
        &out_dir.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest).map_err(|e| ScauError::numeric(e.to_string()))?,
    )?;
    Ok(RunReport { networks, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectivity::EdgeKey;

    fn unit(d: &[f64]) -> ContrastNetwork {
        let ch = vec!["a".to_string(), "b".to_string()];
        let bands = vec!["x".to_string()];
        let edges = d
            .iter()
            .enumerate()
            .map(|(i, &v)| ContrastEdge {
                key: EdgeKey::full(i / 2, 0, i % 2, 0),
                source: String::new(),
                target: String::new(),
                c_a: v / 100.0,
                c_b: 0.0,
                d: v,
                flow_a: None,
                flow_b: None,
                bootstrap: None,
            })
            .collect();
        ContrastNetwork {
            model: ModelKind::Scau,
            level: Level::Fc2fc,
            tasks: ["A".into(), "B".into()],
            channels: ch,
            bands,
            n_units: 1,
            edges,
        }
    }

    #[test]
    fn group_means_and_intervals() {
        let units: Vec<ContrastNetwork> = (0..6).map(|s| unit(&[s as f64, 1.0, 2.0, 3.0])).collect();
        let g = group_network(&units, Level::Fc2fc, Some(&BootstrapConfig::default())).unwrap();
        assert_eq!(g.n_units, 6);
        assert_eq!(g.edges[0].d, 2.5);
        let b = g.edges[0].bootstrap.as_ref().unwrap();
        assert!(b.ci_low < 2.5 && b.ci_high > 2.5);
        assert_eq!(g.edges[1].bootstrap.as_ref().unwrap().width(), 0.0);
        let c2c = group_network(&units, Level::C2c, None).unwrap();
        assert_eq!(c2c.edges.len(), 4);
    }

    #[test]
    fn var_level_support() {
        assert!(level_supported(ModelKind::Var, Level::F2c));
        assert!(!level_supported(ModelKind::Var, Level::C2f));
        assert!(level_supported(ModelKind::Scau, Level::Fc2fc));
    }

    #[test]
    fn config_defaults_and_hash() {
        let cfg: PipelineConfig = serde_json::from_str(r#"{"subjects": []}"#).unwrap();
        assert_eq!(cfg.order, DEFAULT_ORDER);
        assert_eq!(cfg.levels.len(), 4);
        assert_eq!(cfg.hash(), cfg.clone().hash());
        assert!(cfg.validate().is_err());
        let bad = PipelineConfig { f_i: Some(99.0), ..cfg };
        assert!(matches!(bad.analysis(), Err(ScauError::Config(_))));
    }
}
