//! Partial directed coherence, band-integrated flows, relative connectivity,
//! task contrasts and their aggregation views.
//!
//! Flow matrices and networks are oriented source → target: `values[[s, t]]`
//! is the flow from node `s` into node `t`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScauError};
use crate::resampling::BootstrapSummary;

/// Default number of frequency points per integration interval.
pub const DEFAULT_POINTS: usize = 512;
/// Default fraction of the maximum contrast kept by [`summary_network`].
pub const DEFAULT_SUMMARY_THRESHOLD: f64 = 0.8;

/// Which index the PDC denominator sums over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PdcNormalization {
    /// `Σ_targets |π_{s→t}|² = 1` for every source and frequency.
    #[default]
    PerSource,
    /// `Σ_sources |π_{s→t}|² = 1` for every target and frequency.
    PerTarget,
}

/// `A[t, s](f) = δ_ts - Σ_l phi[l-1, t, s]·e^{-j2πfl}` for normalized `f`.
pub fn a_matrix(phi: &Array3<f64>, f: f64) -> Array2<Complex64> {
    let (p, k, _) = phi.dim();
    let mut a = Array2::from_shape_fn((k, k), |(t, s)| {
        Complex64::new(if t == s { 1.0 } else { 0.0 }, 0.0)
    });
    for l in 0..p {
        let e = Complex64::from_polar(1.0, -2.0 * PI * f * (l + 1) as f64);
        for t in 0..k {
            for s in 0..k {
                let v = phi[[l, t, s]];
                if v != 0.0 {
                    a[[t, s]] -= e * v;
                }
            }
        }
    }
    a
}

/// Squared PDC `|π_{s→t}(f)|²`, oriented `[source, target]`.
pub fn pdc_squared_at(phi: &Array3<f64>, f: f64, norm: PdcNormalization) -> Array2<f64> {
    let a = a_matrix(phi, f);
    let k = a.nrows();
    let mag = a.mapv(|z| z.norm_sqr());
    let mut out = Array2::zeros((k, k));
    match norm {
        PdcNormalization::PerSource => {
            for s in 0..k {
                let denom: f64 = (0..k).map(|t| mag[[t, s]]).sum();
                for t in 0..k {
                    out[[s, t]] = mag[[t, s]] / denom;
                }
            }
        }
        PdcNormalization::PerTarget => {
            for t in 0..k {
                let denom: f64 = (0..k).map(|s| mag[[t, s]]).sum();
                for s in 0..k {
                    out[[s, t]] = mag[[t, s]] / denom;
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdcSpectrum {
    /// Normalized frequencies, uniform on `[0, 1/2]`.
    pub grid: Vec<f64>,
    pub nodes: Vec<String>,
    /// `|π_{s→t}(f)|`, shape `(grid, source, target)`.
    pub values: Array3<f64>,
    pub normalization: PdcNormalization,
}

impl PdcSpectrum {
    pub fn squared(&self, g: usize, s: usize, t: usize) -> f64 {
        self.values[[g, s, t]].powi(2)
    }
}

/// PDC of a coefficient tensor `[lag - 1, target, source]` on `grid_size` points.
pub fn pdc(phi: &Array3<f64>, nodes: Vec<String>, grid_size: usize, norm: PdcNormalization) -> Result<PdcSpectrum> {
    let k = phi.dim().1;
    if phi.dim().2 != k || nodes.len() != k {
        return Err(ScauError::data("coefficient tensor and node labels disagree"));
    }
    if grid_size < 2 {
        return Err(ScauError::config("PDC grid needs at least 2 points"));
    }
    let grid: Vec<f64> = (0..grid_size).map(|g| 0.5 * g as f64 / (grid_size - 1) as f64).collect();
    let slices: Vec<Array2<f64>> = grid
        .par_iter()
        .map(|&f| pdc_squared_at(phi, f, norm).mapv(f64::sqrt))
        .collect();
    let mut values = Array3::zeros((grid_size, k, k));
    for (g, m) in slices.into_iter().enumerate() {
        values.index_axis_mut(ndarray::Axis(0), g).assign(&m);
    }
    Ok(PdcSpectrum {
        grid,
        nodes,
        values,
        normalization: norm,
    })
}

/// Integrated squared PDC between nodes, `values[[source, target]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowMatrix {
    pub nodes: Vec<String>,
    pub values: Array2<f64>,
    /// Band label for band-restricted flows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<String>,
    /// Integration interval in normalized frequency.
    pub interval: (f64, f64),
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&lo) || !(0.0..=0.5).contains(&hi) || lo >= hi {
        return Err(ScauError::config(format!(
            "integration interval [{lo}, {hi}] must lie inside [0, 1/2] in normalized frequency"
        )));
    }
    Ok(())
}

/// Converts a band in Hz to normalized frequency, rejecting bands past Nyquist.
pub fn normalized_band(lo_hz: f64, hi_hz: f64, f_s: f64) -> Result<(f64, f64)> {
    if lo_hz < 0.0 || hi_hz > f_s / 2.0 || lo_hz >= hi_hz {
        return Err(ScauError::config(format!(
            "band [{lo_hz}, {hi_hz}] Hz outside [0, {}] Hz",
            f_s / 2.0
        )));
    }
    Ok((lo_hz / f_s, hi_hz / f_s))
}

/// Trapezoid integral of the spectrum's squared PDC over `[lo, hi]`, with
/// linear interpolation at interval ends that fall between grid points.
pub fn band_flow(spec: &PdcSpectrum, lo: f64, hi: f64) -> Result<FlowMatrix> {
    check_interval(lo, hi)?;
    let k = spec.nodes.len();
    let mut values = Array2::zeros((k, k));
    let g = &spec.grid;
    for i in 0..g.len() - 1 {
        let (a, b) = (g[i].max(lo), g[i + 1].min(hi));
        if b <= a {
            continue;
        }
        let w = g[i + 1] - g[i];
        for s in 0..k {
            for t in 0..k {
                let (v0, v1) = (spec.squared(i, s, t), spec.squared(i + 1, s, t));
                let at = |x: f64| v0 + (v1 - v0) * (x - g[i]) / w;
                values[[s, t]] += 0.5 * (b - a) * (at(a) + at(b));
            }
        }
    }
    Ok(FlowMatrix {
        nodes: spec.nodes.clone(),
        values,
        band: None,
        interval: (lo, hi),
    })
}

/// Flow over `[lo, hi]` evaluated directly on `points` equally spaced frequencies.
pub fn flow(phi: &Array3<f64>, nodes: Vec<String>, lo: f64, hi: f64, points: usize, norm: PdcNormalization) -> Result<FlowMatrix> {
    check_interval(lo, hi)?;
    if points < 2 {
        return Err(ScauError::config("integration needs at least 2 points"));
    }
    let k = phi.dim().1;
    if nodes.len() != k {
        return Err(ScauError::data("coefficient tensor and node labels disagree"));
    }
    let h = (hi - lo) / (points - 1) as f64;
    let terms: Vec<Array2<f64>> = (0..points)
        .into_par_iter()
        .map(|i| {
            let w = if i == 0 || i == points - 1 { 0.5 * h } else { h };
            pdc_squared_at(phi, lo + i as f64 * h, norm) * w
        })
        .collect();
    let values = terms.iter().fold(Array2::zeros((k, k)), |acc, t| acc + t);
    Ok(FlowMatrix {
        nodes,
        values,
        band: None,
        interval: (lo, hi),
    })
}

/// What a network models: plain VAR over channels or SCAU over (channel, band).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Var,
    Scau,
}

/// Resolution of a network's edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    /// (channel, band) → (channel, band); the native SCAU resolution.
    #[serde(rename = "FC2FC")]
    Fc2fc,
    /// (channel, band) → channel; the native VAR resolution.
    #[serde(rename = "FC2C")]
    Fc2c,
    #[serde(rename = "C2C")]
    C2c,
    #[serde(rename = "F2C")]
    F2c,
    #[serde(rename = "C2F")]
    C2f,
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Level::Fc2fc => "FC2FC",
            Level::Fc2c => "FC2C",
            Level::C2c => "C2C",
            Level::F2c => "F2C",
            Level::C2f => "C2F",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "FC2FC" => Ok(Level::Fc2fc),
            "FC2C" => Ok(Level::Fc2c),
            "C2C" => Ok(Level::C2c),
            "F2C" => Ok(Level::F2c),
            "C2F" => Ok(Level::C2f),
            other => Err(ScauError::config(format!("unknown aggregation level '{other}'"))),
        }
    }

    /// The four views reported for SCAU networks.
    pub fn all() -> [Level; 4] {
        [Level::C2c, Level::F2c, Level::C2f, Level::Fc2fc]
    }

    fn project(self, k: &EdgeKey) -> Option<EdgeKey> {
        let need = |o: Option<usize>| o.map(Some);
        Some(match self {
            Level::Fc2fc => EdgeKey {
                source_channel: need(k.source_channel)?,
                source_band: need(k.source_band)?,
                target_channel: need(k.target_channel)?,
                target_band: need(k.target_band)?,
            },
            Level::Fc2c => EdgeKey {
                source_channel: need(k.source_channel)?,
                source_band: need(k.source_band)?,
                target_channel: need(k.target_channel)?,
                target_band: None,
            },
            Level::C2c => EdgeKey {
                source_channel: need(k.source_channel)?,
                source_band: None,
                target_channel: need(k.target_channel)?,
                target_band: None,
            },
            Level::F2c => EdgeKey {
                source_channel: None,
                source_band: need(k.source_band)?,
                target_channel: need(k.target_channel)?,
                target_band: None,
            },
            Level::C2f => EdgeKey {
                source_channel: need(k.source_channel)?,
                source_band: None,
                target_channel: None,
                target_band: need(k.target_band)?,
            },
        })
    }
}

/// Edge identity; absent fields have been aggregated away.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeKey {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_channel: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_band: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_channel: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_band: Option<usize>,
}

impl EdgeKey {
    pub fn full(sc: usize, sb: usize, tc: usize, tb: usize) -> Self {
        Self {
            source_channel: Some(sc),
            source_band: Some(sb),
            target_channel: Some(tc),
            target_band: Some(tb),
        }
    }

    pub fn is_self_loop(&self) -> bool {
        self.source_channel == self.target_channel && self.source_band == self.target_band
    }

    fn endpoint(channel: Option<usize>, band: Option<usize>, channels: &[String], bands: &[String]) -> String {
        match (channel, band) {
            (Some(c), Some(b)) => format!("{}:{}", channels[c], bands[b]),
            (Some(c), None) => channels[c].clone(),
            (None, Some(b)) => bands[b].clone(),
            (None, None) => "*".into(),
        }
    }

    pub fn source_label(&self, channels: &[String], bands: &[String]) -> String {
        Self::endpoint(self.source_channel, self.source_band, channels, bands)
    }

    pub fn target_label(&self, channels: &[String], bands: &[String]) -> String {
        Self::endpoint(self.target_channel, self.target_band, channels, bands)
    }
}

/// One value per edge: flows `I` or relative connectivities `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeMap {
    pub model: ModelKind,
    pub level: Level,
    pub channels: Vec<String>,
    pub bands: Vec<String>,
    pub keys: Vec<EdgeKey>,
    pub values: Vec<f64>,
}

impl EdgeMap {
    /// SCAU flows over (channel, band) nodes numbered `channel·|bands| + band`.
    pub fn from_scau_flow(flow: &FlowMatrix, channels: Vec<String>, bands: Vec<String>) -> Result<Self> {
        let nb = bands.len();
        let k = channels.len() * nb;
        if flow.values.dim() != (k, k) {
            return Err(ScauError::data(format!(
                "flow matrix {:?} does not match {} channels × {nb} bands",
                flow.values.dim(),
                channels.len()
            )));
        }
        let mut keys = Vec::with_capacity(k * k);
        let mut values = Vec::with_capacity(k * k);
        for s in 0..k {
            for t in 0..k {
                keys.push(EdgeKey::full(s / nb, s % nb, t / nb, t % nb));
                values.push(flow.values[[s, t]]);
            }
        }
        Ok(Self {
            model: ModelKind::Scau,
            level: Level::Fc2fc,
            channels,
            bands,
            keys,
            values,
        })
    }

    /// VAR flows, one channel-level matrix per source band.
    pub fn from_var_flows(flows: &[FlowMatrix], channels: Vec<String>, bands: Vec<String>) -> Result<Self> {
        let m = channels.len();
        if flows.len() != bands.len() {
            return Err(ScauError::data("need one VAR flow matrix per band"));
        }
        let mut keys = Vec::new();
        let mut values = Vec::new();
        for s in 0..m {
            for (b, f) in flows.iter().enumerate() {
                if f.values.dim() != (m, m) {
                    return Err(ScauError::data("VAR flow matrix does not match channel count"));
                }
                for t in 0..m {
                    keys.push(EdgeKey {
                        source_channel: Some(s),
                        source_band: Some(b),
                        target_channel: Some(t),
                        target_band: None,
                    });
                    values.push(f.values[[s, t]]);
                }
            }
        }
        Ok(Self {
            model: ModelKind::Var,
            level: Level::Fc2c,
            channels,
            bands,
            keys,
            values,
        })
    }

    fn same_nodes(&self, other: &Self) -> Result<()> {
        if self.keys != other.keys || self.channels != other.channels || self.bands != other.bands || self.model != other.model {
            return Err(ScauError::data("edge maps have different node sets"));
        }
        Ok(())
    }

    pub fn get(&self, key: &EdgeKey) -> Option<f64> {
        self.keys.iter().position(|k| k == key).map(|i| self.values[i])
    }

    /// Element-wise mean of maps over the same edges (e.g. across trials).
    pub fn mean(maps: &[EdgeMap]) -> Result<Self> {
        let first = maps.first().ok_or_else(|| ScauError::data("cannot average zero edge maps"))?;
        let mut values = vec![0.0; first.values.len()];
        for m in maps {
            first.same_nodes(m)?;
            for (a, v) in values.iter_mut().zip(&m.values) {
                *a += v;
            }
        }
        values.iter_mut().for_each(|v| *v /= maps.len() as f64);
        Ok(Self {
            values,
            ..first.clone()
        })
    }
}

/// `c = I_task - I_rest` per edge.
pub fn relative_connectivity(task_flow: &EdgeMap, rest_flow: &EdgeMap) -> Result<EdgeMap> {
    task_flow.same_nodes(rest_flow)?;
    Ok(EdgeMap {
        values: task_flow.values.iter().zip(&rest_flow.values).map(|(a, b)| a - b).collect(),
        ..task_flow.clone()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastEdge {
    pub key: EdgeKey,
    pub source: String,
    pub target: String,
    pub c_a: f64,
    pub c_b: f64,
    pub d: f64,
    /// Mean task-period flows, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<BootstrapSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastNetwork {
    pub model: ModelKind,
    pub level: Level,
    pub tasks: [String; 2],
    pub channels: Vec<String>,
    pub bands: Vec<String>,
    /// Number of subjects (or trials) the values were averaged over.
    pub n_units: usize,
    pub edges: Vec<ContrastEdge>,
}

/// `d = 100·|c_a - c_b|` per edge.
pub fn contrast(c_a: &EdgeMap, c_b: &EdgeMap) -> Result<ContrastNetwork> {
    contrast_named(c_a, c_b, ["A".into(), "B".into()])
}

pub fn contrast_named(c_a: &EdgeMap, c_b: &EdgeMap, tasks: [String; 2]) -> Result<ContrastNetwork> {
    c_a.same_nodes(c_b)?;
    let edges = c_a
        .keys
        .iter()
        .zip(c_a.values.iter().zip(&c_b.values))
        .map(|(k, (&a, &b))| ContrastEdge {
            key: *k,
            source: k.source_label(&c_a.channels, &c_a.bands),
            target: k.target_label(&c_a.channels, &c_a.bands),
            c_a: a,
            c_b: b,
            d: 100.0 * (a - b).abs(),
            flow_a: None,
            flow_b: None,
            bootstrap: None,
        })
        .collect();
    Ok(ContrastNetwork {
        model: c_a.model,
        level: c_a.level,
        tasks,
        channels: c_a.channels.clone(),
        bands: c_a.bands.clone(),
        n_units: 1,
        edges,
    })
}

/// How collapsed edges are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    #[default]
    Mean,
    Sum,
}

/// Collapses a network to `level` with the mean of the merged edges.
pub fn aggregate(net: &ContrastNetwork, level: Level) -> Result<ContrastNetwork> {
    aggregate_with(net, level, Statistic::Mean)
}

pub fn aggregate_with(net: &ContrastNetwork, level: Level, stat: Statistic) -> Result<ContrastNetwork> {
    if level == net.level {
        return Ok(net.clone());
    }
    let mut groups: BTreeMap<EdgeKey, Vec<&ContrastEdge>> = BTreeMap::new();
    for e in &net.edges {
        let key = level.project(&e.key).ok_or_else(|| {
            ScauError::config(format!(
                "a {} network cannot be aggregated to {}: its edges lack the needed band resolution",
                net.level.name(),
                level.name()
            ))
        })?;
        groups.entry(key).or_default().push(e);
    }
    let combine = |xs: &mut dyn Iterator<Item = f64>, n: usize| {
        let s: f64 = xs.sum();
        match stat {
            Statistic::Mean => s / n as f64,
            Statistic::Sum => s,
        }
    };
    let optional = |es: &[&ContrastEdge], f: fn(&ContrastEdge) -> Option<f64>| -> Option<f64> {
        let vals: Option<Vec<f64>> = es.iter().map(|e| f(e)).collect();
        vals.map(|v| combine(&mut v.iter().copied(), v.len()))
    };
    let edges = groups
        .into_iter()
        .map(|(key, es)| ContrastEdge {
            key,
            source: key.source_label(&net.channels, &net.bands),
            target: key.target_label(&net.channels, &net.bands),
            c_a: combine(&mut es.iter().map(|e| e.c_a), es.len()),
            c_b: combine(&mut es.iter().map(|e| e.c_b), es.len()),
            d: combine(&mut es.iter().map(|e| e.d), es.len()),
            flow_a: optional(&es, |e| e.flow_a),
            flow_b: optional(&es, |e| e.flow_b),
            bootstrap: None,
        })
        .collect();
    Ok(ContrastNetwork {
        level,
        edges,
        ..net.clone()
    })
}

/// Edges whose contrast is at least `threshold_frac` of the largest, self-loops excluded.
pub fn summary_network(net: &ContrastNetwork, threshold_frac: f64) -> Result<Vec<ContrastEdge>> {
    summary_network_with(net, threshold_frac, false)
}

pub fn summary_network_with(net: &ContrastNetwork, threshold_frac: f64, include_self_loops: bool) -> Result<Vec<ContrastEdge>> {
    if !(threshold_frac > 0.0 && threshold_frac <= 1.0) {
        return Err(ScauError::config(format!(
            "summary threshold {threshold_frac} outside (0, 1]"
        )));
    }
    let candidates: Vec<&ContrastEdge> = net
        .edges
        .iter()
        .filter(|e| include_self_loops || !e.key.is_self_loop())
        .collect();
    if candidates.is_empty() {
        return Err(ScauError::data("network has no edges to summarize"));
    }
    let value = |e: &ContrastEdge| e.bootstrap.as_ref().map_or(e.d, |b| b.mean);
    let max = candidates.iter().map(|e| value(e)).fold(f64::NEG_INFINITY, f64::max);
    let mut kept: Vec<ContrastEdge> = candidates
        .into_iter()
        .filter(|e| value(e) >= threshold_frac * max)
        .cloned()
        .collect();
    kept.sort_by(|a, b| value(b).total_cmp(&value(a)));
    Ok(kept)
}

/// Edges ordered by decreasing contrast.
pub fn ranked_edges(net: &ContrastNetwork, include_self_loops: bool) -> Vec<&ContrastEdge> {
    let mut edges: Vec<&ContrastEdge> = net
        .edges
        .iter()
        .filter(|e| include_self_loops || !e.key.is_self_loop())
        .collect();
    edges.sort_by(|a, b| b.d.total_cmp(&a.d));
    edges
}

impl ContrastNetwork {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| ScauError::numeric(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| ScauError::data(format!("invalid network JSON: {e}")))
    }

    pub fn find(&self, key: &EdgeKey) -> Option<&ContrastEdge> {
        self.edges.iter().find(|e| &e.key == key)
    }

    pub fn csv_header() -> [&'static str; 10] {
        ["source", "target", "c_a", "c_b", "d", "flow_a", "flow_b", "mean", "ci_low", "ci_high"]
    }

    pub fn csv_rows(edges: &[ContrastEdge]) -> Vec<Vec<String>> {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        edges
            .iter()
            .map(|e| {
                let b = e.bootstrap.as_ref();
                vec![
                    e.source.clone(),
                    e.target.clone(),
                    e.c_a.to_string(),
                    e.c_b.to_string(),
                    e.d.to_string(),
                    opt(e.flow_a),
                    opt(e.flow_b),
                    opt(b.map(|b| b.mean)),
                    opt(b.map(|b| b.ci_low)),
                    opt(b.map(|b| b.ci_high)),
                ]
            })
            .collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        edges_to_csv(&self.edges)
    }

    pub fn to_dot(&self) -> String {
        edges_to_dot(&format!("{}_{}", self.level.name(), serde_json::to_string(&self.model).unwrap_or_default().trim_matches('"')), &self.edges)
    }
}

pub fn edges_to_csv(edges: &[ContrastEdge]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(ContrastNetwork::csv_header())
        .map_err(|e| ScauError::numeric(e.to_string()))?;
    for row in ContrastNetwork::csv_rows(edges) {
        w.write_record(&row).map_err(|e| ScauError::numeric(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| ScauError::numeric(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| ScauError::numeric(e.to_string()))
}

/// Graphviz digraph; edges labelled with the contrast (bootstrap mean when present).
pub fn edges_to_dot(name: &str, edges: &[ContrastEdge]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{name}\" {{");
    let _ = writeln!(out, "  rankdir=LR;");
    let mut nodes: Vec<&str> = edges.iter().flat_map(|e| [e.source.as_str(), e.target.as_str()]).collect();
    nodes.sort_unstable();
    nodes.dedup();
    for n in nodes {
        let _ = writeln!(out, "  \"{n}\";");
    }
    for e in edges {
        let v = e.bootstrap.as_ref().map_or(e.d, |b| b.mean);
        let _ = writeln!(out, "  \"{}\" -> \"{}\" [label=\"{:.2}\", weight={:.4}];", e.source, e.target, v, v);
    }
    out.push_str("}\n");
    out
}
