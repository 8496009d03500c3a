use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use scau::bands::{decompose_with, default_scheme, BandComponents, BandScheme};
use scau::connectivity::{
    aggregate, contrast_named, edges_to_csv, edges_to_dot, flow, normalized_band, summary_network, ContrastNetwork,
    EdgeMap, Level, PdcNormalization, DEFAULT_POINTS, DEFAULT_SUMMARY_THRESHOLD,
};
use scau::filters::{design, frequency_response, FilterDesign, FilterOptions, FilterSpec};
use scau::ingest::{load_csv, load_markers, preprocess, segment_trials, RecordingConfig};
use scau::lassle::{fit_scau, LassoConfig, ScauFit, Selection};
use scau::mapping::{map_all, MappedTensor, MappingConfig};
use scau::oracle::{verify, Check};
use scau::pipeline::{run_pipeline, write_network, OutputFormat, PipelineConfig};
use scau::resampling::{bootstrap_edges, BootstrapConfig, DEFAULT_LEVEL, DEFAULT_REPLICATES};
use scau::varfit::{fit_var, VarFit, DEFAULT_ORDER};
use scau::{Result, ScauError, TimeSeriesFrame};

/// Spectral causality analysis of multichannel recordings.
#[derive(Parser)]
#[command(name = "scau", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Pipeline config (or a bare recording config for `ingest`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the root seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Format for network and summary outputs.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Dot,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
            Format::Dot => OutputFormat::Dot,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Select {
    Ebic,
    Bic,
    Cv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Norm {
    PerSource,
    PerTarget,
}

#[derive(Subcommand)]
enum Cmd {
    /// Load a recording, remove ocular artifacts, re-reference and cut trials.
    Ingest {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        markers: PathBuf,
        /// Subject id (default: data file stem).
        #[arg(long)]
        subject: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split every channel into subbands, one CSV per (channel, band).
    Decompose {
        #[arg(long = "in")]
        input: PathBuf,
        /// Band scheme JSON (default: twelve 4 Hz bands).
        #[arg(long)]
        scheme: Option<PathBuf>,
        #[arg(long)]
        fs: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Translate decomposed bands to the intermediate frequency.
    Map {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        fi: Option<f64>,
        /// Leading samples to drop (default: long enough for the filters to settle).
        #[arg(long)]
        warmup: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Also export the mapped series as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Least-squares VAR fit of a channel CSV.
    FitVar {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: usize,
        #[arg(long)]
        fs: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sparse VAR over (channel, band) nodes of a mapped tensor.
    FitScau {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: usize,
        #[arg(long, value_enum, default_value = "ebic")]
        select: Select,
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrated PDC flows of a VAR or SCAU fit.
    Connectivity {
        #[arg(long)]
        fit: PathBuf,
        /// Band scheme for VAR band flows (default: twelve 4 Hz bands at --fs).
        #[arg(long)]
        scheme: Option<PathBuf>,
        #[arg(long)]
        fs: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
        #[arg(long, value_enum, default_value = "per-source")]
        pdc: Norm,
        #[arg(long)]
        out: PathBuf,
    },
    /// Relative connectivity of two tasks and their contrast.
    Contrast {
        #[arg(long)]
        task_a: PathBuf,
        #[arg(long)]
        rest_a: PathBuf,
        #[arg(long)]
        task_b: PathBuf,
        #[arg(long)]
        rest_b: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "WG,FX")]
        tasks: Vec<String>,
        /// Aggregation level (default: the flows' own resolution).
        #[arg(long)]
        level: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Percentile bootstrap of per-unit contrasts.
    ///
    /// Input CSV: one row per unit, one column per edge; a leading
    /// `unit` or `subject` column is ignored.
    Bootstrap {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "B", default_value_t = DEFAULT_REPLICATES)]
        replicates: usize,
        #[arg(long, default_value_t = DEFAULT_LEVEL)]
        level: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Edges whose contrast reaches a fraction of the maximum.
    Summary {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SUMMARY_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form filter response on a frequency sweep, as CSV.
    FilterResponse {
        /// Filter spec or design JSON.
        #[arg(long)]
        spec: PathBuf,
        /// start:stop:step in Hz.
        #[arg(long, default_value = "0:100:0.5")]
        sweep: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the analytic results numerically.
    #[command(alias = "verify")]
    VerifyLemmas {
        #[arg(long, default_value = "all")]
        which: String,
        /// JSON report path (default: <out-dir>/verify_<which>.json when --out-dir is set).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Every stage for every subject of the config.
    Run,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: could not configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.class().exit_code() as u8)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| ScauError::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| ScauError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| ScauError::io(path, e))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).map_err(|e| ScauError::parse(path, e.to_string()))
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| ScauError::numeric(e.to_string()))
}

/// Recording settings from `--config`, which may hold a full pipeline config.
fn recording_config(g: &Global) -> Result<RecordingConfig> {
    let Some(path) = &g.config else {
        return Ok(RecordingConfig::default());
    };
    let v: serde_json::Value = parse_json(path)?;
    let inner = match (v.get("recording"), v.get("subjects")) {
        (Some(r), _) => r.clone(),
        (None, Some(_)) => serde_json::json!({}),
        _ => v,
    };
    serde_json::from_value(inner).map_err(|e| ScauError::parse(path, e.to_string()))
}

fn sampling_rate(g: &Global, fs: Option<f64>) -> Result<f64> {
    match fs {
        Some(f) => Ok(f),
        None => Ok(recording_config(g)?.f_s),
    }
}

/// Any CSV of numeric columns, every column a channel.
fn load_plain(path: &Path, f_s: f64) -> Result<TimeSeriesFrame> {
    let cfg = RecordingConfig {
        f_s,
        analysis_channels: Vec::new(),
        ..RecordingConfig::default()
    };
    load_csv(path, &cfg)
}

fn format_of(g: &Global, path: &Path) -> OutputFormat {
    if let Some(f) = g.format {
        return f.into();
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => OutputFormat::Csv,
        Some("dot") => OutputFormat::Dot,
        _ => OutputFormat::Json,
    }
}

#[derive(Serialize, serde::Deserialize)]
struct BandIndex {
    f_s: f64,
    channels: Vec<String>,
    scheme: BandScheme,
    filter: FilterOptions,
}

fn band_file(dir: &Path, channel: &str, band: &str) -> PathBuf {
    dir.join(format!("{channel}_{band}.csv"))
}

fn dispatch(cli: &Cli) -> Result<u8> {
    let g = &cli.global;
    match &cli.cmd {
        Cmd::Ingest {
            data,
            markers,
            subject,
            out,
        } => {
            let rec = recording_config(g)?;
            rec.validate()?;
            let id = subject.clone().unwrap_or_else(|| {
                data.file_stem().map_or("subject".into(), |s| s.to_string_lossy().into_owned())
            });
            let raw = load_csv(data, &rec)?;
            let clean = preprocess(&raw, &rec)?.select(&rec.analysis_channels)?;
            let trials = segment_trials(&clean, &rec, &load_markers(markers)?, &id)?;
            fs::create_dir_all(out).map_err(|e| ScauError::io(out, e))?;
            clean.write_csv(&out.join(format!("{id}_clean.csv")))?;
            write(&out.join(format!("{id}_trials.json")), &trials.to_json()?)?;
            println!("{id}: {} trials, {} dropped", trials.trials.len(), trials.dropped);
        }
        Cmd::Decompose { input, scheme, fs, out } => {
            let f_s = sampling_rate(g, *fs)?;
            let scheme = match scheme {
                Some(p) => {
                    let s: BandScheme = parse_json(p)?;
                    s.validate()?;
                    s
                }
                None => default_scheme(f_s)?,
            };
            let x = load_plain(input, f_s)?;
            let filter = FilterOptions::default();
            let comps = decompose_with(&x, &scheme, &filter)?;
            fs::create_dir_all(out).map_err(|e| ScauError::io(out, e))?;
            for (b, band) in scheme.bands.iter().enumerate() {
                for (c, ch) in x.labels().iter().enumerate() {
                    let one = TimeSeriesFrame::from_channels(
                        vec![format!("{ch}:{}", band.label)],
                        f_s,
                        vec![comps.component(c, b).to_vec()],
                    )?;
                    one.write_csv(&band_file(out, ch, &band.label))?;
                }
            }
            let index = BandIndex {
                f_s,
                channels: x.labels().to_vec(),
                scheme,
                filter,
            };
            write(&out.join("bands.json"), &to_json(&index)?)?;
        }
        Cmd::Map {
            input,
            fi,
            warmup,
            out,
            csv,
        } => {
            let index: BandIndex = parse_json(&input.join("bands.json"))?;
            let bands = index
                .scheme
                .bands
                .iter()
                .map(|band| {
                    let rows = index
                        .channels
                        .iter()
                        .map(|ch| Ok(load_plain(&band_file(input, ch, &band.label), index.f_s)?.channel(0).to_vec()))
                        .collect::<Result<Vec<_>>>()?;
                    TimeSeriesFrame::from_channels(index.channels.clone(), index.f_s, rows)
                })
                .collect::<Result<Vec<_>>>()?;
            let comps = BandComponents {
                scheme: index.scheme.clone(),
                bands,
            };
            let mut cfg = MappingConfig::new(index.f_s).with_filter(index.filter);
            if let Some(f) = fi {
                cfg = cfg.with_fi(*f);
            }
            if let Some(w) = warmup {
                cfg = cfg.with_warmup(*w);
            }
            let z = map_all(&comps, &cfg)?;
            z.write_bin(out)?;
            if let Some(p) = csv {
                z.write_csv(p)?;
            }
        }
        Cmd::FitVar { input, order, fs, out } => {
            let x = load_plain(input, sampling_rate(g, *fs)?)?;
            let fit = fit_var(&x, *order)?;
            write(out, &fit.to_json()?)?;
        }
        Cmd::FitScau {
            input,
            order,
            select,
            out,
        } => {
            let z = MappedTensor::read_bin(input)?;
            let cfg = LassoConfig {
                selection: match select {
                    Select::Ebic => Selection::Ebic,
                    Select::Bic => Selection::Bic,
                    Select::Cv => Selection::Cv,
                },
                seed: g.seed.unwrap_or(0),
                ..LassoConfig::default()
            };
            let fit = fit_scau(&z, *order, &cfg)?;
            write(out, &fit.to_json()?)?;
        }
        Cmd::Connectivity {
            fit,
            scheme,
            fs,
            points,
            pdc,
            out,
        } => {
            let norm = match pdc {
                Norm::PerSource => PdcNormalization::PerSource,
                Norm::PerTarget => PdcNormalization::PerTarget,
            };
            let text = read(fit)?;
            let map = if let Ok(f) = ScauFit::from_json(&text) {
                let m = flow(&f.phi, f.node_labels(), 0.0, 0.5, *points, norm)?;
                EdgeMap::from_scau_flow(&m, f.channel_labels.clone(), f.band_labels.clone())?
            } else {
                let f = VarFit::from_json(&text).map_err(|_| {
                    ScauError::parse(fit, "neither a SCAU fit nor a VAR fit")
                })?;
                let scheme = match scheme {
                    Some(p) => parse_json::<BandScheme>(p)?,
                    None => default_scheme(sampling_rate(g, *fs)?)?,
                };
                let flows = scheme
                    .bands
                    .iter()
                    .map(|b| {
                        let (lo, hi) = normalized_band(b.f_a, b.f_b, scheme.f_s)?;
                        let mut m = flow(&f.phi, f.labels.clone(), lo, hi, *points, norm)?;
                        m.band = Some(b.label.clone());
                        Ok(m)
                    })
                    .collect::<Result<Vec<_>>>()?;
                EdgeMap::from_var_flows(&flows, f.labels.clone(), scheme.labels())?
            };
            write(out, &to_json(&map)?)?;
        }
        Cmd::Contrast {
            task_a,
            rest_a,
            task_b,
            rest_b,
            tasks,
            level,
            out,
        } => {
            let [a, b] = <[String; 2]>::try_from(tasks.clone())
                .map_err(|_| ScauError::config("--tasks needs exactly two names"))?;
            let load = |p: &PathBuf| parse_json::<EdgeMap>(p);
            let c_a = scau::connectivity::relative_connectivity(&load(task_a)?, &load(rest_a)?)?;
            let c_b = scau::connectivity::relative_connectivity(&load(task_b)?, &load(rest_b)?)?;
            let mut net = contrast_named(&c_a, &c_b, [a, b])?;
            if let Some(l) = level {
                net = aggregate(&net, Level::parse(l)?)?;
            }
            write_one(&net, out, format_of(g, out))?;
        }
        Cmd::Bootstrap {
            input,
            replicates,
            level,
            out,
        } => {
            let (edges, samples) = read_units(input)?;
            let cfg = BootstrapConfig {
                replicates: *replicates,
                level: *level,
                seed: g.seed.unwrap_or(0),
            };
            let summaries = bootstrap_edges(&samples, &cfg)?;
            let err = |e: csv::Error| ScauError::parse(out, e.to_string());
            let mut w = csv::Writer::from_path(out).map_err(err)?;
            w.write_record(["edge", "mean", "ci_low", "ci_high", "level", "replicates", "seed"])
                .map_err(err)?;
            for (e, s) in edges.iter().zip(&summaries) {
                w.write_record([
                    e.clone(),
                    s.mean.to_string(),
                    s.ci_low.to_string(),
                    s.ci_high.to_string(),
                    s.level.to_string(),
                    s.replicates.to_string(),
                    s.seed.to_string(),
                ])
                .map_err(err)?;
            }
            w.flush().map_err(|e| ScauError::io(out, e))?;
        }
        Cmd::Summary { input, threshold, out } => {
            let net = ContrastNetwork::from_json(&read(input)?)?;
            let kept = summary_network(&net, *threshold)?;
            let fmt = match (g.format, out) {
                (Some(f), _) => f.into(),
                (None, Some(p)) => format_of(g, p),
                (None, None) => OutputFormat::Csv,
            };
            let text = match fmt {
                OutputFormat::Json => to_json(&kept)?,
                OutputFormat::Csv => edges_to_csv(&kept)?,
                OutputFormat::Dot => edges_to_dot("summary", &kept),
            };
            match out {
                Some(p) => write(p, &text)?,
                None => print!("{text}"),
            }
        }
        Cmd::FilterResponse { spec, sweep, out } => {
            let text = read(spec)?;
            let d: FilterDesign = match serde_json::from_str::<FilterDesign>(&text) {
                Ok(d) => d,
                Err(_) => {
                    let s: FilterSpec = serde_json::from_str(&text).map_err(|e| ScauError::parse(spec, e.to_string()))?;
                    design(&s)?
                }
            };
            let freqs = parse_sweep(sweep)?;
            let mut csv_text = String::from("frequency_hz,magnitude,phase_rad\n");
            for (f, m, p) in frequency_response(&d, &freqs) {
                csv_text.push_str(&format!("{f},{m},{p}\n"));
            }
            match out {
                Some(p) => write(p, &csv_text)?,
                None => print!("{csv_text}"),
            }
        }
        Cmd::VerifyLemmas { which, report } => {
            let checks = verify(which)?;
            let pass = checks.iter().all(|c| c.pass);
            print_checks(&checks);
            let path = report
                .clone()
                .or_else(|| g.out_dir.as_ref().map(|d| d.join(format!("verify_{which}.json"))));
            if let Some(p) = path {
                #[derive(Serialize)]
                struct Report<'a> {
                    which: &'a str,
                    pass: bool,
                    checks: &'a [Check],
                }
                write(&p, &to_json(&Report { which, pass, checks: &checks })?)?;
            }
            return Ok(if pass { 0 } else { 1 });
        }
        Cmd::Run => {
            let path = g
                .config
                .as_ref()
                .ok_or_else(|| ScauError::config("run needs --config"))?;
            let mut cfg = PipelineConfig::from_path(path)?;
            if let Some(s) = g.seed {
                cfg.seed = s;
            }
            if let Some(f) = g.format {
                cfg.formats = vec![f.into()];
            }
            let out = g.out_dir.clone().unwrap_or_else(|| PathBuf::from("scau_out"));
            let report = run_pipeline(&cfg, &out)?;
            for net in &report.networks {
                println!(
                    "{} {}: {} edges over {} units",
                    scau::pipeline::model_name(net.model),
                    net.level.name(),
                    net.edges.len(),
                    net.n_units
                );
            }
            println!("manifest: {}", out.join("manifest.json").display());
        }
    }
    Ok(0)
}

fn write_one(net: &ContrastNetwork, out: &Path, fmt: OutputFormat) -> Result<()> {
    let dir = out.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| ScauError::io(dir, e))?;
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .ok_or_else(|| ScauError::config(format!("output path {} has no file name", out.display())))?;
    write_network(net, dir, &stem, &[fmt])?;
    Ok(())
}

/// Wide CSV of unit-level values: returns edge names and `samples[edge][unit]`.
fn read_units(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let err = |e: csv::Error| ScauError::parse(path, e.to_string());
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(err)?;
    let header: Vec<String> = rdr.headers().map_err(err)?.iter().map(str::to_string).collect();
    let skip = usize::from(matches!(header.first().map(String::as_str), Some("unit" | "subject")));
    let edges = header[skip..].to_vec();
    if edges.is_empty() {
        return Err(ScauError::parse(path, "no edge columns"));
    }
    let mut samples = vec![Vec::new(); edges.len()];
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(err)?;
        for (e, cell) in rec.iter().skip(skip).enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                ScauError::parse(path, format!("line {}, column '{}': '{cell}' is not a number", r + 2, edges[e]))
            })?;
            samples[e].push(v);
        }
    }
    Ok((edges, samples))
}

fn parse_sweep(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| ScauError::config(format!("sweep '{s}' is not start:stop:step")))?;
    let [lo, hi, step] = parts[..] else {
        return Err(ScauError::config(format!("sweep '{s}' is not start:stop:step")));
    };
    if !(step > 0.0 && hi >= lo) {
        return Err(ScauError::config(format!("sweep '{s}' needs step > 0 and stop >= start")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

fn print_checks(checks: &[Check]) {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(10);
    println!("{:<8} {:<width$}  {:>12}  {:<24} result", "suite", "check", "computed", "expected");
    for c in checks {
        println!(
            "{:<8} {:<width$}  {:>12.6}  {:<24} {}",
            c.suite,
            c.name,
            c.computed,
            c.expected,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
}
