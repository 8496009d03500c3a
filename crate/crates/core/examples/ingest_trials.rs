//! Loads one synthetic recording, regresses out the ocular channel,
//! re-references and cuts task/rest windows.
//!
//! cargo run --example ingest_trials

use scau::demo::{write_demo_bundle, DemoOptions};
use scau::ingest::{load_csv, load_markers, preprocess, segment_trials};
use scau::pipeline::PipelineConfig;
use scau::spectrum::cross_correlation;

fn main() -> scau::Result<()> {
    let dir = std::env::temp_dir().join("scau_ingest_example");
    let opts = DemoOptions { subjects: 1, ..DemoOptions::default() };
    let cfg = PipelineConfig::from_path(&write_demo_bundle(&dir, &opts)?)?;
    let rec = &cfg.recording;
    let subject = &cfg.subjects[0];
    let raw = load_csv(&subject.data, rec)?;
    let clean = preprocess(&raw, rec)?;
    let eog = raw.channel(raw.channel_index("VEOG").unwrap());
    for label in &rec.analysis_channels {
        let before = cross_correlation(raw.channel(raw.channel_index(label).unwrap()), eog, 0);
        let after = cross_correlation(clean.channel(clean.channel_index(label).unwrap()), eog, 0);
        println!("{label}: correlation with VEOG {before:.3} -> {after:.3}");
    }
    let analysis = clean.select(&rec.analysis_channels)?;
    let set = segment_trials(&analysis, rec, &load_markers(&subject.markers)?, &subject.id)?;
    for t in &set.trials {
        println!("trial {} ({}): task {} samples, rest {} samples", t.trial_index, t.label, t.task.len(), t.rest.len());
    }
    println!("{} trials dropped", set.dropped);
    Ok(())
}
