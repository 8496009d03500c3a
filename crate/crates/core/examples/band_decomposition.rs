//! Splits a two-tone signal into the twelve 4 Hz bands and reports how the
//! energy is distributed.
//!
//! cargo run --example band_decomposition

use std::f64::consts::PI;

use scau::bands::{decompose, default_scheme};
use scau::spectrum::rms;
use scau::TimeSeriesFrame;

fn main() -> scau::Result<()> {
    let f_s = 200.0;
    let scheme = default_scheme(f_s)?;
    let x: Vec<f64> = (0..8000)
        .map(|t| {
            let t = t as f64 / f_s;
            (2.0 * PI * 10.0 * t).sin() + 0.5 * (2.0 * PI * 21.0 * t).sin()
        })
        .collect();
    let frame = TimeSeriesFrame::from_channels(vec!["Fz".into()], f_s, vec![x])?;
    let comps = decompose(&frame, &scheme)?;
    for (b, band) in scheme.bands.iter().enumerate() {
        let y = &comps.component(0, b)[2000..];
        println!("{:>8} [{:>4.0}, {:>4.0}) Hz  rms {:.4}", band.label, band.f_a, band.f_b, rms(y));
    }
    Ok(())
}
