//! Translates a 10 Hz tone in the α band and a 2 Hz tone in δ to the
//! intermediate frequency and locates the mapped peaks.
//!
//! cargo run --example frequency_mapping

use std::f64::consts::PI;

use scau::bands::default_scheme;
use scau::mapping::{BandMapper, MappingConfig};
use scau::spectrum::{periodogram, tone_amplitude};

fn main() -> scau::Result<()> {
    let f_s = 200.0;
    let scheme = default_scheme(f_s)?;
    let cfg = MappingConfig::new(f_s).with_fi(20.0);
    for (label, f) in [("alpha", 10.0), ("delta", 2.0)] {
        let band = &scheme.bands[scheme.index_of(label).unwrap()];
        let mapper = BandMapper::new(band, &cfg)?;
        let x: Vec<f64> = (0..40_000).map(|t| (2.0 * PI * f * t as f64 / f_s).cos()).collect();
        let y = mapper.map(&x);
        let steady = &y[20_000..];
        let p = periodogram(steady, f_s, true);
        let expected = mapper.mapped_frequency(f);
        println!(
            "{label}: {f} Hz -> peak {:.2} Hz (expected {expected:.2}), amplitude {:.3}, {:.1}% of power in [{}, {}] Hz",
            p.peak(),
            tone_amplitude(steady, f_s, expected),
            100.0 * p.fraction_in(cfg.f_i - band.width(), cfg.f_i),
            cfg.f_i - band.width(),
            cfg.f_i
        );
    }
    Ok(())
}
