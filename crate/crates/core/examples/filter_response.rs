//! Designs the δ low-pass and an α band-pass, prints their closed-form
//! responses and pushes a few sines through the low-pass.
//!
//! cargo run --example filter_response

use std::f64::consts::PI;

use scau::filters::{design, FilterSpec};

fn main() -> scau::Result<()> {
    let f_s = 200.0;
    let lp = design(&FilterSpec::lowpass(4.0, f_s))?;
    let bp = design(&FilterSpec::bandpass(8.0, 12.0, f_s))?;
    println!("low-pass: order {} x {} stages, largest pole modulus {:.4}", lp.order, lp.stages, lp.max_pole_modulus());
    println!("{:>6}  {:>10}  {:>10}", "Hz", "LPF dB", "BPF dB");
    for f in [0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 16.0, 24.0] {
        let db = |g: f64| 20.0 * g.max(1e-300).log10();
        println!("{f:>6.1}  {:>10.2}  {:>10.2}", db(lp.response(f).norm()), db(bp.response(f).norm()));
    }
    for f in [1.0, 4.0, 8.0] {
        let x: Vec<f64> = (0..20_000).map(|t| (2.0 * PI * f * t as f64 / f_s).sin()).collect();
        let y = lp.filter(&x);
        let peak = y[10_000..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        println!("{f} Hz sine through the low-pass: steady-state amplitude {peak:.4}");
    }
    println!("{}", serde_json::to_string(&FilterSpec::lowpass(4.0, f_s)).unwrap());
    Ok(())
}
