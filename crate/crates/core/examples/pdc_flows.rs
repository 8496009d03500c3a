//! Partial directed coherence of a two-node VAR(1) and its band-integrated
//! flows under both normalizations.
//!
//! cargo run --example pdc_flows

use ndarray::Array3;

use scau::connectivity::{flow, normalized_band, pdc_squared_at, PdcNormalization};

fn main() -> scau::Result<()> {
    let mut phi = Array3::zeros((1, 2, 2));
    phi[[0, 0, 0]] = 0.5;
    phi[[0, 1, 0]] = 0.5;
    let nodes = vec!["a".to_string(), "b".to_string()];
    for f in [0.0, 0.1, 0.25, 0.5] {
        let sq = pdc_squared_at(&phi, f, PdcNormalization::PerSource);
        println!("f = {f:.2}: |pi_a->a|^2 = {:.3}, |pi_a->b|^2 = {:.3}", sq[[0, 0]], sq[[0, 1]]);
    }
    for norm in [PdcNormalization::PerSource, PdcNormalization::PerTarget] {
        let full = flow(&phi, nodes.clone(), 0.0, 0.5, 512, norm)?;
        println!("{norm:?} full-range flows:\n{:.4}", full.values);
    }
    let (lo, hi) = normalized_band(0.0, 4.0, 200.0)?;
    let delta = flow(&phi, nodes, lo, hi, 512, PdcNormalization::PerSource)?;
    println!("delta-band flows at 200 Hz:\n{:.5}", delta.values);
    Ok(())
}
