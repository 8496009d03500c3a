//! Percentile bootstrap intervals for per-subject contrasts, and a quick
//! look at their coverage.
//!
//! cargo run --release --example bootstrap_ci

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use scau::resampling::{bootstrap_edges, bootstrap_mean, BootstrapConfig};

fn main() -> scau::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let edges = [("F1:delta -> P7:theta", 14.0), ("F2:alpha -> P8:alpha", 2.0)];
    let samples: Vec<Vec<f64>> = edges
        .iter()
        .map(|(_, mu)| {
            let d = Normal::new(*mu, 3.0).unwrap();
            (0..26).map(|_| d.sample(&mut rng)).collect()
        })
        .collect();
    let cfg = BootstrapConfig { seed: 7, ..BootstrapConfig::default() };
    for ((name, _), s) in edges.iter().zip(bootstrap_edges(&samples, &cfg)?) {
        println!("{name}: mean {:.2}, 95% CI [{:.2}, {:.2}]", s.mean, s.ci_low, s.ci_high);
    }
    let d = Normal::new(0.0, 1.0).unwrap();
    let trials = 200;
    let covered = (0..trials)
        .filter(|&i| {
            let mut r = ChaCha8Rng::seed_from_u64(100 + i);
            let x: Vec<f64> = (0..50).map(|_| d.sample(&mut r)).collect();
            bootstrap_mean(&x, &BootstrapConfig { seed: i, ..cfg.clone() }).unwrap().covers(0.0)
        })
        .count();
    println!("coverage of the true mean over {trials} samples: {:.1}%", 100.0 * covered as f64 / trials as f64);
    Ok(())
}
