//! Recovers a sparse system over (channel, band) nodes: LASSO support
//! selection followed by a least-squares refit.
//!
//! cargo run --release --example sparse_scau_fit

use ndarray::{Array2, Array3};

use scau::lassle::{fit_scau_array, LassoConfig};
use scau::varfit::simulate_var;

fn main() -> scau::Result<()> {
    let channels: Vec<String> = ["F1", "F2", "P7", "P8"].map(String::from).to_vec();
    let bands: Vec<String> = ["delta", "theta", "alpha"].map(String::from).to_vec();
    let k = channels.len() * bands.len();
    let mut phi = Array3::zeros((2, k, k));
    phi[[0, 7, 0]] = 0.4;
    phi[[1, 3, 10]] = -0.4;
    phi[[0, 11, 5]] = 0.4;
    let data = simulate_var(&phi, &Array2::eye(k), 1000, 3)?;
    let fit = fit_scau_array(data.view(), channels, bands, 2, &LassoConfig::default())?;
    let labels = fit.node_labels();
    println!("{} of {} coefficients selected ({:.2}%)", fit.support_size(), fit.dimensionality(), 100.0 * fit.support_density());
    for ((l, t, s), sel) in fit.support.indexed_iter() {
        if *sel {
            println!(
                "lag {} {} -> {}: {:.3} ± {:.3} (true {})",
                l + 1,
                labels[s],
                labels[t],
                fit.phi[[l, t, s]],
                fit.std_err[[l, t, s]],
                phi[[l, t, s]]
            );
        }
    }
    Ok(())
}
