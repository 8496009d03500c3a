//! Fits a dense VAR to a simulated three-channel system with one coupling
//! and reports coefficients, standard errors and Granger flags.
//!
//! cargo run --example var_fit

use ndarray::{Array2, Array3};

use scau::varfit::{fit_var, granger_matrix, simulate_var};
use scau::TimeSeriesFrame;

fn main() -> scau::Result<()> {
    let mut phi = Array3::zeros((2, 3, 3));
    phi[[0, 0, 0]] = 0.5;
    phi[[0, 1, 0]] = 0.4;
    phi[[1, 2, 2]] = -0.3;
    let data = simulate_var(&phi, &Array2::eye(3), 5000, 1)?;
    let frame = TimeSeriesFrame::new(vec!["x".into(), "y".into(), "z".into()], 100.0, data)?;
    let fit = fit_var(&frame, 2)?;
    println!("spectral radius {:.3}, condition number {:.1}", fit.spectral_radius()?, fit.condition_number);
    for l in 0..2 {
        for t in 0..3 {
            for s in 0..3 {
                let (v, se) = (fit.phi[[l, t, s]], fit.std_err[[l, t, s]]);
                if (v / se).abs() > 3.0 {
                    println!("lag {} {} -> {}: {v:.3} (se {se:.3}, true {})", l + 1, fit.labels[s], fit.labels[t], phi[[l, t, s]]);
                }
            }
        }
    }
    let g = granger_matrix(&fit, 0.05)?;
    for ((t, s), flag) in g.indexed_iter() {
        if *flag && t != s {
            println!("Granger: {} -> {}", fit.labels[s], fit.labels[t]);
        }
    }
    Ok(())
}
