//! Numerical checks of the analytic results: VAR cross terms for the
//! modulated pair, the oscillator cross-correlation bounds and the
//! covariance table.
//!
//! cargo run --release --example lemma_oracles

use scau::oracle::{covtable, modulated_pair_cross_coefficients, multicollinearity_rho, verify, ModulatedPairParams};

fn main() -> scau::Result<()> {
    for kappa in [1.0, 10.0, 20.0] {
        let c = modulated_pair_cross_coefficients(&ModulatedPairParams::new(0.005, kappa))?;
        println!("kappa = {kappa}: |phi_xy| = {:.4?}", c);
    }
    println!("rho_AB(1) at w* = 0.02, tau = 3: {:.6}", multicollinearity_rho(0.02, 3.0)?);
    println!("rho_AB(1) at w* = 0.1, tau = 20: {:.6}", multicollinearity_rho(0.1, 20.0)?);
    let t = covtable(1.0, 10.0)?;
    println!("peak covariance ratio kappa=1 / kappa=10: {:.3?}", t.ratios);
    let checks = verify("all")?;
    let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
    println!("{} checks, {} failed", checks.len(), failed.len());
    for c in failed {
        println!("  [{}] {}: {:.6} (expected {})", c.suite, c.name, c.computed, c.expected);
    }
    Ok(())
}
