//! Removes examples whose label the LP relaxation already decides.
//!
//! Every example whose sign-flipped relaxation exceeds the level set
//! `[Z*, Z* + ε]` is dropped without changing the SLIM minimizer.

use supersparse::data::load_csv;
use supersparse::formulate::{build_slim, SlimParams};
use supersparse::reduce::{analyze, epsilon_bounds, epsilon_grid};

fn main() -> supersparse::Result<()> {
    let data = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/breastcancer.csv"), "Malignant")?;
    let params = SlimParams::new(&data, 0.01, 10, 100);
    let instance = build_slim(&data, &params, &[])?;
    let analysis = analyze(&data, &instance)?;
    let (_, eps_max) = epsilon_bounds(&instance, analysis.surrogate_optimum, None)?;
    println!("LP optimum {:.6}, zero-model width {:.6}", analysis.surrogate_optimum, eps_max);
    println!("{:>12}  {:>8}  {:>8}", "epsilon", "kept", "removed");
    for eps in epsilon_grid(1e-3, eps_max, 6) {
        let r = analysis.report(eps)?;
        println!("{eps:>12.6}  {:>8}  {:>7.1}%", r.m, 100.0 * r.removed_fraction);
    }
    Ok(())
}
