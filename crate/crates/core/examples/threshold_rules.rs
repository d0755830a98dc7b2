//! Threshold-rule model: features become `x >= t` rules and the model pays
//! per feature used and per extra threshold.

use supersparse::data::{binarize, class_weights, load_csv, BinarizationSpec, Directive, WeightMode};
use supersparse::formulate::{build_tilm, default_gamma, TilmParams};
use supersparse::milp::{branch_and_bound, SolveOptions};
use supersparse::scoring::{render_table, zero_one_loss};

fn main() -> supersparse::Result<()> {
    let raw = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/breastcancer.csv"), "Malignant")?;
    let spec: BinarizationSpec = ["ClumpThickness", "UniformityOfCellSize", "BareNuclei", "Mitoses"]
        .iter()
        .map(|f| (f.to_string(), Directive::Thresholds(vec![2.0, 4.0, 7.0])))
        .collect();
    let (data, rules) = binarize(&raw, &spec)?;
    let params = TilmParams {
        c_f: 0.01,
        c_t: 0.002,
        eps: 1e-5,
        r_max: 2,
        gamma: default_gamma(&data),
        cap: 5,
        intercept_cap: 50,
        weights: class_weights(&data, WeightMode::Uniform)?,
    };
    let instance = build_tilm(&data, &rules, &params)?;
    let result = branch_and_bound(&instance, &SolveOptions::default().with_time_limit(20.0));
    let model = instance.try_decode(&result)?;
    print!("{}", render_table(&model, None));
    println!("training error {:.2}% ({})", 100.0 * zero_one_loss(&model, &data)?.rate, result.status.as_str());
    Ok(())
}
