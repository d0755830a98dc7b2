//! Learns an "at least M of N rules" classifier.

use supersparse::data::{binarize, class_weights, load_csv, BinarizationSpec, Directive, WeightMode};
use supersparse::formulate::{build_mofn, MofNRules};
use supersparse::milp::{branch_and_bound, SolveOptions};
use supersparse::scoring::zero_one_loss;

fn main() -> supersparse::Result<()> {
    let raw = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/breastcancer.csv"), "Malignant")?;
    let spec: BinarizationSpec = raw.feature_names()[1..]
        .iter()
        .map(|f| (f.clone(), Directive::Thresholds(vec![3.0, 6.0])))
        .collect();
    let (data, _) = binarize(&raw, &spec)?;
    let weights = class_weights(&data, WeightMode::Uniform)?;
    let instance = build_mofn(&data, 0.01, 0.5, weights)?;
    let result = branch_and_bound(&instance, &SolveOptions::default().with_time_limit(20.0));
    let model = instance.try_decode(&result)?;
    print!("{}", MofNRules::decode(&model)?.render(Some("MALIGNANT")));
    println!("training error {:.2}% ({})", 100.0 * zero_one_loss(&model, &data)?.rate, result.status.as_str());
    Ok(())
}
