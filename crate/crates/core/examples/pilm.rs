//! Personalized interpretability: coefficients from cheap and expensive value
//! sets, each with its own cost.

use supersparse::data::{class_weights, load_csv, WeightMode};
use supersparse::formulate::{build_pilm, default_gamma, pilm_objective, InterpretabilitySet};
use supersparse::milp::{branch_and_bound, SolveOptions};
use supersparse::scoring::{render_table, Domain};

fn main() -> supersparse::Result<()> {
    let data = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/breastcancer.csv"), "Malignant")?;
    let sets = [
        InterpretabilitySet::new(vec![0], 0.0),
        InterpretabilitySet::symmetric_range(1, 1, 0.005),
        InterpretabilitySet::symmetric_range(2, 5, 0.02),
    ];
    let weights = class_weights(&data, WeightMode::Uniform)?;
    let instance = build_pilm(&data, &sets, default_gamma(&data), weights, Domain::symmetric(100))?;
    let result = branch_and_bound(&instance, &SolveOptions::default().with_time_limit(20.0));
    let model = instance.try_decode(&result)?;
    print!("{}", render_table(&model, None));
    println!("objective {:.5} ({})", pilm_objective(&model, &data, &sets, weights)?, result.status.as_str());
    Ok(())
}
